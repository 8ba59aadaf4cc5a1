#include <gtest/gtest.h>

#include <cmath>

#include "cqrlab/error.hpp"
#include "cqrlab/uav_env.hpp"

namespace cqrlab::uav {
namespace {

UavConfig config() { return default_config(123); }

int act(const UavConfig& cfg, Move m, int serve) { return encode_action(cfg, {m, serve}); }

TEST(UavConfig, Defaults) {
  const UavConfig cfg = config();
  EXPECT_DOUBLE_EQ(cfg.grid_cells * cfg.cell_m, 1100.0);
  EXPECT_EQ(cfg.num_devices, 10);
  EXPECT_EQ(cfg.device_positions.size(), 10u);
  EXPECT_EQ(cfg.risk_region.lo, (Cell{4, 4}));
  EXPECT_EQ(cfg.risk_region.hi, (Cell{6, 6}));
  EXPECT_DOUBLE_EQ(cfg.risk_prob, 0.1);
  EXPECT_NO_THROW(validate(cfg));
  EXPECT_EQ(action_count(cfg), 55);
  EXPECT_EQ(observation_dim(cfg), 12);
}

TEST(UavConfig, DevicesDistinctAndDeterministic) {
  const UavConfig cfg = config();
  EXPECT_EQ(place_devices(cfg, 9), place_devices(cfg, 9));
  auto cells = place_devices(cfg, 9);
  std::sort(cells.begin(), cells.end());
  EXPECT_EQ(std::adjacent_find(cells.begin(), cells.end()), cells.end());
}

TEST(UavConfig, ValidationErrors) {
  UavConfig cfg = config();
  cfg.risk_prob = 1.5;
  EXPECT_THROW(validate(cfg), InvalidArgument);
  cfg = config();
  cfg.risk_region = {{9, 9}, {11, 11}};
  EXPECT_THROW(validate(cfg), InvalidArgument);
  cfg = config();
  cfg.device_positions.pop_back();
  EXPECT_THROW(validate(cfg), InvalidArgument);
}

TEST(UavAction, EncodeDecodeRoundTrip) {
  const UavConfig cfg = config();
  for (int i = 0; i < action_count(cfg); ++i) EXPECT_EQ(encode_action(cfg, decode_action(cfg, i)), i);
  EXPECT_EQ(decode_action(cfg, act(cfg, Move::north, 3)), (UavAction{Move::north, 3}));
  EXPECT_EQ(decode_action(cfg, act(cfg, Move::idle, -1)).serve, -1);
  EXPECT_THROW(decode_action(cfg, 55), InvalidArgument);
  EXPECT_THROW(decode_action(cfg, -1), InvalidArgument);
}

TEST(UavReset, DeterministicAndFreshAoi) {
  const UavConfig cfg = config();
  EXPECT_EQ(uav_reset(cfg, 5), uav_reset(cfg, 5));
  const UavWorldState s = uav_reset(cfg, 5);
  EXPECT_EQ(s.aoi, std::vector<int>(10, 1));
  EXPECT_EQ(s.t, 0);
}

TEST(UavReset, CellInsideGridForManySeeds) {
  const UavConfig cfg = config();
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const UavWorldState s = uav_reset(cfg, seed);
    ASSERT_GE(s.uav.x, 0);
    ASSERT_LT(s.uav.x, 11);
    ASSERT_GE(s.uav.y, 0);
    ASSERT_LT(s.uav.y, 11);
  }
}

TEST(UavStep, ServedDeviceResets) {
  const UavConfig cfg = config();
  UavWorldState s = uav_reset(cfg, 1);
  s.aoi.assign(10, 5);
  Rng rng(0);
  const UavStep st = uav_step(cfg, s, act(cfg, Move::idle, 3), rng);
  EXPECT_EQ(st.state.aoi[3], 1);
  EXPECT_EQ(st.state.aoi[0], 6);
  EXPECT_EQ(st.state.t, 1);
}

TEST(UavStep, SilentIdleIncrementsAllAndCaps) {
  const UavConfig cfg = config();
  UavWorldState s = uav_reset(cfg, 1);
  s.uav = {0, 0};
  s.aoi.assign(10, 7);
  s.aoi[2] = cfg.aoi_cap;
  Rng rng(0);
  const UavStep st = uav_step(cfg, s, act(cfg, Move::idle, -1), rng);
  for (int k = 0; k < 10; ++k) EXPECT_EQ(st.state.aoi[k], k == 2 ? cfg.aoi_cap : 8);
  EXPECT_EQ(st.state.uav, s.uav);
  // Silent spends no power, so the cost is the mean age alone.
  const double mean_age = (9 * 8.0 + cfg.aoi_cap) / 10.0;
  EXPECT_DOUBLE_EQ(st.reward, -mean_age / cfg.reward_scale);
}

TEST(UavStep, BoundaryClamp) {
  const UavConfig cfg = config();
  UavWorldState s = uav_reset(cfg, 1);
  s.uav = {10, 3};
  Rng rng(0);
  EXPECT_EQ(uav_step(cfg, s, act(cfg, Move::east, -1), rng).state.uav, (Cell{10, 3}));
  EXPECT_EQ(uav_step(cfg, s, act(cfg, Move::west, -1), rng).state.uav, (Cell{9, 3}));
  s.uav = {0, 0};
  EXPECT_EQ(uav_step(cfg, s, act(cfg, Move::west, -1), rng).state.uav, (Cell{0, 0}));
}

TEST(UavStep, PowerCostUsesNewCell) {
  UavConfig cfg = config();
  cfg.w_aoi = 0.0;
  cfg.risk_prob = 0.0;
  UavWorldState s = uav_reset(cfg, 1);
  s.uav = cfg.device_positions[0];
  Rng rng(0);
  const UavStep st = uav_step(cfg, s, act(cfg, Move::idle, 0), rng);
  const double ratio = required_power(cfg, cfg.device_positions[0], s.uav) /
                       required_power_at(cfg, cfg.power_ref_distance_m);
  EXPECT_DOUBLE_EQ(st.reward, -ratio / cfg.reward_scale);
}

TEST(UavStep, PenaltyFrequencyInsideRegion) {
  const UavConfig cfg = config();
  UavWorldState s = uav_reset(cfg, 1);
  s.uav = {5, 5};
  Rng rng(77);
  int hits = 0;
  for (int i = 0; i < 10000; ++i) {
    const UavStep st = uav_step(cfg, s, act(cfg, Move::idle, -1), rng);
    ASSERT_TRUE(st.in_risk);
    hits += st.penalized;
  }
  EXPECT_NEAR(hits / 10000.0, 0.1, 0.01);
}

TEST(UavStep, NoPenaltyOutsideRegionAndRngUntouched) {
  const UavConfig cfg = config();
  UavWorldState s = uav_reset(cfg, 1);
  s.uav = {0, 0};
  Rng rng(3), fresh(3);
  for (int i = 0; i < 100; ++i) {
    const UavStep st = uav_step(cfg, s, act(cfg, Move::idle, -1), rng);
    EXPECT_FALSE(st.in_risk);
    EXPECT_FALSE(st.penalized);
  }
  EXPECT_EQ(rng.next_u64(), fresh.next_u64());
}

TEST(UavStep, DoneAtEpisodeLength) {
  UavConfig cfg = config();
  cfg.episode_len = 3;
  UavWorldState s = uav_reset(cfg, 1);
  Rng rng(0);
  for (int t = 1; t <= 3; ++t) {
    const UavStep st = uav_step(cfg, s, act(cfg, Move::idle, -1), rng);
    EXPECT_EQ(st.done, t == 3);
    s = st.state;
  }
}

TEST(UavStep, DeterministicWithoutRisk) {
  UavConfig cfg = config();
  cfg.risk_prob = 0.0;
  Rng r1(1), r2(999);
  UavWorldState a = uav_reset(cfg, 4), b = a;
  for (int t = 0; t < 50; ++t) {
    const int action = (t * 7) % action_count(cfg);
    const UavStep sa = uav_step(cfg, a, action, r1);
    const UavStep sb = uav_step(cfg, b, action, r2);
    EXPECT_EQ(sa.state, sb.state);
    EXPECT_EQ(sa.reward, sb.reward);
    a = sa.state;
    b = sb.state;
  }
}

TEST(RequiredPower, Geometry) {
  const UavConfig cfg = config();
  EXPECT_DOUBLE_EQ(slant_distance(cfg, {3, 3}, {3, 3}), cfg.altitude_m);
  EXPECT_NEAR(required_power_at(cfg, 200.0) / required_power_at(cfg, 100.0), 4.0, 1e-12);
  EXPECT_LT(required_power(cfg, {0, 0}, {1, 0}), required_power(cfg, {0, 0}, {2, 0}));
}

TEST(RequiredPower, FarthestCornerHandComputed) {
  const UavConfig cfg = config();
  // 10 * 1e-13 * (4 pi * 2e9 / c)^2 * (1000^2 + 1000^2 + 100^2)
  EXPECT_NEAR(required_power(cfg, {0, 0}, {10, 10}) / 0.014126493401023498, 1.0, 1e-9);
}

TEST(RiskRegion, ExhaustiveSweep) {
  const UavConfig cfg = config();
  EXPECT_TRUE(in_risk_region(cfg, {5, 5}));
  EXPECT_FALSE(in_risk_region(cfg, {0, 0}));
  int count = 0;
  for (int x = 0; x < 11; ++x) {
    for (int y = 0; y < 11; ++y) {
      const bool inside = x >= 4 && x <= 6 && y >= 4 && y <= 6;
      EXPECT_EQ(in_risk_region(cfg, {x, y}), inside);
      count += inside;
    }
  }
  EXPECT_EQ(count, 9);
  EXPECT_EQ(central_region(11, 3).lo, (Cell{4, 4}));
}

TEST(UavObservation, ScalingAndBounds) {
  const UavConfig cfg = config();
  UavWorldState s = uav_reset(cfg, 1);
  s.uav = {0, 0};
  auto obs = uav_observation(cfg, s);
  ASSERT_EQ(obs.size(), 12u);
  EXPECT_EQ(obs[0], 0.0);
  EXPECT_EQ(obs[1], 0.0);
  EXPECT_DOUBLE_EQ(obs[2], 1.0 / 64.0);

  Rng rng(2);
  for (int t = 0; t < 500; ++t) {
    s = uav_step(cfg, s, rng.index(action_count(cfg)), rng).state;
    for (double v : uav_observation(cfg, s)) {
      ASSERT_GE(v, 0.0);
      ASSERT_LE(v, 1.0);
    }
  }
}

TEST(UavObservation, SingleAoiChangeMovesOneCoordinate) {
  const UavConfig cfg = config();
  UavWorldState a = uav_reset(cfg, 1);
  UavWorldState b = a;
  b.aoi[4] = 9;
  const auto oa = uav_observation(cfg, a);
  const auto ob = uav_observation(cfg, b);
  int diff = 0;
  for (std::size_t i = 0; i < oa.size(); ++i) diff += oa[i] != ob[i];
  EXPECT_EQ(diff, 1);
  EXPECT_NE(oa[2 + 4], ob[2 + 4]);
}

}  // namespace
}  // namespace cqrlab::uav
