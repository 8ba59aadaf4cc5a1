#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cqrlab/error.hpp"
#include "cqrlab/replay.hpp"
#include "cqrlab/serialize.hpp"

namespace cqrlab {
namespace {

namespace fs = std::filesystem;

Transition tr(double id, int action = 0, bool done = false) {
  return Transition{{id, id + 0.5}, action, -id, {id + 1.0, id + 1.5}, done};
}

fs::path temp_path(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "cqrlab_unit";
  fs::create_directories(dir);
  return dir / name;
}

TEST(ReplayBuffer, FifoEviction) {
  ReplayBuffer buf(3);
  for (int i = 1; i <= 5; ++i) buf.push(tr(i));
  ASSERT_EQ(buf.size(), 3u);
  EXPECT_EQ(buf.at(0), tr(3));
  EXPECT_EQ(buf.at(1), tr(4));
  EXPECT_EQ(buf.at(2), tr(5));
  EXPECT_EQ(buf.total_pushed(), 5u);
  EXPECT_THROW(buf.at(3), InvalidArgument);
}

TEST(ReplayBuffer, SizeBeforeCapacity) {
  ReplayBuffer buf(10);
  for (int i = 0; i < 4; ++i) buf.push(tr(i));
  EXPECT_EQ(buf.size(), 4u);
  EXPECT_EQ(buf.contents().front(), tr(0));
}

TEST(ReplayBuffer, DimensionCheck) {
  ReplayBuffer buf(4);
  buf.push(tr(1));
  Transition bad = tr(2);
  bad.state.push_back(0.0);
  EXPECT_THROW(buf.push(bad), DimensionError);
}

TEST(ReplayBuffer, SampleSingletonAndEmpty) {
  ReplayBuffer buf(4);
  Rng rng(1);
  EXPECT_THROW(buf.sample(2, rng), InvalidArgument);
  buf.push(tr(7));
  for (const auto& t : buf.sample(5, rng)) EXPECT_EQ(t, tr(7));
}

TEST(ReplayBuffer, SampleUniform) {
  ReplayBuffer buf(10);
  for (int i = 0; i < 10; ++i) buf.push(tr(i));
  Rng rng(3);
  std::vector<int> hist(10, 0);
  constexpr int n = 100000;
  for (int k = 0; k < n / 100; ++k) {
    for (const auto& t : buf.sample(100, rng)) ++hist[static_cast<int>(t.state[0])];
  }
  for (int h : hist) EXPECT_NEAR(h / double(n), 0.1, 0.002);
}

TEST(ReplayBuffer, SameSeedSameBatch) {
  ReplayBuffer buf(50);
  for (int i = 0; i < 50; ++i) buf.push(tr(i));
  Rng a(9), b(9);
  EXPECT_EQ(buf.sample(16, a), buf.sample(16, b));
}

TEST(ExtractOffline, DefaultDatasetSizes) {
  ReplayBuffer uav(30000);
  for (int i = 0; i < 30000; ++i) uav.push(tr(i));
  const auto ds = extract_offline(uav, 0.1, {});
  ASSERT_EQ(ds.records.size(), 3000u);
  EXPECT_EQ(ds.header.count, 3000u);
  EXPECT_EQ(ds.records.front(), tr(27000));
  EXPECT_EQ(ds.records.back(), tr(29999));

  ReplayBuffer rrm(300000);
  for (int i = 0; i < 300000; ++i) rrm.push(Transition{{double(i)}, 0, 0.0, {0.0}, false});
  EXPECT_EQ(extract_offline(rrm, 0.1, {}).records.size(), 30000u);
}

TEST(ExtractOffline, WholeBufferAndErrors) {
  ReplayBuffer buf(5);
  for (int i = 0; i < 7; ++i) buf.push(tr(i));
  const auto ds = extract_offline(buf, 1.0, {});
  EXPECT_EQ(ds.records, buf.contents());
  EXPECT_THROW(extract_offline(buf, 0.0, {}), InvalidArgument);
  EXPECT_THROW(extract_offline(buf, 1.5, {}), InvalidArgument);
  EXPECT_THROW(extract_offline(ReplayBuffer(3), 0.5, {}), InvalidArgument);
}

OfflineDataset sample_dataset() {
  OfflineDataset ds;
  ds.header.env_name = "uav";
  ds.header.obs_dim = 2;
  ds.header.action_count = 4;
  ds.header.behavioral_policy_tag = "online-dqn";
  ds.header.source_seed = 12345678901234ULL;
  ds.records = {tr(0.1, 1), tr(1.0 / 3.0, 3, true), tr(-2e-300, 0)};
  ds.records[1].reward = std::nextafter(0.1, 1.0);
  ds.header.count = ds.records.size();
  return ds;
}

TEST(Dataset, RoundTripFieldExact) {
  const auto ds = sample_dataset();
  const auto path = temp_path("roundtrip.jsonl");
  save_dataset(ds, path);
  EXPECT_EQ(load_dataset(path), ds);
}

TEST(Dataset, TruncatedRecordNamed) {
  const auto ds = sample_dataset();
  const auto path = temp_path("truncated.jsonl");
  save_dataset(ds, path);
  std::ifstream in(path);
  std::stringstream all;
  all << in.rdbuf();
  std::string text = all.str();
  text.resize(text.size() - 10);  // cut into the last record
  std::ofstream(path, std::ios::trunc) << text;
  try {
    load_dataset(path);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.record(), 3u);
  }
}

TEST(Dataset, MissingRecordAndBadSchema) {
  auto ds = sample_dataset();
  const auto path = temp_path("short.jsonl");
  save_dataset(ds, path);
  {
    std::ifstream in(path);
    std::string header, r1;
    std::getline(in, header);
    std::getline(in, r1);
    std::ofstream(path, std::ios::trunc) << header << "\n" << r1 << "\n";
  }
  try {
    load_dataset(path);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.record(), 2u);
  }
  ds.header.schema_version = 2;
  save_dataset(ds, path);
  try {
    load_dataset(path);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.record(), 0u);
  }
}

TEST(Dataset, EnvMismatchGuard) {
  const auto ds = sample_dataset();
  EXPECT_NO_THROW(check_dataset_matches(ds.header, "uav", 2, 4));
  EXPECT_THROW(check_dataset_matches(ds.header, "rrm", 2, 4), MismatchError);
  EXPECT_THROW(check_dataset_matches(ds.header, "uav", 3, 4), MismatchError);
  EXPECT_THROW(check_dataset_matches(ds.header, "uav", 2, 5), MismatchError);
}

TEST(Checkpoint, RoundTripAndZeroNet) {
  Rng rng(4);
  const nn::Mlp net = nn::make_he_uniform_mlp({3, 5, 4}, rng);
  const CheckpointMeta meta{"cqr", 2, 0xdeadbeefULL, 3, 2};
  const auto path = temp_path("net.ckpt");
  save_checkpoint(net, meta, path);
  const Checkpoint back = load_checkpoint(path);
  EXPECT_TRUE(nn::identical(back.net, net));
  EXPECT_EQ(back.meta, meta);

  const nn::Mlp zero = nn::make_zero_mlp({2, 3, 1});
  save_checkpoint(zero, {"dqn", 1, 0, 2, 1}, path);
  const Checkpoint z = load_checkpoint(path);
  for (const auto& w : z.net.weights) EXPECT_EQ(w.cwiseAbs().maxCoeff(), 0.0);
  for (const auto& b : z.net.biases) EXPECT_EQ(b.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Checkpoint, Compatibility) {
  const CheckpointMeta qr{"qrdqn", 32, 1, 12, 55};
  const CheckpointMeta dqn{"dqn", 1, 1, 12, 55};
  EXPECT_THROW(check_checkpoint_compatible(qr, dqn), MismatchError);
  CheckpointMeta other_dims = qr;
  other_dims.obs_dim = 24;
  EXPECT_THROW(check_checkpoint_compatible(qr, other_dims), MismatchError);
  CheckpointMeta other_hash = qr;
  other_hash.config_hash = 2;
  const auto warnings = check_checkpoint_compatible(qr, other_hash);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find(hash_hex(1)), std::string::npos);
  EXPECT_TRUE(check_checkpoint_compatible(qr, qr).empty());
}

TEST(Checkpoint, CorruptLayerNamed) {
  Rng rng(4);
  const nn::Mlp net = nn::make_he_uniform_mlp({3, 5, 4}, rng);
  const auto path = temp_path("bad.ckpt");
  save_checkpoint(net, {"dqn", 1, 0, 3, 4}, path);
  std::ifstream in(path);
  std::string header, l1;
  std::getline(in, header);
  std::getline(in, l1);
  std::ofstream(path, std::ios::trunc) << header << "\n" << l1 << "\n";
  try {
    load_checkpoint(path);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.record(), 2u);
  }
}

}  // namespace
}  // namespace cqrlab
