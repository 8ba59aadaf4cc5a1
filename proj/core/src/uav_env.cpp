#include "cqrlab/uav_env.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "cqrlab/error.hpp"

namespace cqrlab::uav {
namespace {

constexpr double kSpeedOfLight = 299792458.0;

bool inside(const UavConfig& cfg, Cell c) {
  return c.x >= 0 && c.y >= 0 && c.x < cfg.grid_cells && c.y < cfg.grid_cells;
}

Cell apply_move(const UavConfig& cfg, Cell c, Move m) {
  Cell next = c;
  switch (m) {
    case Move::east: next.x += 1; break;
    case Move::west: next.x -= 1; break;
    case Move::north: next.y += 1; break;
    case Move::south: next.y -= 1; break;
    case Move::idle: break;
  }
  return inside(cfg, next) ? next : c;
}

}  // namespace

CellRect central_region(int grid_cells, int side) {
  side = std::clamp(side, 1, grid_cells);
  const int lo = (grid_cells - side) / 2;
  return {{lo, lo}, {lo + side - 1, lo + side - 1}};
}

std::vector<Cell> place_devices(const UavConfig& cfg, std::uint64_t seed) {
  const int cells = cfg.grid_cells * cfg.grid_cells;
  if (cfg.num_devices > cells) throw InvalidArgument("more devices than grid cells");
  Rng rng(seed);
  std::vector<Cell> out;
  while (static_cast<int>(out.size()) < cfg.num_devices) {
    Cell c{rng.index(cfg.grid_cells), rng.index(cfg.grid_cells)};
    if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  }
  return out;
}

UavConfig default_config(std::uint64_t topology_seed) {
  UavConfig cfg;
  cfg.risk_region = central_region(cfg.grid_cells, 3);
  cfg.device_positions = place_devices(cfg, topology_seed);
  return cfg;
}

void validate(const UavConfig& cfg) {
  if (cfg.grid_cells < 1) throw InvalidArgument("uav: grid_cells must be >= 1");
  if (!(cfg.cell_m > 0)) throw InvalidArgument("uav: cell_m must be positive");
  if (cfg.num_devices < 1) throw InvalidArgument("uav: num_devices must be >= 1");
  if (static_cast<int>(cfg.device_positions.size()) != cfg.num_devices) {
    throw InvalidArgument("uav: device_positions has " + std::to_string(cfg.device_positions.size()) +
                          " entries for " + std::to_string(cfg.num_devices) + " devices");
  }
  for (const Cell& c : cfg.device_positions) {
    if (!inside(cfg, c)) throw InvalidArgument("uav: device position outside the grid");
  }
  if (!(cfg.altitude_m > 0)) throw InvalidArgument("uav: altitude_m must be positive");
  if (cfg.episode_len < 1) throw InvalidArgument("uav: episode_len must be >= 1");
  if (cfg.aoi_cap < 1) throw InvalidArgument("uav: aoi_cap must be >= 1");
  if (cfg.w_aoi < 0 || cfg.w_power < 0) throw InvalidArgument("uav: reward weights must be >= 0");
  if (!(cfg.power_ref_distance_m > 0)) throw InvalidArgument("uav: power_ref_distance_m must be positive");
  if (!inside(cfg, cfg.risk_region.lo) || !inside(cfg, cfg.risk_region.hi) ||
      cfg.risk_region.lo.x > cfg.risk_region.hi.x || cfg.risk_region.lo.y > cfg.risk_region.hi.y) {
    throw InvalidArgument("uav: risk_region must be a non-empty rectangle inside the grid");
  }
  if (!(cfg.risk_prob >= 0.0 && cfg.risk_prob <= 1.0)) throw InvalidArgument("uav: risk_prob must be in [0, 1]");
  if (cfg.risk_penalty > 0) throw InvalidArgument("uav: risk_penalty must be <= 0");
  if (!(cfg.radio.noise_w > 0 && cfg.radio.snr_threshold > 0 && cfg.radio.carrier_hz > 0)) {
    throw InvalidArgument("uav: radio parameters must be positive");
  }
  if (!(cfg.reward_scale > 0)) throw InvalidArgument("uav: reward_scale must be positive");
}

int action_count(const UavConfig& cfg) { return kMoveCount * (cfg.num_devices + 1); }

int encode_action(const UavConfig& cfg, UavAction a) {
  const int serve_slot = a.serve < 0 ? cfg.num_devices : a.serve;
  return static_cast<int>(a.move) * (cfg.num_devices + 1) + serve_slot;
}

UavAction decode_action(const UavConfig& cfg, int index) {
  if (index < 0 || index >= action_count(cfg)) {
    throw InvalidArgument("uav: action index " + std::to_string(index) + " outside [0, " +
                          std::to_string(action_count(cfg)) + ")");
  }
  const int per_move = cfg.num_devices + 1;
  const int serve_slot = index % per_move;
  return {static_cast<Move>(index / per_move), serve_slot == cfg.num_devices ? -1 : serve_slot};
}

UavWorldState uav_reset(const UavConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  UavWorldState s;
  s.uav = {rng.index(cfg.grid_cells), rng.index(cfg.grid_cells)};
  s.aoi.assign(static_cast<std::size_t>(cfg.num_devices), 1);
  s.t = 0;
  return s;
}

double slant_distance(const UavConfig& cfg, Cell device, Cell uav) {
  const double dx = (device.x - uav.x) * cfg.cell_m;
  const double dy = (device.y - uav.y) * cfg.cell_m;
  return std::sqrt(dx * dx + dy * dy + cfg.altitude_m * cfg.altitude_m);
}

double required_power_at(const UavConfig& cfg, double distance_m) {
  const double fspl = 4.0 * std::numbers::pi * distance_m * cfg.radio.carrier_hz / kSpeedOfLight;
  return cfg.radio.snr_threshold * cfg.radio.noise_w * fspl * fspl;
}

double required_power(const UavConfig& cfg, Cell device, Cell uav) {
  return required_power_at(cfg, slant_distance(cfg, device, uav));
}

bool in_risk_region(const UavConfig& cfg, Cell cell) { return cfg.risk_region.contains(cell); }

UavStep uav_step(const UavConfig& cfg, const UavWorldState& state, int action, Rng& rng) {
  const UavAction a = decode_action(cfg, action);
  UavStep out;
  UavWorldState& next = out.state;
  next.uav = apply_move(cfg, state.uav, a.move);
  next.aoi = state.aoi;
  for (int k = 0; k < cfg.num_devices; ++k) {
    next.aoi[k] = k == a.serve ? 1 : std::min(state.aoi[k] + 1, cfg.aoi_cap);
  }
  next.t = state.t + 1;

  double aoi_sum = 0.0;
  for (int v : next.aoi) aoi_sum += v;
  double power = 0.0;
  if (a.serve >= 0) {
    power = required_power(cfg, cfg.device_positions[a.serve], next.uav) /
            required_power_at(cfg, cfg.power_ref_distance_m);
  }
  // Per-device AoI weight is w_aoi / K, so the AoI term is the mean age.
  const double cost = cfg.w_aoi * aoi_sum / cfg.num_devices + cfg.w_power * power;
  out.reward = -cost / cfg.reward_scale;

  out.in_risk = in_risk_region(cfg, next.uav);
  if (out.in_risk && cfg.risk_prob > 0.0 && rng.bernoulli(cfg.risk_prob)) {
    out.penalized = true;
    out.reward += cfg.risk_penalty / cfg.reward_scale;
  }
  out.done = next.t >= cfg.episode_len;
  return out;
}

int observation_dim(const UavConfig& cfg) { return 2 + cfg.num_devices; }

std::vector<double> uav_observation(const UavConfig& cfg, const UavWorldState& state) {
  std::vector<double> obs;
  obs.reserve(static_cast<std::size_t>(observation_dim(cfg)));
  const double span = cfg.grid_cells > 1 ? cfg.grid_cells - 1.0 : 1.0;
  obs.push_back(state.uav.x / span);
  obs.push_back(state.uav.y / span);
  for (int v : state.aoi) obs.push_back(static_cast<double>(v) / cfg.aoi_cap);
  return obs;
}

}  // namespace cqrlab::uav
