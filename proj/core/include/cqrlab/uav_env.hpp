#pragma once

// UAV data-collection MDP on a square grid. The UAV moves one cell per step
// and may serve one ground device per step; serving resets that device's age
// of information (AoI) and costs the uplink power needed to close the link.
// A rectangle of cells is a risk region: every step that ends inside it draws
// a large penalty with a fixed probability.

#include <compare>
#include <cstdint>
#include <vector>

#include "cqrlab/rng.hpp"

namespace cqrlab::uav {

struct Cell {
  int x = 0;
  int y = 0;
  auto operator<=>(const Cell&) const = default;
};

/// Inclusive cell rectangle.
struct CellRect {
  Cell lo;
  Cell hi;
  bool contains(Cell c) const { return c.x >= lo.x && c.x <= hi.x && c.y >= lo.y && c.y <= hi.y; }
  bool operator==(const CellRect&) const = default;
};

struct RadioParams {
  double noise_w = 1e-13;  // -100 dBm
  double snr_threshold = 10.0;  // 10 dB
  double carrier_hz = 2e9;
};

struct UavConfig {
  int grid_cells = 11;
  double cell_m = 100.0;
  int num_devices = 10;
  std::vector<Cell> device_positions;  // filled by place_devices()
  double altitude_m = 100.0;
  int episode_len = 300;
  int aoi_cap = 64;
  double w_aoi = 1.0;
  double w_power = 1.0;
  /// Transmit power is divided by the power needed at this slant distance.
  double power_ref_distance_m = 100.0;
  CellRect risk_region{{4, 4}, {6, 6}};
  double risk_prob = 0.10;
  double risk_penalty = -100.0;
  RadioParams radio;
  double reward_scale = 20.0;
};

/// Default configuration with `num_devices` devices placed from `topology_seed`.
UavConfig default_config(std::uint64_t topology_seed);

/// Centered square of side `side` cells (clipped to the grid).
CellRect central_region(int grid_cells, int side);

/// Distinct uniformly drawn device cells; fixed per experiment seed.
std::vector<Cell> place_devices(const UavConfig& cfg, std::uint64_t seed);

/// Throws InvalidArgument describing the first violated constraint.
void validate(const UavConfig& cfg);

enum class Move { east = 0, west = 1, north = 2, south = 3, idle = 4 };
inline constexpr int kMoveCount = 5;

struct UavAction {
  Move move = Move::idle;
  int serve = -1;  // device index, or -1 for silent
  bool operator==(const UavAction&) const = default;
};

int action_count(const UavConfig& cfg);
int encode_action(const UavConfig& cfg, UavAction a);
/// Throws InvalidArgument for an index outside [0, action_count).
UavAction decode_action(const UavConfig& cfg, int index);

struct UavWorldState {
  Cell uav;
  std::vector<int> aoi;
  int t = 0;
  bool operator==(const UavWorldState&) const = default;
};

UavWorldState uav_reset(const UavConfig& cfg, std::uint64_t seed);

struct UavStep {
  UavWorldState state;
  double reward = 0.0;
  bool done = false;
  bool in_risk = false;    // new cell lies in the risk region
  bool penalized = false;  // risk penalty drawn this step
};

/// Advances one step. The rng is consumed only when the new cell lies in the
/// risk region and risk_prob is positive.
UavStep uav_step(const UavConfig& cfg, const UavWorldState& state, int action, Rng& rng);

/// Uplink power for a device at `device` when the UAV hovers over `uav`:
/// inverse power control on a free-space line-of-sight channel.
double required_power(const UavConfig& cfg, Cell device, Cell uav);

/// Slant distance in metres between a device cell and the UAV above `uav`.
double slant_distance(const UavConfig& cfg, Cell device, Cell uav);

double required_power_at(const UavConfig& cfg, double distance_m);

bool in_risk_region(const UavConfig& cfg, Cell cell);

/// (x, y) scaled to [0, 1] followed by every AoI divided by aoi_cap.
std::vector<double> uav_observation(const UavConfig& cfg, const UavWorldState& state);
int observation_dim(const UavConfig& cfg);

}  // namespace cqrlab::uav
