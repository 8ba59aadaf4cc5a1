#pragma once

// Multi-AP downlink scheduling MDP. Each access point serves one of its
// top-k proportional-fair (PF) ranked UEs per step; UEs move on straight lines
// and reflect off the area walls. The learned action is the joint choice of a
// top-list slot for every AP.

#include <cstdint>
#include <span>
#include <vector>

#include "cqrlab/rng.hpp"

namespace cqrlab::rrm {

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

struct ChannelParams {
  double pl_exponent = 3.5;
  double pl_ref_db = 40.0;  // path loss at 1 m
  bool rayleigh_fading = true;
  double tx_power_w = 0.2;
  double noise_w = 3.98e-13;  // -174 dBm/Hz over 10 MHz plus a 9 dB noise figure
  double bandwidth_hz = 10e6;
};

enum class RewardMode { multiplicative, additive };

struct RrmConfig {
  double area_m = 100.0;
  int num_aps = 4;
  int num_ues = 24;
  double ue_speed_mps = 1.0;
  int top_k = 3;
  int episode_len = 3000;
  double step_dt_s = 1.0;
  ChannelParams channel;
  double pf_ema = 0.05;
  double pf_eps = 1e-6;
  double w_sum = 0.5;
  double w_tail = 0.5;
  double reward_scale = 25.0;
  RewardMode reward_mode = RewardMode::multiplicative;
  double additive_beta = 1.0;
  /// Optional fixed placements; empty means uniform draws at reset.
  std::vector<Point> fixed_ap_positions;
  std::vector<Point> fixed_ue_positions;
};

void validate(const RrmConfig& cfg);

/// top_k ^ num_aps.
int action_count(const RrmConfig& cfg);
/// AP 0 is the least significant digit.
int encode_action(const RrmConfig& cfg, std::span<const int> slots);
std::vector<int> decode_action(const RrmConfig& cfg, int index);

struct RrmWorldState {
  std::vector<Point> ap_positions;
  std::vector<Point> ue_positions;
  std::vector<double> ue_headings;
  std::vector<int> association;  // UE -> AP
  std::vector<double> avg_rate;  // EWMA, bit/s/Hz
  std::vector<double> last_rate;
  std::vector<double> last_sinr;  // linear, measured on the previous step
  std::vector<std::vector<int>> top_lists;
  double pf_log_max = 0.0;  // running max of log1p(pf) this episode
  int association_repairs = 0;
  int t = 0;
};

/// Linear channel gain: fading * 10^(-(pl_ref_db + 10 n log10(max(d, 1 m))) / 10).
double channel_gain(const RrmConfig& cfg, Point tx, Point rx, double fading_draw);

/// Mean (no fading) gains, indexed [ap][ue].
std::vector<std::vector<double>> mean_gains(const RrmConfig& cfg, const RrmWorldState& state);

std::vector<double> pf_factors(const RrmConfig& cfg, std::span<const double> avg_rate);

/// Recomputes every AP's top list from avg_rate and refreshes pf_log_max.
void refresh_rankings(const RrmConfig& cfg, RrmWorldState& state);

RrmWorldState rrm_reset(const RrmConfig& cfg, std::uint64_t seed);

struct ScheduleOutcome {
  std::vector<int> served;  // per AP UE index, -1 when silent
  std::vector<double> rate;  // per UE, 0 when unserved
  std::vector<double> sinr;  // per UE, linear
};

/// SINR and rate under the given per-AP schedule. fading is [ap][ue]. Every UE
/// measures SINR against its own AP; only served UEs get a rate.
ScheduleOutcome compute_rates(const RrmConfig& cfg, const RrmWorldState& state,
                              std::span<const int> served,
                              const std::vector<std::vector<double>>& fading);

struct PfUpdate {
  std::vector<double> avg_rate;
  std::vector<double> pf;
};

PfUpdate update_pf(const RrmConfig& cfg, std::span<const double> avg_rate,
                   std::span<const double> inst_rate);

struct RrmStep {
  RrmWorldState state;
  double reward = 0.0;
  bool done = false;
  ScheduleOutcome outcome;
};

/// Learned-policy step: one top-list slot per AP, decoded from a flat index.
RrmStep rrm_step(const RrmConfig& cfg, const RrmWorldState& state, int action, Rng& rng);

/// Step with explicit per-AP slots; -1 silences an AP (used by ITLinQ).
RrmStep rrm_step_slots(const RrmConfig& cfg, const RrmWorldState& state, std::span<const int> slots,
                       Rng& rng);

/// Moves every UE by speed * dt with specular reflection at the walls.
void move_ues(const RrmConfig& cfg, RrmWorldState& state);

/// Per AP, per slot: (SINR dB clipped to [-20, 40] mapped to [0, 1],
/// log1p(pf) over the running max).
std::vector<double> rrm_observation(const RrmConfig& cfg, const RrmWorldState& state);
int observation_dim(const RrmConfig& cfg);

/// w_sum * mean(rates) + w_tail * (5th percentile, lower interpolation).
double rscore(std::span<const double> per_ue_mean_rates, double w_sum, double w_tail);

/// Lower-interpolated percentile, q in [0, 100].
double percentile_lower(std::span<const double> values, double q);

}  // namespace cqrlab::rrm
