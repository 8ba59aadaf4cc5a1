#include "cqrlab/rrm_env.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "cqrlab/error.hpp"

namespace cqrlab::rrm {
namespace {

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

double sinr_to_unit(double sinr) {
  const double db = 10.0 * std::log10(std::max(sinr, 1e-30));
  return (std::clamp(db, -20.0, 40.0) + 20.0) / 60.0;
}

double reflect(double v, double hi, bool& flipped) {
  flipped = false;
  while (v < 0.0 || v > hi) {
    if (v < 0.0) v = -v;
    if (v > hi) v = 2.0 * hi - v;
    flipped = !flipped;
  }
  return v;
}

// Strongest mean gain == nearest AP; ties go to the lower AP index.
std::vector<int> associate(const RrmConfig& cfg, const RrmWorldState& s) {
  std::vector<int> assoc(static_cast<std::size_t>(cfg.num_ues), 0);
  for (int u = 0; u < cfg.num_ues; ++u) {
    double best = -1.0;
    for (int a = 0; a < cfg.num_aps; ++a) {
      const double g = channel_gain(cfg, s.ap_positions[a], s.ue_positions[u], 1.0);
      if (g > best) {
        best = g;
        assoc[u] = a;
      }
    }
  }
  return assoc;
}

int repair_association(const RrmConfig& cfg, RrmWorldState& s) {
  int moves = 0;
  for (;;) {
    std::vector<int> load(static_cast<std::size_t>(cfg.num_aps), 0);
    for (int a : s.association) ++load[a];
    int deficient = -1;
    for (int a = 0; a < cfg.num_aps && deficient < 0; ++a) {
      if (load[a] < cfg.top_k) deficient = a;
    }
    if (deficient < 0) return moves;
    const int donor = static_cast<int>(std::max_element(load.begin(), load.end()) - load.begin());
    int pick = -1;
    double pick_d = 0.0;
    for (int u = 0; u < cfg.num_ues; ++u) {
      if (s.association[u] != donor) continue;
      const double d = distance(s.ue_positions[u], s.ap_positions[deficient]);
      if (pick < 0 || d < pick_d) {
        pick = u;
        pick_d = d;
      }
    }
    s.association[pick] = deficient;
    ++moves;
  }
}

std::vector<double> measured_sinr_no_fading(const RrmConfig& cfg, const RrmWorldState& s) {
  // Every AP transmits; which of its UEs it serves does not change the SINR.
  std::vector<int> served(static_cast<std::size_t>(cfg.num_aps), -1);
  for (int u = cfg.num_ues - 1; u >= 0; --u) served[s.association[u]] = u;
  std::vector<std::vector<double>> ones(static_cast<std::size_t>(cfg.num_aps),
                                        std::vector<double>(static_cast<std::size_t>(cfg.num_ues), 1.0));
  return compute_rates(cfg, s, served, ones).sinr;
}

}  // namespace

void validate(const RrmConfig& cfg) {
  if (!(cfg.area_m > 0)) throw InvalidArgument("rrm: area_m must be positive");
  if (cfg.num_aps < 1) throw InvalidArgument("rrm: num_aps must be >= 1");
  if (cfg.top_k < 1) throw InvalidArgument("rrm: top_k must be >= 1");
  if (cfg.num_ues < cfg.num_aps * cfg.top_k) {
    throw InvalidArgument("rrm: need at least num_aps * top_k UEs");
  }
  if (cfg.ue_speed_mps < 0 || !(cfg.step_dt_s > 0)) throw InvalidArgument("rrm: bad mobility parameters");
  if (cfg.episode_len < 1) throw InvalidArgument("rrm: episode_len must be >= 1");
  if (!(cfg.pf_ema > 0 && cfg.pf_ema <= 1)) throw InvalidArgument("rrm: pf_ema must be in (0, 1]");
  if (!(cfg.pf_eps > 0)) throw InvalidArgument("rrm: pf_eps must be positive");
  if (cfg.w_sum < 0 || cfg.w_tail < 0 || std::abs(cfg.w_sum + cfg.w_tail - 1.0) > 1e-9) {
    throw InvalidArgument("rrm: rscore weights must be non-negative and sum to 1");
  }
  if (!(cfg.reward_scale > 0)) throw InvalidArgument("rrm: reward_scale must be positive");
  if (cfg.channel.tx_power_w < 0 || !(cfg.channel.noise_w > 0)) {
    throw InvalidArgument("rrm: tx_power_w must be >= 0 and noise_w > 0");
  }
  if (!cfg.fixed_ap_positions.empty() && static_cast<int>(cfg.fixed_ap_positions.size()) != cfg.num_aps) {
    throw InvalidArgument("rrm: fixed_ap_positions size differs from num_aps");
  }
  if (!cfg.fixed_ue_positions.empty() && static_cast<int>(cfg.fixed_ue_positions.size()) != cfg.num_ues) {
    throw InvalidArgument("rrm: fixed_ue_positions size differs from num_ues");
  }
  double count = 1.0;
  for (int a = 0; a < cfg.num_aps; ++a) count *= cfg.top_k;
  if (count > 1e7) throw InvalidArgument("rrm: joint action space too large");
}

int action_count(const RrmConfig& cfg) {
  int n = 1;
  for (int a = 0; a < cfg.num_aps; ++a) n *= cfg.top_k;
  return n;
}

int encode_action(const RrmConfig& cfg, std::span<const int> slots) {
  if (static_cast<int>(slots.size()) != cfg.num_aps) {
    throw DimensionError("rrm action slots", static_cast<std::size_t>(cfg.num_aps), slots.size());
  }
  int index = 0;
  for (int a = cfg.num_aps - 1; a >= 0; --a) {
    if (slots[a] < 0 || slots[a] >= cfg.top_k) throw InvalidArgument("rrm: slot outside [0, top_k)");
    index = index * cfg.top_k + slots[a];
  }
  return index;
}

std::vector<int> decode_action(const RrmConfig& cfg, int index) {
  if (index < 0 || index >= action_count(cfg)) {
    throw InvalidArgument("rrm: action index " + std::to_string(index) + " outside [0, " +
                          std::to_string(action_count(cfg)) + ")");
  }
  std::vector<int> slots(static_cast<std::size_t>(cfg.num_aps));
  for (int a = 0; a < cfg.num_aps; ++a) {
    slots[a] = index % cfg.top_k;
    index /= cfg.top_k;
  }
  return slots;
}

double channel_gain(const RrmConfig& cfg, Point tx, Point rx, double fading_draw) {
  const double d = std::max(distance(tx, rx), 1.0);
  const double loss_db = cfg.channel.pl_ref_db + 10.0 * cfg.channel.pl_exponent * std::log10(d);
  return fading_draw * std::pow(10.0, -loss_db / 10.0);
}

std::vector<std::vector<double>> mean_gains(const RrmConfig& cfg, const RrmWorldState& state) {
  std::vector<std::vector<double>> g(static_cast<std::size_t>(cfg.num_aps),
                                     std::vector<double>(static_cast<std::size_t>(cfg.num_ues)));
  for (int a = 0; a < cfg.num_aps; ++a) {
    for (int u = 0; u < cfg.num_ues; ++u) {
      g[a][u] = channel_gain(cfg, state.ap_positions[a], state.ue_positions[u], 1.0);
    }
  }
  return g;
}

std::vector<double> pf_factors(const RrmConfig& cfg, std::span<const double> avg_rate) {
  std::vector<double> pf(avg_rate.size());
  for (std::size_t i = 0; i < avg_rate.size(); ++i) pf[i] = 1.0 / (avg_rate[i] + cfg.pf_eps);
  return pf;
}

void refresh_rankings(const RrmConfig& cfg, RrmWorldState& s) {
  const std::vector<double> pf = pf_factors(cfg, s.avg_rate);
  s.top_lists.assign(static_cast<std::size_t>(cfg.num_aps), {});
  for (int a = 0; a < cfg.num_aps; ++a) {
    std::vector<int> members;
    for (int u = 0; u < cfg.num_ues; ++u) {
      if (s.association[u] == a) members.push_back(u);
    }
    std::stable_sort(members.begin(), members.end(), [&](int l, int r) { return pf[l] > pf[r]; });
    members.resize(std::min<std::size_t>(members.size(), static_cast<std::size_t>(cfg.top_k)));
    s.top_lists[a] = std::move(members);
  }
  for (double p : pf) s.pf_log_max = std::max(s.pf_log_max, std::log1p(p));
}

RrmWorldState rrm_reset(const RrmConfig& cfg, std::uint64_t seed) {
  validate(cfg);
  Rng rng(seed);
  RrmWorldState s;
  if (cfg.fixed_ap_positions.empty()) {
    for (int a = 0; a < cfg.num_aps; ++a) {
      const double x = rng.uniform(0.0, cfg.area_m);
      s.ap_positions.push_back({x, rng.uniform(0.0, cfg.area_m)});
    }
  } else {
    s.ap_positions = cfg.fixed_ap_positions;
  }
  if (cfg.fixed_ue_positions.empty()) {
    for (int u = 0; u < cfg.num_ues; ++u) {
      const double x = rng.uniform(0.0, cfg.area_m);
      s.ue_positions.push_back({x, rng.uniform(0.0, cfg.area_m)});
    }
  } else {
    s.ue_positions = cfg.fixed_ue_positions;
  }
  for (int u = 0; u < cfg.num_ues; ++u) {
    s.ue_headings.push_back(rng.uniform(0.0, 2.0 * std::numbers::pi));
  }
  s.association = associate(cfg, s);
  s.association_repairs = repair_association(cfg, s);
  s.avg_rate.assign(static_cast<std::size_t>(cfg.num_ues), cfg.pf_eps);
  s.last_rate.assign(static_cast<std::size_t>(cfg.num_ues), 0.0);
  s.last_sinr = measured_sinr_no_fading(cfg, s);
  s.t = 0;
  refresh_rankings(cfg, s);
  return s;
}

ScheduleOutcome compute_rates(const RrmConfig& cfg, const RrmWorldState& state,
                              std::span<const int> served,
                              const std::vector<std::vector<double>>& fading) {
  if (static_cast<int>(served.size()) != cfg.num_aps) {
    throw DimensionError("served set", static_cast<std::size_t>(cfg.num_aps), served.size());
  }
  const double p = cfg.channel.tx_power_w;
  ScheduleOutcome out;
  out.served.assign(served.begin(), served.end());
  out.rate.assign(static_cast<std::size_t>(cfg.num_ues), 0.0);
  out.sinr.assign(static_cast<std::size_t>(cfg.num_ues), 0.0);
  for (int u = 0; u < cfg.num_ues; ++u) {
    const int own = state.association[u];
    double signal = 0.0;
    double interference = 0.0;
    for (int a = 0; a < cfg.num_aps; ++a) {
      if (served[a] < 0) continue;
      const double rx = p * channel_gain(cfg, state.ap_positions[a], state.ue_positions[u], fading[a][u]);
      if (a == own) {
        signal = rx;
      } else {
        interference += rx;
      }
    }
    out.sinr[u] = signal / (interference + cfg.channel.noise_w);
  }
  for (int a = 0; a < cfg.num_aps; ++a) {
    const int u = served[a];
    if (u < 0) continue;
    if (state.association[u] != a) {
      throw InvalidArgument("rrm: UE " + std::to_string(u) + " is not associated with AP " + std::to_string(a));
    }
    out.rate[u] = std::log2(1.0 + out.sinr[u]);
  }
  return out;
}

PfUpdate update_pf(const RrmConfig& cfg, std::span<const double> avg_rate,
                   std::span<const double> inst_rate) {
  if (avg_rate.size() != inst_rate.size()) {
    throw DimensionError("pf update", avg_rate.size(), inst_rate.size());
  }
  PfUpdate out;
  out.avg_rate.resize(avg_rate.size());
  for (std::size_t i = 0; i < avg_rate.size(); ++i) {
    out.avg_rate[i] = (1.0 - cfg.pf_ema) * avg_rate[i] + cfg.pf_ema * inst_rate[i];
  }
  out.pf = pf_factors(cfg, out.avg_rate);
  return out;
}

void move_ues(const RrmConfig& cfg, RrmWorldState& s) {
  const double step = cfg.ue_speed_mps * cfg.step_dt_s;
  if (step == 0.0) return;
  for (int u = 0; u < cfg.num_ues; ++u) {
    double h = s.ue_headings[u];
    Point& p = s.ue_positions[u];
    bool flip_x = false;
    bool flip_y = false;
    p.x = reflect(p.x + step * std::cos(h), cfg.area_m, flip_x);
    p.y = reflect(p.y + step * std::sin(h), cfg.area_m, flip_y);
    if (flip_x) h = std::numbers::pi - h;
    if (flip_y) h = -h;
    h = std::fmod(h, 2.0 * std::numbers::pi);
    if (h < 0) h += 2.0 * std::numbers::pi;
    s.ue_headings[u] = h;
  }
}

RrmStep rrm_step_slots(const RrmConfig& cfg, const RrmWorldState& state, std::span<const int> slots,
                       Rng& rng) {
  if (static_cast<int>(slots.size()) != cfg.num_aps) {
    throw DimensionError("rrm action slots", static_cast<std::size_t>(cfg.num_aps), slots.size());
  }
  std::vector<int> served(static_cast<std::size_t>(cfg.num_aps), -1);
  for (int a = 0; a < cfg.num_aps; ++a) {
    if (slots[a] < 0) continue;
    if (slots[a] >= static_cast<int>(state.top_lists[a].size())) {
      throw InvalidArgument("rrm: slot outside AP " + std::to_string(a) + "'s top list");
    }
    served[a] = state.top_lists[a][slots[a]];
  }

  std::vector<std::vector<double>> fading(static_cast<std::size_t>(cfg.num_aps),
                                          std::vector<double>(static_cast<std::size_t>(cfg.num_ues), 1.0));
  if (cfg.channel.rayleigh_fading) {
    for (auto& row : fading) {
      for (double& f : row) f = rng.exponential();
    }
  }

  RrmStep out;
  out.outcome = compute_rates(cfg, state, served, fading);
  const std::vector<double> pf = pf_factors(cfg, state.avg_rate);
  double reward = 0.0;
  for (int u = 0; u < cfg.num_ues; ++u) {
    if (cfg.reward_mode == RewardMode::multiplicative) {
      reward += pf[u] * out.outcome.rate[u];
    } else {
      reward += cfg.additive_beta * pf[u] + out.outcome.rate[u];
    }
  }
  out.reward = reward / cfg.reward_scale;

  RrmWorldState& next = out.state;
  next = state;
  PfUpdate upd = update_pf(cfg, state.avg_rate, out.outcome.rate);
  next.avg_rate = std::move(upd.avg_rate);
  next.last_rate = out.outcome.rate;
  next.last_sinr = out.outcome.sinr;
  move_ues(cfg, next);
  refresh_rankings(cfg, next);
  next.t = state.t + 1;
  out.done = next.t >= cfg.episode_len;
  return out;
}

RrmStep rrm_step(const RrmConfig& cfg, const RrmWorldState& state, int action, Rng& rng) {
  const std::vector<int> slots = decode_action(cfg, action);
  return rrm_step_slots(cfg, state, slots, rng);
}

int observation_dim(const RrmConfig& cfg) { return cfg.num_aps * cfg.top_k * 2; }

std::vector<double> rrm_observation(const RrmConfig& cfg, const RrmWorldState& state) {
  const std::vector<double> pf = pf_factors(cfg, state.avg_rate);
  const double denom = state.pf_log_max > 0.0 ? state.pf_log_max : 1.0;
  std::vector<double> obs;
  obs.reserve(static_cast<std::size_t>(observation_dim(cfg)));
  for (int a = 0; a < cfg.num_aps; ++a) {
    for (int k = 0; k < cfg.top_k; ++k) {
      if (k >= static_cast<int>(state.top_lists[a].size())) {
        obs.push_back(0.0);
        obs.push_back(0.0);
        continue;
      }
      const int u = state.top_lists[a][k];
      obs.push_back(sinr_to_unit(state.last_sinr[u]));
      obs.push_back(std::clamp(std::log1p(pf[u]) / denom, 0.0, 1.0));
    }
  }
  return obs;
}

double percentile_lower(std::span<const double> values, double q) {
  if (values.empty()) throw InvalidArgument("percentile of an empty vector");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double pos = q / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto idx = static_cast<std::size_t>(std::floor(pos + 1e-12));
  return sorted[std::min(idx, sorted.size() - 1)];
}

double rscore(std::span<const double> per_ue_mean_rates, double w_sum, double w_tail) {
  if (per_ue_mean_rates.empty()) throw InvalidArgument("rscore of an empty rate vector");
  const double mean = std::accumulate(per_ue_mean_rates.begin(), per_ue_mean_rates.end(), 0.0) /
                      static_cast<double>(per_ue_mean_rates.size());
  return w_sum * mean + w_tail * percentile_lower(per_ue_mean_rates, 5.0);
}

}  // namespace cqrlab::rrm
