#include "cqrlab/environment.hpp"

#include "cqrlab/error.hpp"

namespace cqrlab {
namespace {
constexpr std::string_view kStepStream = "step";
}

EnvKind parse_env_kind(std::string_view name) {
  if (name == "uav") return EnvKind::uav;
  if (name == "rrm") return EnvKind::rrm;
  throw InvalidArgument("unknown env '" + std::string(name) + "' (expected uav or rrm)");
}

std::string to_string(EnvKind kind) { return kind == EnvKind::uav ? "uav" : "rrm"; }

UavEnvironment::UavEnvironment(uav::UavConfig cfg) : cfg_(std::move(cfg)) {
  uav::validate(cfg_);
  state_ = uav::uav_reset(cfg_, 0);
}

void UavEnvironment::reset(std::uint64_t episode_seed) {
  state_ = uav::uav_reset(cfg_, episode_seed);
  rng_ = Rng(derive_seed(episode_seed, kStepStream));
  risk_steps_ = 0;
}

EnvStep UavEnvironment::step(int action) {
  uav::UavStep s = uav::uav_step(cfg_, state_, action, rng_);
  ++steps_taken_;
  if (s.in_risk) ++risk_steps_;
  state_ = std::move(s.state);
  return {s.reward, s.done};
}

RrmEnvironment::RrmEnvironment(rrm::RrmConfig cfg) : cfg_(std::move(cfg)) {
  rrm::validate(cfg_);
  state_ = rrm::rrm_reset(cfg_, 0);
  rate_sum_.assign(static_cast<std::size_t>(cfg_.num_ues), 0.0);
  served_count_.assign(static_cast<std::size_t>(cfg_.num_ues), 0);
}

void RrmEnvironment::reset(std::uint64_t episode_seed) {
  state_ = rrm::rrm_reset(cfg_, episode_seed);
  rng_ = Rng(derive_seed(episode_seed, kStepStream));
  rate_sum_.assign(static_cast<std::size_t>(cfg_.num_ues), 0.0);
  served_count_.assign(static_cast<std::size_t>(cfg_.num_ues), 0);
  trace_.clear();
}

EnvStep RrmEnvironment::finish(rrm::RrmStep&& s) {
  ++steps_taken_;
  for (int u = 0; u < cfg_.num_ues; ++u) {
    rate_sum_[u] += s.outcome.rate[u];
    if (trace_on_) trace_.push_back({u, state_.t, s.outcome.rate[u]});
  }
  for (int ue : s.outcome.served) {
    if (ue >= 0) ++served_count_[ue];
  }
  state_ = std::move(s.state);
  return {s.reward, s.done};
}

EnvStep RrmEnvironment::step(int action) { return finish(rrm::rrm_step(cfg_, state_, action, rng_)); }

EnvStep RrmEnvironment::step_slots(const std::vector<int>& slots) {
  return finish(rrm::rrm_step_slots(cfg_, state_, slots, rng_));
}

std::vector<double> RrmEnvironment::episode_mean_rates() const {
  std::vector<double> out(rate_sum_.size(), 0.0);
  if (state_.t == 0) return out;
  for (std::size_t u = 0; u < out.size(); ++u) out[u] = rate_sum_[u] / state_.t;
  return out;
}

}  // namespace cqrlab
