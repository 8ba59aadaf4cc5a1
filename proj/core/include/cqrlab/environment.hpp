#pragma once

// Uniform episodic interface over the UAV and RRM MDPs, used by the harness.
// Every instance counts the steps it has taken so callers can prove which
// phases touched an environment.

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "cqrlab/rng.hpp"
#include "cqrlab/rrm_env.hpp"
#include "cqrlab/uav_env.hpp"

namespace cqrlab {

enum class EnvKind { uav, rrm };

EnvKind parse_env_kind(std::string_view name);
std::string to_string(EnvKind kind);

struct EnvStep {
  double reward = 0.0;
  bool done = false;
};

class Environment {
 public:
  virtual ~Environment() = default;

  virtual EnvKind kind() const = 0;
  std::string name() const { return to_string(kind()); }
  virtual int obs_dim() const = 0;
  virtual int action_count() const = 0;

  /// Starts an episode. The same seed also keys the per-step random stream.
  virtual void reset(std::uint64_t episode_seed) = 0;
  virtual std::vector<double> observe() const = 0;
  virtual EnvStep step(int action) = 0;
  virtual std::unique_ptr<Environment> clone() const = 0;

  /// Steps taken over the lifetime of this instance.
  std::uint64_t steps_taken() const { return steps_taken_; }

 protected:
  std::uint64_t steps_taken_ = 0;
};

class UavEnvironment final : public Environment {
 public:
  explicit UavEnvironment(uav::UavConfig cfg);

  EnvKind kind() const override { return EnvKind::uav; }
  int obs_dim() const override { return uav::observation_dim(cfg_); }
  int action_count() const override { return uav::action_count(cfg_); }
  void reset(std::uint64_t episode_seed) override;
  std::vector<double> observe() const override { return uav::uav_observation(cfg_, state_); }
  EnvStep step(int action) override;
  std::unique_ptr<Environment> clone() const override { return std::make_unique<UavEnvironment>(*this); }

  const uav::UavConfig& config() const { return cfg_; }
  const uav::UavWorldState& state() const { return state_; }
  /// Steps of the current episode that ended inside the risk region.
  int risk_steps() const { return risk_steps_; }
  int episode_steps() const { return state_.t; }

 private:
  uav::UavConfig cfg_;
  uav::UavWorldState state_;
  Rng rng_{0};
  int risk_steps_ = 0;
};

class RrmEnvironment final : public Environment {
 public:
  explicit RrmEnvironment(rrm::RrmConfig cfg);

  EnvKind kind() const override { return EnvKind::rrm; }
  int obs_dim() const override { return rrm::observation_dim(cfg_); }
  int action_count() const override { return rrm::action_count(cfg_); }
  void reset(std::uint64_t episode_seed) override;
  std::vector<double> observe() const override { return rrm::rrm_observation(cfg_, state_); }
  EnvStep step(int action) override;
  /// Explicit per-AP slots, -1 = silent. Used by the baseline schedulers.
  EnvStep step_slots(const std::vector<int>& slots);
  std::unique_ptr<Environment> clone() const override { return std::make_unique<RrmEnvironment>(*this); }

  const rrm::RrmConfig& config() const { return cfg_; }
  const rrm::RrmWorldState& state() const { return state_; }
  /// Per-UE mean instantaneous rate over the current episode so far.
  std::vector<double> episode_mean_rates() const;
  /// Per-UE number of steps served this episode.
  const std::vector<int>& service_counts() const { return served_count_; }
  /// When enabled, every step appends (ue, step, rate) rows for served UEs and zeros.
  void enable_rate_trace(bool on) { trace_on_ = on; }
  struct TraceRow {
    int ue;
    int step;
    double rate;
  };
  const std::vector<TraceRow>& rate_trace() const { return trace_; }

 private:
  EnvStep finish(rrm::RrmStep&& s);

  rrm::RrmConfig cfg_;
  rrm::RrmWorldState state_;
  Rng rng_{0};
  std::vector<double> rate_sum_;
  std::vector<int> served_count_;
  bool trace_on_ = false;
  std::vector<TraceRow> trace_;
};

}  // namespace cqrlab
