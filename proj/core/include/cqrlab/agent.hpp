#pragma once

// Q-learning agents on a shared MLP chassis.
//
//   dqn    scalar head, Huber TD loss
//   qrdqn  N quantiles per action, quantile-Huber TD loss
//   cql    dqn + conservative penalty
//   cqr    qrdqn + conservative penalty on the quantile-mean Q
//
// The network output for action a, quantile i sits at row a * N + i.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cqrlab/nn.hpp"
#include "cqrlab/replay.hpp"
#include "cqrlab/rng.hpp"

namespace cqrlab {

enum class Algo { dqn, qrdqn, cql, cqr };

/// Throws InvalidArgument listing {dqn,qrdqn,cql,cqr} for anything else.
Algo parse_algo(std::string_view name);
std::string to_string(Algo algo);
bool is_quantile(Algo algo);
bool is_conservative(Algo algo);

struct EpsilonSchedule {
  double start = 1.0;
  double end = 0.05;
  /// Linear decay length in episodes; 0 means 80% of the training episodes.
  int decay_episodes = 0;

  double at(int episode, int train_episodes) const;
};

struct AgentConfig {
  Algo algo = Algo::dqn;
  double gamma = 0.99;
  int num_quantiles = 1;
  double cql_alpha = 0.0;
  double kappa = 1.0;
  EpsilonSchedule epsilon;
  int target_sync_every = 500;
  int batch_size = 64;
  std::vector<int> hidden_sizes{128, 128};
  double lr = 1e-3;
};

/// Defaults for `algo`: 32 quantiles for the quantile algorithms, alpha 1 for
/// the conservative ones, 1 and 0 otherwise.
AgentConfig default_agent_config(Algo algo);

/// Scalar algorithms need N = 1; dqn and qrdqn need alpha = 0. cql and cqr
/// accept alpha = 0 and cqr accepts N = 1 (degenerate cases).
void validate(const AgentConfig& cfg);

using Batch = std::vector<Transition>;

struct LossAndGrad {
  double loss = 0.0;
  nn::GradBundle grads;
};

class QAgent {
 public:
  QAgent(AgentConfig cfg, int obs_dim, int action_count, Rng& init_rng);
  /// Wraps an existing online network (e.g. from a checkpoint).
  QAgent(AgentConfig cfg, int obs_dim, int action_count, nn::Mlp online);

  const AgentConfig& config() const { return cfg_; }
  int obs_dim() const { return obs_dim_; }
  int action_count() const { return action_count_; }
  int num_quantiles() const { return cfg_.num_quantiles; }
  const nn::Mlp& online() const { return online_; }
  const nn::Mlp& target() const { return target_; }
  const nn::AdamState& optimizer() const { return opt_; }
  std::int64_t train_steps() const { return steps_; }

  /// Per-action value: the raw output for scalar heads, the quantile mean otherwise.
  std::vector<double> q_values(std::span<const double> obs) const;
  std::vector<double> quantiles(std::span<const double> obs, int action) const;
  int greedy_action(std::span<const double> obs) const;
  /// Uniform action with probability epsilon, else greedy. The rng is only
  /// consumed when epsilon > 0.
  int select_action(std::span<const double> obs, double epsilon, Rng& rng) const;

  LossAndGrad td_loss_scalar(const Batch& batch) const;
  LossAndGrad td_loss_quantile(const Batch& batch) const;
  LossAndGrad cql_penalty(const Batch& batch) const;

  /// Loss terms of the configured algorithm without updating anything.
  struct Losses {
    double td = 0.0;
    double penalty = 0.0;
    double total() const { return td + penalty; }
  };
  Losses losses(const Batch& batch) const;

  /// One Adam step on the algorithm's loss; hard-syncs the target network
  /// every target_sync_every steps. Returns the pre-update loss.
  double train_step(const Batch& batch);

  void sync_target() { target_ = online_; }

 private:
  struct Terms;
  Terms compute(const Batch& batch, bool td, bool penalty) const;

  AgentConfig cfg_;
  int obs_dim_;
  int action_count_;
  std::vector<double> taus_;
  nn::Mlp online_;
  nn::Mlp target_;
  nn::AdamState opt_;
  std::int64_t steps_ = 0;
};

/// Index of the largest entry; ties go to the lowest index.
int argmax_lowest(std::span<const double> values);

/// Mean of the ceil(level * N) smallest values, level in (0, 1].
double cvar(std::span<const double> values, double level);

double logsumexp(std::span<const double> values);

}  // namespace cqrlab
