#pragma once

// Experiment driver: online training with replay collection, offline
// epoch-based training on a static dataset, and seeded evaluation.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cqrlab/agent.hpp"
#include "cqrlab/baselines.hpp"
#include "cqrlab/environment.hpp"
#include "cqrlab/replay.hpp"

namespace cqrlab {

enum class Mode { online, offline };
Mode parse_mode(std::string_view name);
std::string to_string(Mode mode);

struct ExperimentConfig {
  EnvKind env = EnvKind::uav;
  uav::UavConfig uav;  // device_positions filled from the topology stream when empty
  rrm::RrmConfig rrm;
  AgentConfig agent;
  Mode mode = Mode::online;
  int train_episodes = 100;
  int offline_epochs = 100;
  int steps_per_epoch = 0;  // 0: dataset size / batch size
  int eval_episodes = 100;
  int eval_every = 1;  // offline: epochs; online: episodes
  std::uint64_t master_seed = 0;
  std::size_t replay_capacity = 0;  // 0: 30,000 for uav, 300,000 for rrm
  double dataset_fraction = 0.1;
  int train_every = 1;  // env steps per gradient step while training online
  int eval_threads = 1;
};

/// Replay capacity after applying the per-environment default.
std::size_t effective_replay_capacity(const ExperimentConfig& cfg);

/// Copy of `cfg` with UAV device positions drawn from `topology_seed` when the
/// config leaves them empty.
ExperimentConfig with_topology(ExperimentConfig cfg, std::uint64_t topology_seed);

/// Environment for `cfg`; UAV device positions come from `topology_seed` if unset.
std::unique_ptr<Environment> make_environment(const ExperimentConfig& cfg, std::uint64_t topology_seed);

struct EvalRow {
  int epoch = 0;
  std::optional<double> mean_return;
  std::optional<double> violation_pct;
  std::optional<double> rscore;
  std::optional<double> cvar10;

  bool operator==(const EvalRow&) const = default;
};

struct EvalReport {
  std::vector<EvalRow> rows;
};

/// Outcome of one evaluation episode.
struct EpisodeResult {
  double episode_return = 0.0;
  int steps = 0;
  int risk_steps = 0;      // uav
  double rscore = 0.0;     // rrm
};

/// Aggregates per-episode results into a report row: UAV returns are divided
/// by 1000 and violations reported in percent; RRM reports the mean per-episode
/// Rscore; cvar10 is the mean of the worst 10% episode returns (same scale as
/// mean_return).
EvalRow aggregate(EnvKind kind, int epoch, const std::vector<EpisodeResult>& episodes);

/// Runs `episode` on eval_episodes seeded episodes, spread over
/// cfg.eval_threads workers. Results are collected in episode order.
using EpisodeRunner = std::function<EpisodeResult(Environment& env, std::uint64_t episode_seed)>;
std::vector<EpisodeResult> run_episodes(const ExperimentConfig& cfg, const Environment& prototype,
                                        const EpisodeRunner& episode);

/// Seed of evaluation episode i; identical for every algorithm in an experiment.
std::uint64_t eval_episode_seed(std::uint64_t master_seed, int episode);
std::uint64_t train_episode_seed(std::uint64_t master_seed, int episode);

/// Greedy (epsilon = 0) evaluation of an agent. Adds the environment steps
/// taken to *env_steps when given.
EvalRow evaluate(const ExperimentConfig& cfg, const Environment& prototype, const QAgent& agent, int epoch,
                 std::uint64_t* env_steps = nullptr);

/// Evaluation of a fixed action sequence per episode (scripted policies).
EvalRow evaluate_policy(const ExperimentConfig& cfg, const Environment& prototype,
                        const std::function<int(const Environment&)>& policy, int epoch);

/// Evaluation of an RRM baseline scheduler. Throws InvalidArgument for UAV.
EvalRow evaluate_baseline(const ExperimentConfig& cfg, const Environment& prototype,
                          rrm::BaselineKind kind, int epoch);

struct OnlineResult {
  QAgent agent;
  ReplayBuffer buffer;
  EvalReport report;
  std::uint64_t env_steps = 0;
};

OnlineResult train_online(const ExperimentConfig& cfg);

struct OfflineResult {
  QAgent agent;
  EvalReport report;
  int steps_per_epoch = 0;
  std::uint64_t training_env_steps = 0;  // always 0
  std::uint64_t eval_env_steps = 0;
  std::set<std::string> training_streams;
};

/// Throws MismatchError when the dataset was collected on another env/dims.
OfflineResult train_offline(const ExperimentConfig& cfg, const OfflineDataset& dataset);

/// Dataset header for data collected by `cfg`'s behavioral policy.
DatasetHeader dataset_header_for(const ExperimentConfig& cfg, const Environment& env);

}  // namespace cqrlab
