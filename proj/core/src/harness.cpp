#include "cqrlab/harness.hpp"

#include <algorithm>
#include <numeric>
#include <thread>

#include "cqrlab/error.hpp"

namespace cqrlab {

Mode parse_mode(std::string_view name) {
  if (name == "online") return Mode::online;
  if (name == "offline") return Mode::offline;
  throw InvalidArgument("unknown mode '" + std::string(name) + "' (expected online or offline)");
}

std::string to_string(Mode mode) { return mode == Mode::online ? "online" : "offline"; }

std::size_t effective_replay_capacity(const ExperimentConfig& cfg) {
  if (cfg.replay_capacity > 0) return cfg.replay_capacity;
  return cfg.env == EnvKind::uav ? 30'000 : 300'000;
}

ExperimentConfig with_topology(ExperimentConfig cfg, std::uint64_t topology_seed) {
  if (cfg.env == EnvKind::uav && cfg.uav.device_positions.empty()) {
    cfg.uav.device_positions = uav::place_devices(cfg.uav, derive_seed(topology_seed, streams::kTopology));
  }
  return cfg;
}

std::unique_ptr<Environment> make_environment(const ExperimentConfig& cfg, std::uint64_t topology_seed) {
  const ExperimentConfig resolved = with_topology(cfg, topology_seed);
  if (resolved.env == EnvKind::uav) return std::make_unique<UavEnvironment>(resolved.uav);
  return std::make_unique<RrmEnvironment>(resolved.rrm);
}

std::uint64_t eval_episode_seed(std::uint64_t master_seed, int episode) {
  return derive_seed(master_seed, streams::kEnvEval, static_cast<std::uint64_t>(episode));
}

std::uint64_t train_episode_seed(std::uint64_t master_seed, int episode) {
  return derive_seed(master_seed, streams::kEnvTrain, static_cast<std::uint64_t>(episode));
}

EvalRow aggregate(EnvKind kind, int epoch, const std::vector<EpisodeResult>& episodes) {
  EvalRow row;
  row.epoch = epoch;
  if (episodes.empty()) return row;
  const double n = static_cast<double>(episodes.size());
  const double scale = kind == EnvKind::uav ? 1.0 / 1000.0 : 1.0;
  std::vector<double> returns;
  returns.reserve(episodes.size());
  for (const auto& e : episodes) returns.push_back(e.episode_return * scale);
  row.mean_return = std::accumulate(returns.begin(), returns.end(), 0.0) / n;
  row.cvar10 = cvar(returns, 0.1);
  if (kind == EnvKind::uav) {
    long long risk = 0;
    long long steps = 0;
    for (const auto& e : episodes) {
      risk += e.risk_steps;
      steps += e.steps;
    }
    row.violation_pct = steps > 0 ? 100.0 * static_cast<double>(risk) / static_cast<double>(steps) : 0.0;
  } else {
    double total = 0.0;
    for (const auto& e : episodes) total += e.rscore;
    row.rscore = total / n;
  }
  return row;
}

std::vector<EpisodeResult> run_episodes(const ExperimentConfig& cfg, const Environment& prototype,
                                        const EpisodeRunner& episode) {
  const int count = std::max(0, cfg.eval_episodes);
  std::vector<EpisodeResult> results(static_cast<std::size_t>(count));
  const int workers = std::clamp(cfg.eval_threads, 1, std::max(1, count));
  auto work = [&](int worker) {
    std::unique_ptr<Environment> env = prototype.clone();
    for (int i = worker; i < count; i += workers) {
      results[static_cast<std::size_t>(i)] = episode(*env, eval_episode_seed(cfg.master_seed, i));
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }
  return results;
}

namespace {

EpisodeResult finish_episode(const Environment& env, double ret, int steps) {
  EpisodeResult r;
  r.episode_return = ret;
  r.steps = steps;
  if (const auto* u = dynamic_cast<const UavEnvironment*>(&env)) {
    r.risk_steps = u->risk_steps();
  } else if (const auto* m = dynamic_cast<const RrmEnvironment*>(&env)) {
    const auto rates = m->episode_mean_rates();
    r.rscore = rrm::rscore(rates, m->config().w_sum, m->config().w_tail);
  }
  return r;
}

template <typename Policy>
EpisodeResult play(Environment& env, std::uint64_t seed, Policy&& policy) {
  env.reset(seed);
  double ret = 0.0;
  int steps = 0;
  for (;;) {
    const EnvStep s = policy(env);
    ret += s.reward;
    ++steps;
    if (s.done) break;
  }
  return finish_episode(env, ret, steps);
}

}  // namespace

EvalRow evaluate(const ExperimentConfig& cfg, const Environment& prototype, const QAgent& agent, int epoch,
                 std::uint64_t* env_steps) {
  if (agent.obs_dim() != prototype.obs_dim() || agent.action_count() != prototype.action_count()) {
    throw DimensionError("agent/environment dims", static_cast<std::size_t>(prototype.obs_dim()),
                         static_cast<std::size_t>(agent.obs_dim()));
  }
  const auto results = run_episodes(cfg, prototype, [&](Environment& env, std::uint64_t seed) {
    return play(env, seed, [&](Environment& e) { return e.step(agent.greedy_action(e.observe())); });
  });
  if (env_steps != nullptr) {
    for (const auto& r : results) *env_steps += static_cast<std::uint64_t>(r.steps);
  }
  return aggregate(prototype.kind(), epoch, results);
}

EvalRow evaluate_policy(const ExperimentConfig& cfg, const Environment& prototype,
                        const std::function<int(const Environment&)>& policy, int epoch) {
  const auto results = run_episodes(cfg, prototype, [&](Environment& env, std::uint64_t seed) {
    return play(env, seed, [&](Environment& e) { return e.step(policy(e)); });
  });
  return aggregate(prototype.kind(), epoch, results);
}

EvalRow evaluate_baseline(const ExperimentConfig& cfg, const Environment& prototype,
                          rrm::BaselineKind kind, int epoch) {
  const auto* rrm_proto = dynamic_cast<const RrmEnvironment*>(&prototype);
  if (rrm_proto == nullptr) throw InvalidArgument("baseline schedulers exist only for the rrm environment");
  const auto results = run_episodes(cfg, prototype, [&](Environment& env, std::uint64_t seed) {
    auto& rrm_env = static_cast<RrmEnvironment&>(env);
    rrm::BaselineScheduler scheduler(kind, rrm_env.config());
    Rng policy_rng(derive_seed(seed, "policy"));
    bool fresh = true;
    return play(env, seed, [&](Environment&) {
      if (fresh) {
        scheduler.reset(rrm_env.state());
        fresh = false;
      }
      return rrm_env.step_slots(scheduler.decide(rrm_env.state(), policy_rng));
    });
  });
  return aggregate(prototype.kind(), epoch, results);
}

DatasetHeader dataset_header_for(const ExperimentConfig& cfg, const Environment& env) {
  DatasetHeader h;
  h.env_name = env.name();
  h.obs_dim = env.obs_dim();
  h.action_count = env.action_count();
  h.behavioral_policy_tag = "online-" + to_string(cfg.agent.algo);
  h.source_seed = cfg.master_seed;
  return h;
}

OnlineResult train_online(const ExperimentConfig& cfg) {
  validate(cfg.agent);
  if (cfg.train_every < 1) throw InvalidArgument("train_every must be >= 1");
  SeedBook seeds(cfg.master_seed);
  std::unique_ptr<Environment> env = make_environment(cfg, cfg.master_seed);
  std::unique_ptr<Environment> eval_proto = env->clone();
  Rng init_rng = seeds.rng(streams::kInit);
  Rng explore_rng = seeds.rng(streams::kExplore);
  Rng batch_rng = seeds.rng(streams::kBatch);

  OnlineResult out{QAgent(cfg.agent, env->obs_dim(), env->action_count(), init_rng),
                   ReplayBuffer(effective_replay_capacity(cfg)), {}, 0};
  const auto batch_size = static_cast<std::size_t>(cfg.agent.batch_size);
  const int every = std::max(1, cfg.eval_every);

  out.report.rows.push_back(evaluate(cfg, *eval_proto, out.agent, 0));
  for (int ep = 0; ep < cfg.train_episodes; ++ep) {
    env->reset(train_episode_seed(cfg.master_seed, ep));
    const double eps = cfg.agent.epsilon.at(ep, cfg.train_episodes);
    std::vector<double> obs = env->observe();
    for (;;) {
      const int action = out.agent.select_action(obs, eps, explore_rng);
      const EnvStep s = env->step(action);
      std::vector<double> next = env->observe();
      out.buffer.push({obs, action, s.reward, next, s.done});
      ++out.env_steps;
      if (out.buffer.size() >= batch_size && out.env_steps % static_cast<std::uint64_t>(cfg.train_every) == 0) {
        out.agent.train_step(out.buffer.sample(batch_size, batch_rng));
      }
      obs = std::move(next);
      if (s.done) break;
    }
    const int done_episodes = ep + 1;
    if (done_episodes % every == 0 || done_episodes == cfg.train_episodes) {
      out.report.rows.push_back(evaluate(cfg, *eval_proto, out.agent, done_episodes));
    }
  }
  return out;
}

OfflineResult train_offline(const ExperimentConfig& cfg, const OfflineDataset& dataset) {
  validate(cfg.agent);
  validate(dataset);
  if (dataset.records.empty()) throw InvalidArgument("offline training needs a non-empty dataset");
  // Topology comes from the seed the data was collected under.
  std::unique_ptr<Environment> eval_proto = make_environment(cfg, dataset.header.source_seed);
  check_dataset_matches(dataset.header, eval_proto->name(), eval_proto->obs_dim(), eval_proto->action_count());

  SeedBook training_seeds(cfg.master_seed);
  Rng init_rng = training_seeds.rng(streams::kInit);
  Rng batch_rng = training_seeds.rng(streams::kBatch);
  OfflineResult out{QAgent(cfg.agent, eval_proto->obs_dim(), eval_proto->action_count(), init_rng), {}, 0, 0, 0, {}};
  out.steps_per_epoch = cfg.steps_per_epoch > 0
                            ? cfg.steps_per_epoch
                            : std::max<int>(1, static_cast<int>(dataset.records.size()) / cfg.agent.batch_size);
  const int every = std::max(1, cfg.eval_every);
  const int n = static_cast<int>(dataset.records.size());

  const std::uint64_t before = eval_proto->steps_taken();
  out.report.rows.push_back(evaluate(cfg, *eval_proto, out.agent, 0, &out.eval_env_steps));
  Batch batch(static_cast<std::size_t>(cfg.agent.batch_size));
  for (int epoch = 1; epoch <= cfg.offline_epochs; ++epoch) {
    for (int step = 0; step < out.steps_per_epoch; ++step) {
      for (auto& t : batch) t = dataset.records[static_cast<std::size_t>(batch_rng.index(n))];
      out.agent.train_step(batch);
    }
    if (epoch % every == 0 || epoch == cfg.offline_epochs) {
      out.report.rows.push_back(evaluate(cfg, *eval_proto, out.agent, epoch, &out.eval_env_steps));
    }
  }
  // Evaluation runs on clones, so the prototype's counter only moves if
  // training stepped it.
  out.training_env_steps = eval_proto->steps_taken() - before;
  out.training_streams = training_seeds.touched();
  return out;
}

}  // namespace cqrlab
