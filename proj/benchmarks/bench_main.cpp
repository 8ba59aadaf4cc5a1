#include <benchmark/benchmark.h>

#include "cqrlab/agent.hpp"
#include "cqrlab/harness.hpp"

namespace cqrlab {
namespace {

void BM_ForwardBatch(benchmark::State& state) {
  Rng rng(1);
  const int width = static_cast<int>(state.range(0));
  const nn::Mlp net = nn::make_he_uniform_mlp({40, width, width, 50}, rng);
  const nn::Matrix inputs = nn::Matrix::Random(40, 64);
  for (auto _ : state) benchmark::DoNotOptimize(nn::forward_batch(net, inputs));
}
BENCHMARK(BM_ForwardBatch)->Arg(64)->Arg(256);

void BM_BackwardBatch(benchmark::State& state) {
  Rng rng(1);
  const int width = static_cast<int>(state.range(0));
  const nn::Mlp net = nn::make_he_uniform_mlp({40, width, width, 50}, rng);
  const nn::Matrix inputs = nn::Matrix::Random(40, 64);
  nn::BatchTrace trace;
  const nn::Matrix out = nn::forward_batch(net, inputs, &trace);
  const nn::Matrix upstream = nn::Matrix::Ones(out.rows(), out.cols());
  for (auto _ : state) benchmark::DoNotOptimize(nn::backward_batch(net, trace, upstream));
}
BENCHMARK(BM_BackwardBatch)->Arg(64)->Arg(256);

void env_steps(benchmark::State& state, EnvKind kind) {
  ExperimentConfig cfg;
  cfg.env = kind;
  const auto env = make_environment(cfg, 1);
  Rng rng(2);
  env->reset(0);
  std::uint64_t episode = 0;
  for (auto _ : state) {
    if (env->step(rng.index(env->action_count())).done) env->reset(++episode);
    benchmark::DoNotOptimize(env->observe());
  }
}

void BM_UavStep(benchmark::State& state) { env_steps(state, EnvKind::uav); }
BENCHMARK(BM_UavStep);

void BM_RrmStep(benchmark::State& state) { env_steps(state, EnvKind::rrm); }
BENCHMARK(BM_RrmStep);

void BM_TrainStep(benchmark::State& state) {
  const Algo algo = static_cast<Algo>(state.range(0));
  ExperimentConfig cfg;
  cfg.env = EnvKind::uav;
  const auto env = make_environment(cfg, 1);
  AgentConfig acfg = default_agent_config(algo);
  acfg.hidden_sizes = {64, 64};
  Rng rng(3);
  QAgent agent(acfg, env->obs_dim(), env->action_count(), rng);
  Batch batch;
  env->reset(0);
  for (int i = 0; i < acfg.batch_size; ++i) {
    Transition t;
    t.state = env->observe();
    t.action = rng.index(env->action_count());
    t.reward = env->step(t.action).reward;
    t.next_state = env->observe();
    batch.push_back(std::move(t));
  }
  for (auto _ : state) benchmark::DoNotOptimize(agent.train_step(batch));
  state.SetLabel(to_string(algo));
}
BENCHMARK(BM_TrainStep)->DenseRange(0, 3);

}  // namespace
}  // namespace cqrlab

BENCHMARK_MAIN();
