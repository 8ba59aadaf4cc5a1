#include "commands.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "cqrlab/baselines.hpp"
#include "cqrlab/csv.hpp"
#include "cqrlab/harness.hpp"
#include "cqrlab/serialize.hpp"
#include "plot.hpp"

#ifndef CQRLAB_VERSION
#define CQRLAB_VERSION "0.0.0"
#endif

namespace cqrlab::cli {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Resolved {
  ExperimentConfig cfg;
  ConfigFile file;
};

Resolved resolve_options(const CommonOptions& opts) {
  Resolved r;
  if (opts.config) r.file = load_config_file(*opts.config);
  r.cfg = resolve(r.file, opts.overrides);
  if (const char* env = std::getenv("CQRLAB_THREADS")) {
    int cap = 0;
    try {
      cap = std::stoi(env);
    } catch (const std::exception&) {
      throw ConfigError("CQRLAB_THREADS", 0, "not an integer: '" + std::string(env) + "'");
    }
    if (cap < 1) throw ConfigError("CQRLAB_THREADS", 0, "must be >= 1");
    r.cfg.eval_threads = std::min(r.cfg.eval_threads, cap);
  }
  return r;
}

RunManifest manifest_for(const std::string& command, const Resolved& r, const fs::path& out_dir) {
  RunManifest m;
  m.command = command;
  m.config = to_json(r.cfg);
  m.config_file = r.file.source;
  m.config_file_hash = r.file.hash;
  m.config_hash = config_hash(r.cfg);
  m.tool_version = tool_version();
  m.timestamp = utc_timestamp();
  m.out_dir = out_dir;
  return m;
}

CheckpointMeta meta_for(const ExperimentConfig& cfg, const Environment& env) {
  CheckpointMeta meta;
  meta.algo = to_string(cfg.agent.algo);
  meta.num_quantiles = cfg.agent.num_quantiles;
  meta.config_hash = config_hash(cfg);
  meta.obs_dim = env.obs_dim();
  meta.action_count = env.action_count();
  return meta;
}

void print_row(std::ostream& log, const EvalRow& row) {
  log << "epoch " << row.epoch;
  if (row.mean_return) log << " mean_return " << format_double(*row.mean_return);
  if (row.violation_pct) log << " violation_pct " << format_double(*row.violation_pct);
  if (row.rscore) log << " rscore " << format_double(*row.rscore);
  if (row.cvar10) log << " cvar10 " << format_double(*row.cvar10);
  log << "\n";
}

void write_trace(const std::vector<RrmEnvironment::TraceRow>& rows, const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f << "ue_id,step,rate\n";
  for (const auto& r : rows) f << r.ue << "," << r.step << "," << format_double(r.rate) << "\n";
}

// First evaluation episode, replayed with the rate trace on.
template <typename StepFn>
std::vector<RrmEnvironment::TraceRow> trace_first_episode(const ExperimentConfig& cfg, const Environment& proto,
                                                          StepFn&& step) {
  auto env = proto.clone();
  auto& rrm_env = static_cast<RrmEnvironment&>(*env);
  rrm_env.enable_rate_trace(true);
  const std::uint64_t seed = eval_episode_seed(cfg.master_seed, 0);
  env->reset(seed);
  step(rrm_env, seed);
  return rrm_env.rate_trace();
}

}  // namespace

Json RunManifest::to_json() const {
  Json j;
  j["command"] = command;
  j["tool_version"] = tool_version;
  j["timestamp"] = timestamp;
  j["out_dir"] = out_dir.string();
  j["config_file"] = config_file;
  j["config_file_hash"] = hash_hex(config_file_hash);
  j["config_hash"] = hash_hex(config_hash);
  j["inputs"] = inputs;
  j["config"] = config;
  return j;
}

fs::path write_manifest(const RunManifest& manifest, const std::string& name) {
  fs::create_directories(manifest.out_dir);
  const fs::path path = manifest.out_dir / (name + ".manifest.json");
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f << manifest.to_json().dump(2) << "\n";
  return path;
}

std::string tool_version() { return CQRLAB_VERSION; }

DatasetSummary summarize(const OfflineDataset& ds) {
  DatasetSummary s;
  s.count = ds.records.size();
  s.action_histogram.assign(static_cast<std::size_t>(std::max(ds.header.action_count, 0)), 0);
  double sum = 0.0;
  for (const auto& t : ds.records) {
    sum += t.reward;
    if (t.action >= 0 && static_cast<std::size_t>(t.action) < s.action_histogram.size()) ++s.action_histogram[t.action];
  }
  s.mean_reward = s.count ? sum / static_cast<double>(s.count) : 0.0;
  return s;
}

void cmd_collect(const CommonOptions& opts, const std::optional<fs::path>& dataset_path, std::ostream& log) {
  CommonOptions o = opts;
  o.overrides.algo = "dqn";
  o.overrides.mode = "online";
  const Resolved r = resolve_options(o);
  const fs::path ds_path = dataset_path ? *dataset_path : o.out_dir / "dataset.jsonl";

  RunManifest m = manifest_for("collect", r, o.out_dir);
  m.inputs["dataset_out"] = ds_path.string();
  write_manifest(m, "collect");

  OnlineResult online = train_online(r.cfg);
  const auto env = make_environment(r.cfg, r.cfg.master_seed);
  const OfflineDataset ds = extract_offline(online.buffer, r.cfg.dataset_fraction, dataset_header_for(r.cfg, *env));
  if (ds_path.has_parent_path()) fs::create_directories(ds_path.parent_path());
  save_dataset(ds, ds_path);
  emit_csv(online.report, o.out_dir / "dqn_online.csv");
  save_checkpoint(online.agent.online(), meta_for(r.cfg, *env), o.out_dir / "dqn_online.ckpt");

  const DatasetSummary s = summarize(ds);
  log << "dataset " << ds_path.string() << "\n";
  log << "count " << s.count << " (buffer " << online.buffer.size() << ")\n";
  log << "mean_reward " << format_double(s.mean_reward) << "\n";
  log << "action_histogram";
  for (std::size_t a = 0; a < s.action_histogram.size(); ++a) {
    if (s.action_histogram[a]) log << " " << a << ":" << s.action_histogram[a];
  }
  log << "\n";
}

void cmd_train(const CommonOptions& opts, const std::optional<fs::path>& dataset_path, std::ostream& log) {
  const Resolved r = resolve_options(opts);
  const std::string stem = to_string(r.cfg.agent.algo) + "_" + to_string(r.cfg.mode);
  if (r.cfg.mode == Mode::offline && !dataset_path) throw UsageError("offline training needs --dataset");

  RunManifest m = manifest_for("train", r, opts.out_dir);
  if (dataset_path) m.inputs["dataset"] = dataset_path->string();
  write_manifest(m, stem);

  if (r.cfg.mode == Mode::online) {
    OnlineResult online = train_online(r.cfg);
    const auto env = make_environment(r.cfg, r.cfg.master_seed);
    emit_csv(online.report, opts.out_dir / (stem + ".csv"));
    save_checkpoint(online.agent.online(), meta_for(r.cfg, *env), opts.out_dir / (stem + ".ckpt"));
    print_row(log, online.report.rows.back());
    return;
  }
  const OfflineDataset ds = load_dataset(*dataset_path);
  OfflineResult offline = train_offline(r.cfg, ds);
  const auto env = make_environment(r.cfg, ds.header.source_seed);
  emit_csv(offline.report, opts.out_dir / (stem + ".csv"));
  save_checkpoint(offline.agent.online(), meta_for(r.cfg, *env), opts.out_dir / (stem + ".ckpt"));
  print_row(log, offline.report.rows.back());
}

void cmd_eval(const CommonOptions& opts, const fs::path& checkpoint, bool rate_trace, std::ostream& log) {
  const Checkpoint ckpt = load_checkpoint(checkpoint);
  CommonOptions o = opts;
  o.overrides.algo = ckpt.meta.algo;
  Resolved r = resolve_options(o);
  r.cfg.agent.num_quantiles = ckpt.meta.num_quantiles;
  r.cfg.agent.hidden_sizes.assign(ckpt.net.layer_sizes.begin() + 1, ckpt.net.layer_sizes.end() - 1);
  const std::string stem = checkpoint.stem().string() + "_eval";

  RunManifest m = manifest_for("eval", r, o.out_dir);
  m.inputs["checkpoint"] = checkpoint.string();
  write_manifest(m, stem);

  const auto env = make_environment(r.cfg, r.cfg.master_seed);
  for (const auto& w : check_checkpoint_compatible(ckpt.meta, meta_for(r.cfg, *env))) log << "warning: " << w << "\n";
  const QAgent agent(r.cfg.agent, env->obs_dim(), env->action_count(), ckpt.net);
  EvalReport report;
  report.rows.push_back(evaluate(r.cfg, *env, agent, 0));
  emit_csv(report, o.out_dir / (stem + ".csv"));
  print_row(log, report.rows.back());

  if (rate_trace) {
    if (r.cfg.env != EnvKind::rrm) throw UsageError("--rate-trace needs env rrm");
    const auto rows = trace_first_episode(r.cfg, *env, [&](RrmEnvironment& e, std::uint64_t) {
      bool done = false;
      while (!done) done = e.step(agent.greedy_action(e.observe())).done;
    });
    write_trace(rows, o.out_dir / (stem + "_rates.csv"));
  }
}

void cmd_baseline(const CommonOptions& opts, const std::string& kind_name, bool rate_trace, std::ostream& log) {
  rrm::BaselineKind kind;
  try {
    kind = rrm::parse_baseline_kind(kind_name);
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  const Resolved r = resolve_options(opts);
  if (r.cfg.env != EnvKind::rrm) throw UsageError("baseline schedulers need env rrm (experiment.env = rrm)");
  const std::string stem = rrm::to_string(kind);

  RunManifest m = manifest_for("baseline", r, opts.out_dir);
  m.inputs["kind"] = stem;
  write_manifest(m, stem);

  const auto env = make_environment(r.cfg, r.cfg.master_seed);
  EvalReport report;
  report.rows.push_back(evaluate_baseline(r.cfg, *env, kind, 0));
  emit_csv(report, opts.out_dir / (stem + ".csv"));
  print_row(log, report.rows.back());

  if (rate_trace) {
    const auto rows = trace_first_episode(r.cfg, *env, [&](RrmEnvironment& e, std::uint64_t seed) {
      rrm::BaselineScheduler scheduler(kind, e.config());
      Rng policy_rng(derive_seed(seed, "policy"));
      scheduler.reset(e.state());
      bool done = false;
      while (!done) done = e.step_slots(scheduler.decide(e.state(), policy_rng)).done;
    });
    write_trace(rows, opts.out_dir / (stem + "_rates.csv"));
  }
}

void cmd_plot(const std::vector<fs::path>& csvs, const std::string& metric, const fs::path& out_svg,
              std::ostream& log) {
  RunManifest m;
  m.command = "plot";
  m.tool_version = tool_version();
  m.timestamp = utc_timestamp();
  m.out_dir = out_svg.has_parent_path() ? out_svg.parent_path() : fs::path(".");
  m.inputs["metric"] = metric;
  m.inputs["csvs"] = Json::array();
  for (const auto& c : csvs) m.inputs["csvs"].push_back(c.string());
  write_manifest(m, out_svg.stem().string());

  plot_csvs(csvs, metric, out_svg);
  log << "wrote " << out_svg.string() << " (" << csvs.size() << " series)\n";
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Conservative and distributional RL for wireless control", "cqrlab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", tool_version());

  CommonOptions common;
  std::string config_path, algo, mode, dataset, kind, checkpoint, metric = "mean_return", out_svg;
  std::uint64_t seed = 0;
  double fraction = 0.1;
  int threads = 1;
  bool rate_trace = false;
  std::vector<std::string> csvs;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Config file (key = value)")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Master seed");
    sub->add_option("--out", common.out_dir, "Output directory");
    sub->add_option("--threads", threads, "Evaluation workers")->check(CLI::PositiveNumber);
  };

  auto* collect = app.add_subcommand("collect", "Online DQN run, then save the newest fraction of its replay");
  add_common(collect);
  collect->add_option("--fraction", fraction, "Fraction of the replay buffer kept")->check(CLI::Range(0.0, 1.0));
  collect->add_option("--dataset", dataset, "Dataset output path (default <out>/dataset.jsonl)");

  auto* train = app.add_subcommand("train", "Train one algorithm online or offline");
  add_common(train);
  train->add_option("--algo", algo, "dqn, qrdqn, cql or cqr");
  train->add_option("--mode", mode, "online or offline");
  train->add_option("--dataset", dataset, "Dataset for offline training")->check(CLI::ExistingFile);

  auto* eval = app.add_subcommand("eval", "Greedy evaluation of a checkpoint");
  add_common(eval);
  eval->add_option("--checkpoint", checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);
  eval->add_flag("--rate-trace", rate_trace, "Also dump per-UE rates of the first episode (rrm)");

  auto* baseline = app.add_subcommand("baseline", "Evaluate an RRM baseline scheduler");
  add_common(baseline);
  baseline->add_option("--kind", kind, "random, greedy, round_robin or itlinq")->required();
  baseline->add_flag("--rate-trace", rate_trace, "Also dump per-UE rates of the first episode");

  auto* plot = app.add_subcommand("plot", "SVG line chart of report CSVs");
  plot->add_option("csvs", csvs, "Report CSVs")->required()->check(CLI::ExistingFile);
  plot->add_option("--metric", metric, "mean_return, violation_pct, rscore or cvar10");
  plot->add_option("--out", out_svg, "Output SVG")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (!config_path.empty()) common.config = config_path;
  auto given = [](CLI::App* sub, const char* name) { return sub->count(name) > 0; };

  try {
    if (collect->parsed()) {
      if (given(collect, "--seed")) common.overrides.seed = seed;
      if (given(collect, "--threads")) common.overrides.threads = threads;
      if (given(collect, "--fraction")) common.overrides.fraction = fraction;
      cmd_collect(common, dataset.empty() ? std::nullopt : std::optional<fs::path>(dataset), out);
    } else if (train->parsed()) {
      if (given(train, "--seed")) common.overrides.seed = seed;
      if (given(train, "--threads")) common.overrides.threads = threads;
      if (given(train, "--algo")) common.overrides.algo = algo;
      if (given(train, "--mode")) common.overrides.mode = mode;
      cmd_train(common, dataset.empty() ? std::nullopt : std::optional<fs::path>(dataset), out);
    } else if (eval->parsed()) {
      if (given(eval, "--seed")) common.overrides.seed = seed;
      if (given(eval, "--threads")) common.overrides.threads = threads;
      cmd_eval(common, checkpoint, rate_trace, out);
    } else if (baseline->parsed()) {
      if (given(baseline, "--seed")) common.overrides.seed = seed;
      if (given(baseline, "--threads")) common.overrides.threads = threads;
      cmd_baseline(common, kind, rate_trace, out);
    } else if (plot->parsed()) {
      std::vector<fs::path> paths(csvs.begin(), csvs.end());
      cmd_plot(paths, metric, out_svg, out);
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace cqrlab::cli
