#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "config.hpp"
#include "cqrlab/csv.hpp"
#include "cqrlab/serialize.hpp"
#include "plot.hpp"

namespace cqrlab::cli {
namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "cqrlab_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

constexpr const char* kTinyUav = R"(# tiny uav run
experiment.env = uav
experiment.seed = 3
experiment.train_episodes = 3
experiment.offline_epochs = 2
experiment.eval_episodes = 2
experiment.replay_capacity = 60
agent.hidden = 8
agent.batch_size = 4
env.uav.episode_len = 20
)";

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "run.cfg";
  std::ofstream(p) << text;
  return p;
}

int run(std::vector<std::string> args, std::string* out_text = nullptr, std::string* err_text = nullptr) {
  args.insert(args.begin(), "cqrlab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return code;
}

TEST(ConfigParse, CommentsAndWhitespace) {
  const ConfigFile f = parse_config_text("  # header\nexperiment.seed = 9   # trailing\n\nagent.algo=cqr\n");
  ASSERT_EQ(f.entries.size(), 2u);
  EXPECT_EQ(f.entries.at("experiment.seed").value, "9");
  EXPECT_EQ(f.entries.at("experiment.seed").line, 2);
  EXPECT_EQ(f.entries.at("agent.algo").line, 4);
}

TEST(ConfigParse, ErrorsCarryLineNumbers) {
  auto line_of = [](const std::string& text) {
    try {
      resolve(parse_config_text(text));
    } catch (const ConfigError& e) {
      return e.line();
    }
    return -1;
  };
  EXPECT_EQ(line_of("experiment.seed = 1\nexperiment.sead = 2\n"), 2);
  EXPECT_EQ(line_of("agent.gamma = 0.9\nagent.gamma = 0.8\n"), 2);
  EXPECT_EQ(line_of("\n\nno equals sign\n"), 3);
  EXPECT_EQ(line_of("agent.gamma = abc\n"), 1);
  EXPECT_EQ(line_of("agent.algo = sac\n"), 1);
}

TEST(ConfigResolve, DefaultsFollowAlgorithm) {
  const ExperimentConfig qr = resolve(parse_config_text("agent.algo = cqr\n"));
  EXPECT_EQ(qr.agent.num_quantiles, 32);
  EXPECT_DOUBLE_EQ(qr.agent.cql_alpha, 1.0);
  const ExperimentConfig d = resolve(parse_config_text("agent.algo = dqn\n"));
  EXPECT_EQ(d.agent.num_quantiles, 1);
  EXPECT_DOUBLE_EQ(d.agent.cql_alpha, 0.0);
}

TEST(ConfigResolve, OverridesWinOverFile) {
  const ConfigFile f = parse_config_text("experiment.seed = 4\nagent.algo = cql\nexperiment.mode = online\n");
  Overrides o;
  o.seed = 99;
  o.algo = "qrdqn";
  o.mode = "offline";
  o.threads = 3;
  const ExperimentConfig cfg = resolve(f, o);
  EXPECT_EQ(cfg.master_seed, 99u);
  EXPECT_EQ(cfg.agent.algo, Algo::qrdqn);
  EXPECT_EQ(cfg.agent.num_quantiles, 32);
  EXPECT_EQ(cfg.mode, Mode::offline);
  EXPECT_EQ(cfg.eval_threads, 3);
  EXPECT_EQ(resolve(f).master_seed, 4u);
}

TEST(ConfigResolve, HashTracksResolvedValues) {
  const ExperimentConfig a = resolve(parse_config_text("experiment.seed = 1\n"));
  const ExperimentConfig b = resolve(parse_config_text("# same run\nexperiment.seed=1\n"));
  const ExperimentConfig c = resolve(parse_config_text("experiment.seed = 2\n"));
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_NE(config_hash(a), config_hash(c));
  const auto j = to_json(a);
  for (const auto& key : known_keys()) EXPECT_TRUE(j.contains(key)) << key;
}

TEST(Plot, OneAndFourSeries) {
  EvalReport rep;
  for (int e = 0; e < 4; ++e) rep.rows.push_back({e, -1.0 + 0.25 * e, 10.0 - e, std::nullopt, -2.0});
  const Series s = extract_series(rep, "violation_pct", "dqn");
  EXPECT_EQ(s.x, (std::vector<double>{0, 1, 2, 3}));
  EXPECT_EQ(s.y, (std::vector<double>{10, 9, 8, 7}));
  EXPECT_THROW(extract_series(rep, "median", "x"), InvalidArgument);
  EXPECT_TRUE(extract_series(rep, "rscore", "x").x.empty());

  const std::string one = render_svg({s}, "violation_pct");
  EXPECT_EQ(one.rfind("<svg", 0), 0u);
  auto count = [](const std::string& text, const std::string& what) {
    std::size_t n = 0;
    for (auto pos = text.find(what); pos != std::string::npos; pos = text.find(what, pos + 1)) ++n;
    return n;
  };
  EXPECT_EQ(count(one, "<polyline"), 1u);
  std::vector<Series> four;
  for (const char* label : {"dqn", "qrdqn", "cql", "cqr"}) four.push_back(extract_series(rep, "mean_return", label));
  const std::string svg = render_svg(four, "mean_return");
  EXPECT_EQ(count(svg, "<polyline"), 4u);
  for (const char* label : {"qrdqn", "cqr"}) EXPECT_NE(svg.find(label), std::string::npos);
  EXPECT_EQ(render_svg(four, "mean_return"), svg);
}

TEST(Cli, HelpAndUsageErrors) {
  std::string out, err;
  EXPECT_EQ(run({"--help"}, &out), kExitOk);
  EXPECT_NE(out.find("collect"), std::string::npos);
  EXPECT_EQ(run({}, &out, &err), kExitUsage);
  EXPECT_EQ(run({"train", "--algo", "sac"}, &out, &err), kExitUsage);
  EXPECT_NE(err.find("{dqn,qrdqn,cql,cqr}"), std::string::npos);
  EXPECT_EQ(run({"frobnicate"}, &out, &err), kExitUsage);
}

TEST(Cli, OfflineWithoutDatasetIsUsageError) {
  const fs::path dir = fresh_dir("nodata");
  const fs::path cfg = write_config(dir, kTinyUav);
  std::string err;
  EXPECT_EQ(run({"train", "--config", cfg.string(), "--algo", "cql", "--mode", "offline", "--out", dir.string()},
                nullptr, &err),
            kExitUsage);
  EXPECT_NE(err.find("--dataset"), std::string::npos);
}

TEST(Cli, BaselineOnUavIsUsageError) {
  const fs::path dir = fresh_dir("baseline_uav");
  const fs::path cfg = write_config(dir, kTinyUav);
  EXPECT_EQ(run({"baseline", "--config", cfg.string(), "--kind", "greedy", "--out", dir.string()}), kExitUsage);
}

TEST(Cli, CorruptDatasetIsRuntimeError) {
  const fs::path dir = fresh_dir("corrupt");
  const fs::path cfg = write_config(dir, kTinyUav);
  const fs::path ds = dir / "bad.jsonl";
  std::ofstream(ds) << "{not json\n";
  std::string err;
  EXPECT_EQ(run({"train", "--config", cfg.string(), "--algo", "cql", "--mode", "offline", "--dataset", ds.string(),
                 "--out", dir.string()},
                nullptr, &err),
            kExitRuntime);
  EXPECT_FALSE(err.empty());
}

TEST(Cli, CollectTrainEvalPlotPipeline) {
  const fs::path dir = fresh_dir("pipeline");
  const fs::path cfg = write_config(dir, kTinyUav);
  std::string out;
  ASSERT_EQ(run({"collect", "--config", cfg.string(), "--fraction", "0.5", "--out", dir.string()}, &out), kExitOk);
  EXPECT_NE(out.find("30"), std::string::npos);
  const OfflineDataset ds = load_dataset(dir / "dataset.jsonl");
  EXPECT_EQ(ds.records.size(), 30u);
  EXPECT_TRUE(fs::exists(dir / "collect.manifest.json"));

  // Collection is exactly an online DQN run.
  const fs::path online_dir = dir / "online";
  ASSERT_EQ(run({"train", "--config", cfg.string(), "--algo", "dqn", "--mode", "online", "--out", online_dir.string()}),
            kExitOk);
  EXPECT_EQ(slurp(online_dir / "dqn_online.csv"), slurp(dir / "dqn_online.csv"));

  ASSERT_EQ(run({"train", "--config", cfg.string(), "--algo", "cqr", "--mode", "offline", "--dataset",
                 (dir / "dataset.jsonl").string(), "--out", dir.string()}),
            kExitOk);
  const EvalReport rep = read_csv(dir / "cqr_offline.csv");
  EXPECT_EQ(rep.rows.size(), 3u);

  ASSERT_EQ(run({"eval", "--config", cfg.string(), "--checkpoint", (dir / "cqr_offline.ckpt").string(), "--out",
                 dir.string()}),
            kExitOk);
  const EvalReport ev = read_csv(dir / "cqr_offline_eval.csv");
  ASSERT_EQ(ev.rows.size(), 1u);
  EXPECT_EQ(ev.rows[0].mean_return, rep.rows.back().mean_return);

  const fs::path svg = dir / "plot.svg";
  ASSERT_EQ(run({"plot", (dir / "dqn_online.csv").string(), (dir / "cqr_offline.csv").string(), "--metric",
                 "violation_pct", "--out", svg.string()}),
            kExitOk);
  const std::string text = slurp(svg);
  EXPECT_NE(text.find("cqr_offline"), std::string::npos);
  ASSERT_EQ(run({"plot", (dir / "dqn_online.csv").string(), (dir / "cqr_offline.csv").string(), "--metric",
                 "violation_pct", "--out", svg.string()}),
            kExitOk);
  EXPECT_EQ(slurp(svg), text);
  EXPECT_EQ(run({"plot", (dir / "dqn_online.csv").string(), "--metric", "rscore", "--out", svg.string()}),
            kExitRuntime);
}

TEST(Cli, ManifestWrittenWithResolvedConfig) {
  const fs::path dir = fresh_dir("manifest");
  const fs::path cfg = write_config(dir, kTinyUav);
  ASSERT_EQ(run({"train", "--config", cfg.string(), "--algo", "qrdqn", "--seed", "11", "--out", dir.string()}),
            kExitOk);
  const auto j = nlohmann::json::parse(slurp(dir / "qrdqn_online.manifest.json"));
  EXPECT_EQ(j["command"], "train");
  EXPECT_EQ(j["config"]["experiment.seed"], 11);
  EXPECT_EQ(j["config"]["agent.num_quantiles"], 32);
  EXPECT_TRUE(j.contains("timestamp"));
  EXPECT_TRUE(j.contains("config_hash"));
}

}  // namespace
}  // namespace cqrlab::cli
