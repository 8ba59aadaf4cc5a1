#pragma once

// The collect / train / eval / baseline / plot pipeline behind the cqrlab
// executable. Exit codes: 0 success, 2 usage or config error, 1 runtime error.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "cqrlab/replay.hpp"

namespace cqrlab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Invalid command-line usage (missing flag, wrong environment for a command).
class UsageError : public Error {
 public:
  using Error::Error;
};

struct RunManifest {
  std::string command;
  nlohmann::ordered_json config;  // resolved; null for plot
  std::string config_file;
  std::uint64_t config_file_hash = 0;
  std::uint64_t config_hash = 0;
  std::string tool_version;
  std::string timestamp;  // UTC, ISO 8601
  std::filesystem::path out_dir;
  nlohmann::ordered_json inputs = nlohmann::ordered_json::object();

  nlohmann::ordered_json to_json() const;
};

/// Writes `<out_dir>/<name>.manifest.json`, creating the directory.
std::filesystem::path write_manifest(const RunManifest& manifest, const std::string& name);

std::string tool_version();

struct CommonOptions {
  std::optional<std::filesystem::path> config;
  Overrides overrides;
  std::filesystem::path out_dir = ".";
};

struct DatasetSummary {
  std::size_t count = 0;
  double mean_reward = 0.0;
  std::vector<std::size_t> action_histogram;
};
DatasetSummary summarize(const OfflineDataset& ds);

/// Online DQN, then extract_offline and save. Writes `dataset.jsonl` (or
/// `dataset_path`), `dqn_online.csv`, `dqn_online.ckpt`.
void cmd_collect(const CommonOptions& opts, const std::optional<std::filesystem::path>& dataset_path,
                 std::ostream& log);

/// Writes `<algo>_<mode>.csv` and `<algo>_<mode>.ckpt`.
void cmd_train(const CommonOptions& opts, const std::optional<std::filesystem::path>& dataset_path,
               std::ostream& log);

/// Greedy evaluation of a checkpoint. Writes `<checkpoint stem>_eval.csv`.
void cmd_eval(const CommonOptions& opts, const std::filesystem::path& checkpoint, bool rate_trace,
              std::ostream& log);

/// One-row `<kind>.csv` for an RRM baseline scheduler.
void cmd_baseline(const CommonOptions& opts, const std::string& kind, bool rate_trace, std::ostream& log);

void cmd_plot(const std::vector<std::filesystem::path>& csvs, const std::string& metric,
              const std::filesystem::path& out_svg, std::ostream& log);

/// Parses argv and dispatches; returns the exit code. Errors go to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cqrlab::cli
