#pragma once

// Run-level configuration: a flat `key = value` text file with dotted
// sections, resolved on top of the library defaults.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "cqrlab/error.hpp"
#include "cqrlab/harness.hpp"
#include "json.hpp"

namespace cqrlab::cli {

/// Bad config text or value. `line` is 1-based; 0 when the error is not tied
/// to a line (e.g. an unreadable file).
class ConfigError : public Error {
 public:
  ConfigError(const std::string& source, int line, const std::string& what)
      : Error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + what), line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

struct ConfigEntry {
  std::string value;
  int line = 0;
};

struct ConfigFile {
  std::string source = "<defaults>";
  std::map<std::string, ConfigEntry> entries;
  std::uint64_t hash = 0;  // FNV-1a of the file bytes; 0 without a file
};

ConfigFile parse_config_text(std::string_view text, const std::string& source = "<string>");
ConfigFile load_config_file(const std::filesystem::path& path);

/// Command-line values; set fields win over the file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> algo;
  std::optional<std::string> mode;
  std::optional<double> fraction;
  std::optional<int> threads;
};

/// Defaults, then the file, then overrides. Agent defaults follow the resolved
/// algorithm (quantile count and alpha) unless the file sets them.
ExperimentConfig resolve(const ConfigFile& file, const Overrides& overrides = {});

/// Every resolved field, keyed exactly as in the config file.
nlohmann::ordered_json to_json(const ExperimentConfig& cfg);

/// Hash of the canonical resolved configuration.
std::uint64_t config_hash(const ExperimentConfig& cfg);

/// Keys accepted in config files.
const std::vector<std::string>& known_keys();

}  // namespace cqrlab::cli
