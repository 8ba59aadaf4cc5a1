#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "cqrlab/csv.hpp"
#include "cqrlab/rng.hpp"

namespace cqrlab::cli {
namespace {

using Json = nlohmann::ordered_json;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view s) {
  s = trim(s);
  T value{};
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (s.empty() || ec != std::errc() || ptr != end) {
    throw InvalidArgument("cannot parse '" + std::string(s) + "' as a number");
  }
  return value;
}

int to_int(std::string_view s) { return parse_number<int>(s); }
double to_double(std::string_view s) { return parse_number<double>(s); }
std::uint64_t to_u64(std::string_view s) { return parse_number<std::uint64_t>(s); }

bool to_bool(std::string_view s) {
  s = trim(s);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw InvalidArgument("cannot parse '" + std::string(s) + "' as a boolean");
}

std::vector<int> to_int_list(std::string_view s) {
  std::vector<int> out;
  for (auto part : split(s, ',')) out.push_back(to_int(part));
  return out;
}

// "x y; x y" lists of cells or points.
template <typename P, typename F>
std::vector<P> to_pairs(std::string_view s, F&& parse) {
  std::vector<P> out;
  if (trim(s).empty()) return out;
  for (auto item : split(s, ';')) {
    std::istringstream in{std::string(item)};
    std::string a, b, extra;
    if (!(in >> a >> b) || (in >> extra)) throw InvalidArgument("expected 'x y' pairs separated by ';'");
    out.push_back(P{parse(a), parse(b)});
  }
  return out;
}

uav::CellRect to_rect(std::string_view s) {
  const auto v = to_int_list(s);
  if (v.size() != 4) throw InvalidArgument("risk_region needs 'x0, y0, x1, y1'");
  return {{v[0], v[1]}, {v[2], v[3]}};
}

std::string int_list_text(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

template <typename P, typename F>
std::string pairs_text(const std::vector<P>& v, F&& fmt) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "; " : "") + fmt(v[i].x) + " " + fmt(v[i].y);
  return out;
}

std::string int_text(int v) { return std::to_string(v); }

struct Field {
  std::string key;
  std::function<void(ExperimentConfig&, std::string_view)> set;
  std::function<Json(const ExperimentConfig&)> get;
};

#define CQR_NUM(KEY, MEMBER, PARSE)                                                \
  Field {                                                                          \
    KEY, [](ExperimentConfig& c, std::string_view v) { c.MEMBER = PARSE(v); },     \
        [](const ExperimentConfig& c) { return Json(c.MEMBER); }                   \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"experiment.env", [](ExperimentConfig& c, std::string_view v) { c.env = parse_env_kind(trim(v)); },
       [](const ExperimentConfig& c) { return Json(to_string(c.env)); }},
      {"experiment.mode", [](ExperimentConfig& c, std::string_view v) { c.mode = parse_mode(trim(v)); },
       [](const ExperimentConfig& c) { return Json(to_string(c.mode)); }},
      CQR_NUM("experiment.seed", master_seed, to_u64),
      CQR_NUM("experiment.train_episodes", train_episodes, to_int),
      CQR_NUM("experiment.offline_epochs", offline_epochs, to_int),
      CQR_NUM("experiment.steps_per_epoch", steps_per_epoch, to_int),
      CQR_NUM("experiment.eval_episodes", eval_episodes, to_int),
      CQR_NUM("experiment.eval_every", eval_every, to_int),
      CQR_NUM("experiment.replay_capacity", replay_capacity, to_u64),
      CQR_NUM("experiment.dataset_fraction", dataset_fraction, to_double),
      CQR_NUM("experiment.train_every", train_every, to_int),
      CQR_NUM("experiment.eval_threads", eval_threads, to_int),

      {"agent.algo", [](ExperimentConfig& c, std::string_view v) { c.agent.algo = parse_algo(trim(v)); },
       [](const ExperimentConfig& c) { return Json(to_string(c.agent.algo)); }},
      CQR_NUM("agent.gamma", agent.gamma, to_double),
      CQR_NUM("agent.num_quantiles", agent.num_quantiles, to_int),
      CQR_NUM("agent.cql_alpha", agent.cql_alpha, to_double),
      CQR_NUM("agent.kappa", agent.kappa, to_double),
      CQR_NUM("agent.epsilon_start", agent.epsilon.start, to_double),
      CQR_NUM("agent.epsilon_end", agent.epsilon.end, to_double),
      CQR_NUM("agent.epsilon_decay_episodes", agent.epsilon.decay_episodes, to_int),
      CQR_NUM("agent.target_sync_every", agent.target_sync_every, to_int),
      CQR_NUM("agent.batch_size", agent.batch_size, to_int),
      {"agent.hidden", [](ExperimentConfig& c, std::string_view v) { c.agent.hidden_sizes = to_int_list(v); },
       [](const ExperimentConfig& c) { return Json(int_list_text(c.agent.hidden_sizes)); }},
      CQR_NUM("agent.lr", agent.lr, to_double),

      CQR_NUM("env.uav.grid_cells", uav.grid_cells, to_int),
      CQR_NUM("env.uav.cell_m", uav.cell_m, to_double),
      CQR_NUM("env.uav.num_devices", uav.num_devices, to_int),
      {"env.uav.device_positions",
       [](ExperimentConfig& c, std::string_view v) { c.uav.device_positions = to_pairs<uav::Cell>(v, to_int); },
       [](const ExperimentConfig& c) { return Json(pairs_text(c.uav.device_positions, int_text)); }},
      CQR_NUM("env.uav.altitude_m", uav.altitude_m, to_double),
      CQR_NUM("env.uav.episode_len", uav.episode_len, to_int),
      CQR_NUM("env.uav.aoi_cap", uav.aoi_cap, to_int),
      CQR_NUM("env.uav.w_aoi", uav.w_aoi, to_double),
      CQR_NUM("env.uav.w_power", uav.w_power, to_double),
      CQR_NUM("env.uav.power_ref_distance_m", uav.power_ref_distance_m, to_double),
      {"env.uav.risk_region", [](ExperimentConfig& c, std::string_view v) { c.uav.risk_region = to_rect(v); },
       [](const ExperimentConfig& c) {
         const auto& r = c.uav.risk_region;
         return Json(int_list_text({r.lo.x, r.lo.y, r.hi.x, r.hi.y}));
       }},
      CQR_NUM("env.uav.risk_prob", uav.risk_prob, to_double),
      CQR_NUM("env.uav.risk_penalty", uav.risk_penalty, to_double),
      CQR_NUM("env.uav.noise_w", uav.radio.noise_w, to_double),
      CQR_NUM("env.uav.snr_threshold", uav.radio.snr_threshold, to_double),
      CQR_NUM("env.uav.carrier_hz", uav.radio.carrier_hz, to_double),
      CQR_NUM("env.uav.reward_scale", uav.reward_scale, to_double),

      CQR_NUM("env.rrm.area_m", rrm.area_m, to_double),
      CQR_NUM("env.rrm.num_aps", rrm.num_aps, to_int),
      CQR_NUM("env.rrm.num_ues", rrm.num_ues, to_int),
      CQR_NUM("env.rrm.ue_speed_mps", rrm.ue_speed_mps, to_double),
      CQR_NUM("env.rrm.top_k", rrm.top_k, to_int),
      CQR_NUM("env.rrm.episode_len", rrm.episode_len, to_int),
      CQR_NUM("env.rrm.step_dt_s", rrm.step_dt_s, to_double),
      CQR_NUM("env.rrm.pl_exponent", rrm.channel.pl_exponent, to_double),
      CQR_NUM("env.rrm.pl_ref_db", rrm.channel.pl_ref_db, to_double),
      CQR_NUM("env.rrm.rayleigh_fading", rrm.channel.rayleigh_fading, to_bool),
      CQR_NUM("env.rrm.tx_power_w", rrm.channel.tx_power_w, to_double),
      CQR_NUM("env.rrm.noise_w", rrm.channel.noise_w, to_double),
      CQR_NUM("env.rrm.bandwidth_hz", rrm.channel.bandwidth_hz, to_double),
      CQR_NUM("env.rrm.pf_ema", rrm.pf_ema, to_double),
      CQR_NUM("env.rrm.pf_eps", rrm.pf_eps, to_double),
      CQR_NUM("env.rrm.w_sum", rrm.w_sum, to_double),
      CQR_NUM("env.rrm.w_tail", rrm.w_tail, to_double),
      CQR_NUM("env.rrm.reward_scale", rrm.reward_scale, to_double),
      {"env.rrm.reward_mode",
       [](ExperimentConfig& c, std::string_view v) {
         v = trim(v);
         if (v == "multiplicative") {
           c.rrm.reward_mode = rrm::RewardMode::multiplicative;
         } else if (v == "additive") {
           c.rrm.reward_mode = rrm::RewardMode::additive;
         } else {
           throw InvalidArgument("reward_mode must be multiplicative or additive");
         }
       },
       [](const ExperimentConfig& c) {
         return Json(c.rrm.reward_mode == rrm::RewardMode::multiplicative ? "multiplicative" : "additive");
       }},
      CQR_NUM("env.rrm.additive_beta", rrm.additive_beta, to_double),
      {"env.rrm.ap_positions",
       [](ExperimentConfig& c, std::string_view v) { c.rrm.fixed_ap_positions = to_pairs<rrm::Point>(v, to_double); },
       [](const ExperimentConfig& c) { return Json(pairs_text(c.rrm.fixed_ap_positions, format_double)); }},
      {"env.rrm.ue_positions",
       [](ExperimentConfig& c, std::string_view v) { c.rrm.fixed_ue_positions = to_pairs<rrm::Point>(v, to_double); },
       [](const ExperimentConfig& c) { return Json(pairs_text(c.rrm.fixed_ue_positions, format_double)); }},
  };
  return table;
}

#undef CQR_NUM

const Field* find_field(const std::string& key) {
  for (const auto& f : fields()) {
    if (f.key == key) return &f;
  }
  return nullptr;
}

}  // namespace

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& f : fields()) k.push_back(f.key);
    return k;
  }();
  return keys;
}

ConfigFile parse_config_text(std::string_view text, const std::string& source) {
  ConfigFile file;
  file.source = source;
  file.hash = fnv1a64(text);
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    std::string_view line = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    ++line_no;
    start = end == std::string_view::npos ? text.size() + 1 : end + 1;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(source, line_no, "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError(source, line_no, "empty key");
    if (!find_field(key)) throw ConfigError(source, line_no, "unknown key '" + key + "'");
    if (auto it = file.entries.find(key); it != file.entries.end()) {
      throw ConfigError(source, line_no,
                        "duplicate key '" + key + "' (first set on line " + std::to_string(it->second.line) + ")");
    }
    file.entries.emplace(key, ConfigEntry{value, line_no});
  }
  return file;
}

ConfigFile load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string(), 0, "cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path.string());
}

ExperimentConfig resolve(const ConfigFile& file, const Overrides& overrides) {
  ExperimentConfig cfg;
  auto apply = [&](const std::string& key, const ConfigEntry& entry) {
    try {
      find_field(key)->set(cfg, entry.value);
    } catch (const Error& e) {
      throw ConfigError(file.source, entry.line, key + ": " + e.what());
    }
  };

  if (auto it = file.entries.find("agent.algo"); it != file.entries.end()) apply(it->first, it->second);
  if (overrides.algo) {
    try {
      cfg.agent.algo = parse_algo(*overrides.algo);
    } catch (const Error& e) {
      throw ConfigError("--algo", 0, e.what());
    }
  }
  cfg.agent = default_agent_config(cfg.agent.algo);

  for (const auto& [key, entry] : file.entries) {
    if (key == "agent.algo") continue;
    // One file can drive all four algorithms: the quantile count only binds
    // quantile heads and alpha only binds conservative ones.
    if (key == "agent.num_quantiles" && !is_quantile(cfg.agent.algo)) continue;
    if (key == "agent.cql_alpha" && !is_conservative(cfg.agent.algo)) continue;
    apply(key, entry);
  }

  try {
    if (overrides.seed) cfg.master_seed = *overrides.seed;
    if (overrides.mode) cfg.mode = parse_mode(*overrides.mode);
    if (overrides.fraction) cfg.dataset_fraction = *overrides.fraction;
    if (overrides.threads) cfg.eval_threads = *overrides.threads;
  } catch (const Error& e) {
    throw ConfigError("command line", 0, e.what());
  }

  try {
    validate(cfg.agent);
    if (cfg.env == EnvKind::uav) validate(with_topology(cfg, cfg.master_seed).uav);
    if (cfg.env == EnvKind::rrm) validate(cfg.rrm);
    if (!(cfg.dataset_fraction > 0.0 && cfg.dataset_fraction <= 1.0)) {
      throw InvalidArgument("dataset_fraction must be in (0, 1]");
    }
    if (cfg.train_episodes < 1 || cfg.offline_epochs < 1 || cfg.eval_episodes < 1 || cfg.eval_every < 1 ||
        cfg.train_every < 1 || cfg.eval_threads < 1 || cfg.steps_per_epoch < 0) {
      throw InvalidArgument("experiment counts must be positive");
    }
  } catch (const Error& e) {
    throw ConfigError(file.source, 0, e.what());
  }
  return cfg;
}

nlohmann::ordered_json to_json(const ExperimentConfig& cfg) {
  Json out = Json::object();
  for (const auto& f : fields()) out[f.key] = f.get(cfg);
  return out;
}

std::uint64_t config_hash(const ExperimentConfig& cfg) { return fnv1a64(to_json(cfg).dump()); }

}  // namespace cqrlab::cli
