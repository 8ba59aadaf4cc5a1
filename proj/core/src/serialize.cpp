#include "cqrlab/serialize.hpp"

#include <fstream>
#include <sstream>

#include "cqrlab/error.hpp"
#include "json.hpp"

namespace cqrlab {
namespace {

using nlohmann::json;

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string() + " for reading");
  return in;
}

json parse_line(const std::filesystem::path& path, const std::string& line, std::size_t record) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    throw FormatError(path.string(), record, std::string("malformed JSON (") + e.what() + ")");
  }
}

void check_schema(const std::filesystem::path& path, const json& header) {
  const int version = header.at("schema_version").get<int>();
  if (version != kSchemaMajor) {
    throw FormatError(path.string(), 0, "unsupported schema_version " + std::to_string(version));
  }
}

std::uint64_t parse_hash(const std::string& hex) {
  return std::stoull(hex, nullptr, 16);
}

std::vector<double> as_vector(const json& j) { return j.get<std::vector<double>>(); }

}  // namespace

std::string hash_hex(std::uint64_t h) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

void save_dataset(const OfflineDataset& ds, const std::filesystem::path& path) {
  validate(ds);
  std::ofstream out = open_out(path);
  json header = {{"schema_version", ds.header.schema_version},
                 {"kind", "dataset"},
                 {"env_name", ds.header.env_name},
                 {"obs_dim", ds.header.obs_dim},
                 {"action_count", ds.header.action_count},
                 {"behavioral_policy_tag", ds.header.behavioral_policy_tag},
                 {"source_seed", ds.header.source_seed},
                 {"count", ds.header.count}};
  out << header.dump() << '\n';
  for (const Transition& t : ds.records) {
    json rec = json::array({t.state, t.action, t.reward, t.next_state, t.done});
    out << rec.dump() << '\n';
  }
  if (!out) throw Error("write failed for " + path.string());
}

OfflineDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string(), 0, "missing header line");
  const json header = parse_line(path, line, 0);
  OfflineDataset ds;
  try {
    if (header.value("kind", "") != "dataset") throw FormatError(path.string(), 0, "not a dataset file");
    check_schema(path, header);
    ds.header.schema_version = header.at("schema_version").get<int>();
    ds.header.env_name = header.at("env_name").get<std::string>();
    ds.header.obs_dim = header.at("obs_dim").get<int>();
    ds.header.action_count = header.at("action_count").get<int>();
    ds.header.behavioral_policy_tag = header.at("behavioral_policy_tag").get<std::string>();
    ds.header.source_seed = header.at("source_seed").get<std::uint64_t>();
    ds.header.count = header.at("count").get<std::size_t>();
  } catch (const json::exception& e) {
    throw FormatError(path.string(), 0, std::string("bad header field (") + e.what() + ")");
  }

  ds.records.reserve(ds.header.count);
  for (std::size_t k = 1; k <= ds.header.count; ++k) {
    if (!std::getline(in, line)) throw FormatError(path.string(), k, "record missing (file truncated)");
    // A record without its trailing newline is the signature of an interrupted write.
    if (in.eof()) throw FormatError(path.string(), k, "record truncated");
    const json rec = parse_line(path, line, k);
    try {
      if (!rec.is_array() || rec.size() != 5) throw FormatError(path.string(), k, "expected 5 fields");
      Transition t;
      t.state = as_vector(rec[0]);
      t.action = rec[1].get<int>();
      t.reward = rec[2].get<double>();
      t.next_state = as_vector(rec[3]);
      t.done = rec[4].get<bool>();
      if (static_cast<int>(t.state.size()) != ds.header.obs_dim ||
          static_cast<int>(t.next_state.size()) != ds.header.obs_dim) {
        throw FormatError(path.string(), k,
                          "state dim " + std::to_string(t.state.size()) + " differs from header obs_dim " +
                              std::to_string(ds.header.obs_dim));
      }
      if (t.action < 0 || t.action >= ds.header.action_count) {
        throw FormatError(path.string(), k, "action outside the header's action range");
      }
      ds.records.push_back(std::move(t));
    } catch (const json::exception& e) {
      throw FormatError(path.string(), k, std::string("bad field (") + e.what() + ")");
    }
  }
  if (std::getline(in, line) && !line.empty()) {
    throw FormatError(path.string(), ds.header.count + 1, "more records than the header count");
  }
  return ds;
}

void save_checkpoint(const nn::Mlp& net, const CheckpointMeta& meta, const std::filesystem::path& path) {
  nn::validate(net);
  std::ofstream out = open_out(path);
  json header = {{"schema_version", kSchemaMajor},
                 {"kind", "checkpoint"},
                 {"algo", meta.algo},
                 {"num_quantiles", meta.num_quantiles},
                 {"config_hash", hash_hex(meta.config_hash)},
                 {"obs_dim", meta.obs_dim},
                 {"action_count", meta.action_count},
                 {"layer_sizes", net.layer_sizes}};
  out << header.dump() << '\n';
  for (int l = 0; l < net.num_layers(); ++l) {
    const auto& w = net.weights[l];
    std::vector<double> row_major;
    row_major.reserve(static_cast<std::size_t>(w.size()));
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) row_major.push_back(w(r, c));
    }
    std::vector<double> bias(net.biases[l].data(), net.biases[l].data() + net.biases[l].size());
    json rec = {{"layer", l}, {"rows", w.rows()}, {"cols", w.cols()}, {"weights", row_major}, {"biases", bias}};
    out << rec.dump() << '\n';
  }
  if (!out) throw Error("write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string(), 0, "missing header line");
  const json header = parse_line(path, line, 0);
  Checkpoint ck;
  try {
    if (header.value("kind", "") != "checkpoint") throw FormatError(path.string(), 0, "not a checkpoint file");
    check_schema(path, header);
    ck.meta.algo = header.at("algo").get<std::string>();
    ck.meta.num_quantiles = header.at("num_quantiles").get<int>();
    ck.meta.config_hash = parse_hash(header.at("config_hash").get<std::string>());
    ck.meta.obs_dim = header.at("obs_dim").get<int>();
    ck.meta.action_count = header.at("action_count").get<int>();
    ck.net = nn::make_zero_mlp(header.at("layer_sizes").get<std::vector<int>>());
  } catch (const json::exception& e) {
    throw FormatError(path.string(), 0, std::string("bad header field (") + e.what() + ")");
  }
  for (int l = 0; l < ck.net.num_layers(); ++l) {
    const std::size_t k = static_cast<std::size_t>(l) + 1;
    if (!std::getline(in, line)) throw FormatError(path.string(), k, "layer record missing");
    const json rec = parse_line(path, line, k);
    try {
      auto& w = ck.net.weights[l];
      auto& b = ck.net.biases[l];
      const auto values = rec.at("weights").get<std::vector<double>>();
      const auto bias = rec.at("biases").get<std::vector<double>>();
      if (rec.at("layer").get<int>() != l || rec.at("rows").get<Eigen::Index>() != w.rows() ||
          rec.at("cols").get<Eigen::Index>() != w.cols() || values.size() != static_cast<std::size_t>(w.size()) ||
          bias.size() != static_cast<std::size_t>(b.size())) {
        throw FormatError(path.string(), k, "layer shape disagrees with the header manifest");
      }
      std::size_t i = 0;
      for (Eigen::Index r = 0; r < w.rows(); ++r) {
        for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = values[i++];
      }
      for (Eigen::Index r = 0; r < b.size(); ++r) b(r) = bias[static_cast<std::size_t>(r)];
    } catch (const json::exception& e) {
      throw FormatError(path.string(), k, std::string("bad field (") + e.what() + ")");
    }
  }
  return ck;
}

std::vector<std::string> check_checkpoint_compatible(const CheckpointMeta& loaded,
                                                     const CheckpointMeta& expected) {
  if (loaded.num_quantiles != expected.num_quantiles) {
    throw MismatchError("checkpoint has " + std::to_string(loaded.num_quantiles) + " quantiles, run expects " +
                        std::to_string(expected.num_quantiles) + " (algo " + loaded.algo + " vs " +
                        expected.algo + ")");
  }
  if (loaded.obs_dim != expected.obs_dim || loaded.action_count != expected.action_count) {
    throw MismatchError("checkpoint dims (obs " + std::to_string(loaded.obs_dim) + ", actions " +
                        std::to_string(loaded.action_count) + ") differ from the run (obs " +
                        std::to_string(expected.obs_dim) + ", actions " +
                        std::to_string(expected.action_count) + ")");
  }
  std::vector<std::string> warnings;
  if (loaded.config_hash != expected.config_hash) {
    warnings.push_back("config hash mismatch: checkpoint " + hash_hex(loaded.config_hash) + ", run " +
                       hash_hex(expected.config_hash));
  }
  return warnings;
}

}  // namespace cqrlab
