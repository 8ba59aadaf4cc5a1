#pragma once

#include <cstdint>
#include <mutex>
#include <random>
#include <set>
#include <string>
#include <string_view>

namespace cqrlab {

/// Seeded pseudo-random source. Thin wrapper over mt19937_64 so that every
/// draw in the library goes through a named, reproducible stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform() { return std::generate_canonical<double, 53>(engine_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n).
  int index(int n) { return std::uniform_int_distribution<int>(0, n - 1)(engine_); }
  bool bernoulli(double p) { return uniform() < p; }
  /// Unit-mean exponential.
  double exponential() { return std::exponential_distribution<double>(1.0)(engine_); }
  std::uint64_t next_u64() { return engine_(); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

/// Derives a child seed from (master, stream name, index) with FNV-1a over the
/// name followed by two splitmix64 rounds.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stream, std::uint64_t index = 0);

/// Stream names used by the experiment harness.
namespace streams {
inline constexpr std::string_view kEnvTrain = "env-train";
inline constexpr std::string_view kEnvEval = "env-eval";
inline constexpr std::string_view kInit = "init";
inline constexpr std::string_view kExplore = "explore";
inline constexpr std::string_view kBatch = "batch";
inline constexpr std::string_view kTopology = "topology";
}  // namespace streams

/// Hands out seeds derived from a master seed and records which named streams
/// were requested. The record is what lets tests check that offline training
/// never touches an environment stream.
class SeedBook {
 public:
  explicit SeedBook(std::uint64_t master) : master_(master) {}

  std::uint64_t master() const noexcept { return master_; }
  std::uint64_t seed(std::string_view stream, std::uint64_t index = 0);
  Rng rng(std::string_view stream, std::uint64_t index = 0) { return Rng(seed(stream, index)); }

  std::set<std::string> touched() const;
  bool touched(std::string_view stream) const;
  void clear_record();

 private:
  std::uint64_t master_;
  mutable std::mutex mu_;
  std::set<std::string, std::less<>> touched_;
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace cqrlab
