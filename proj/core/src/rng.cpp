#include "cqrlab/rng.hpp"

namespace cqrlab {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view stream, std::uint64_t index) {
  return splitmix64(splitmix64(master ^ fnv1a64(stream)) + index);
}

std::uint64_t SeedBook::seed(std::string_view stream, std::uint64_t index) {
  {
    std::lock_guard lock(mu_);
    if (touched_.find(stream) == touched_.end()) touched_.emplace(stream);
  }
  return derive_seed(master_, stream, index);
}

std::set<std::string> SeedBook::touched() const {
  std::lock_guard lock(mu_);
  return {touched_.begin(), touched_.end()};
}

bool SeedBook::touched(std::string_view stream) const {
  std::lock_guard lock(mu_);
  return touched_.find(stream) != touched_.end();
}

void SeedBook::clear_record() {
  std::lock_guard lock(mu_);
  touched_.clear();
}

}  // namespace cqrlab
