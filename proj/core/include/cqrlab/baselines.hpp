#pragma once

// Non-learned schedulers for the RRM environment. Decisions are per-AP
// top-list slots; -1 means the AP stays silent (only ITLinQ does that).

#include <string>
#include <string_view>
#include <vector>

#include "cqrlab/rng.hpp"
#include "cqrlab/rrm_env.hpp"

namespace cqrlab::rrm {

enum class BaselineKind { random, greedy, round_robin, itlinq };

BaselineKind parse_baseline_kind(std::string_view name);
std::string to_string(BaselineKind kind);

struct ItlinqParams {
  double m_db = 25.0;
  double eta = 0.7;
};

class BaselineScheduler {
 public:
  BaselineScheduler(BaselineKind kind, const RrmConfig& cfg, ItlinqParams itlinq = {});

  /// Clears per-episode memory (round-robin pointers, TDM priorities).
  void reset(const RrmWorldState& state);

  /// Per-AP slot for this step. Mutates scheduler memory.
  std::vector<int> decide(const RrmWorldState& state, Rng& rng);

  BaselineKind kind() const { return kind_; }

 private:
  std::vector<int> round_robin(const RrmWorldState& state);
  std::vector<int> itlinq(const RrmWorldState& state);

  BaselineKind kind_;
  RrmConfig cfg_;
  ItlinqParams itlinq_;
  std::vector<std::vector<int>> cycle_;  // per AP, associated UEs in index order
  std::vector<int> cursor_;
  std::vector<bool> silenced_last_;
};

/// ITLinQ admission for explicit mean gains: tentative links (AP a -> UE
/// candidate[a]) are visited in `order`; a link is admitted iff its SNR is at
/// least M * (max INR from admitted APs)^eta and admitting it keeps the same
/// condition true for every already admitted link. Returns the admitted mask.
std::vector<bool> itlinq_admit(const std::vector<std::vector<double>>& gains,
                               const std::vector<int>& candidate, const std::vector<int>& order,
                               double tx_power_w, double noise_w, ItlinqParams params);

}  // namespace cqrlab::rrm
