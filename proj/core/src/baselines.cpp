#include "cqrlab/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "cqrlab/error.hpp"

namespace cqrlab::rrm {

BaselineKind parse_baseline_kind(std::string_view name) {
  if (name == "random") return BaselineKind::random;
  if (name == "greedy") return BaselineKind::greedy;
  if (name == "round_robin" || name == "rr") return BaselineKind::round_robin;
  if (name == "itlinq") return BaselineKind::itlinq;
  throw InvalidArgument("unknown baseline '" + std::string(name) +
                        "' (expected random, greedy, round_robin, itlinq)");
}

std::string to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::random: return "random";
    case BaselineKind::greedy: return "greedy";
    case BaselineKind::round_robin: return "round_robin";
    case BaselineKind::itlinq: return "itlinq";
  }
  return "?";
}

BaselineScheduler::BaselineScheduler(BaselineKind kind, const RrmConfig& cfg, ItlinqParams itlinq)
    : kind_(kind), cfg_(cfg), itlinq_(itlinq) {}

void BaselineScheduler::reset(const RrmWorldState& state) {
  cycle_.assign(static_cast<std::size_t>(cfg_.num_aps), {});
  for (int u = 0; u < cfg_.num_ues; ++u) cycle_[state.association[u]].push_back(u);
  cursor_.assign(static_cast<std::size_t>(cfg_.num_aps), 0);
  silenced_last_.assign(static_cast<std::size_t>(cfg_.num_aps), false);
}

std::vector<int> BaselineScheduler::decide(const RrmWorldState& state, Rng& rng) {
  if (cycle_.empty()) reset(state);
  std::vector<int> slots(static_cast<std::size_t>(cfg_.num_aps), 0);
  switch (kind_) {
    case BaselineKind::random:
      for (int a = 0; a < cfg_.num_aps; ++a) {
        slots[a] = rng.index(static_cast<int>(state.top_lists[a].size()));
      }
      return slots;
    case BaselineKind::greedy:
      return slots;
    case BaselineKind::round_robin:
      return round_robin(state);
    case BaselineKind::itlinq:
      return itlinq(state);
  }
  return slots;
}

// The cursor walks every associated UE in index order, one per step. A cycle
// UE outside the top list ranks below every listed UE, so the nearest-ranked
// listed UE is the last slot.
std::vector<int> BaselineScheduler::round_robin(const RrmWorldState& state) {
  std::vector<int> slots(static_cast<std::size_t>(cfg_.num_aps), 0);
  for (int a = 0; a < cfg_.num_aps; ++a) {
    const auto& cycle = cycle_[a];
    const auto& list = state.top_lists[a];
    const int ue = cycle[static_cast<std::size_t>(cursor_[a])];
    cursor_[a] = (cursor_[a] + 1) % static_cast<int>(cycle.size());
    const auto it = std::find(list.begin(), list.end(), ue);
    slots[a] = it != list.end() ? static_cast<int>(it - list.begin()) : static_cast<int>(list.size()) - 1;
  }
  return slots;
}

std::vector<bool> itlinq_admit(const std::vector<std::vector<double>>& gains,
                               const std::vector<int>& candidate, const std::vector<int>& order,
                               double tx_power_w, double noise_w, ItlinqParams params) {
  const std::size_t aps = candidate.size();
  const double m = std::pow(10.0, params.m_db / 10.0);
  auto snr = [&](int a) { return tx_power_w * gains[a][candidate[a]] / noise_w; };
  auto inr = [&](int from, int to) { return tx_power_w * gains[from][candidate[to]] / noise_w; };
  // Condition for link j given the set of active interferers.
  auto satisfied = [&](int j, const std::vector<bool>& active) {
    double worst = 0.0;
    for (std::size_t b = 0; b < aps; ++b) {
      if (active[b] && static_cast<int>(b) != j) worst = std::max(worst, inr(static_cast<int>(b), j));
    }
    return snr(j) >= m * std::pow(worst, params.eta);
  };

  std::vector<bool> admitted(aps, false);
  for (int a : order) {
    std::vector<bool> trial = admitted;
    trial[a] = true;
    bool ok = satisfied(a, trial);
    for (std::size_t j = 0; ok && j < aps; ++j) {
      if (admitted[j]) ok = satisfied(static_cast<int>(j), trial);
    }
    if (ok) admitted = std::move(trial);
  }
  return admitted;
}

// Each AP proposes its greedy (slot 0) UE. Links are ordered with APs silenced
// on the previous step first, then by PF factor; the TDM fallback rotates
// priority toward whoever lost out.
std::vector<int> BaselineScheduler::itlinq(const RrmWorldState& state) {
  const std::vector<double> pf = pf_factors(cfg_, state.avg_rate);
  std::vector<int> candidate(static_cast<std::size_t>(cfg_.num_aps));
  for (int a = 0; a < cfg_.num_aps; ++a) candidate[a] = state.top_lists[a][0];
  std::vector<int> order(static_cast<std::size_t>(cfg_.num_aps));
  for (int a = 0; a < cfg_.num_aps; ++a) order[a] = a;
  std::stable_sort(order.begin(), order.end(), [&](int l, int r) {
    if (silenced_last_[l] != silenced_last_[r]) return static_cast<bool>(silenced_last_[l]);
    return pf[candidate[l]] > pf[candidate[r]];
  });
  const std::vector<bool> admitted = itlinq_admit(mean_gains(cfg_, state), candidate, order,
                                                  cfg_.channel.tx_power_w, cfg_.channel.noise_w, itlinq_);
  std::vector<int> slots(static_cast<std::size_t>(cfg_.num_aps), 0);
  for (int a = 0; a < cfg_.num_aps; ++a) {
    slots[a] = admitted[a] ? 0 : -1;
    silenced_last_[a] = !admitted[a];
  }
  return slots;
}

}  // namespace cqrlab::rrm
