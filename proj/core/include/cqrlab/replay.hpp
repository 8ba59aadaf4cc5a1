#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "cqrlab/rng.hpp"

namespace cqrlab {

struct Transition {
  std::vector<double> state;
  int action = 0;
  double reward = 0.0;
  std::vector<double> next_state;
  bool done = false;

  bool operator==(const Transition&) const = default;
};

/// Fixed-capacity FIFO replay memory. The state dimension is fixed by the
/// first push.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  /// Appends, evicting the oldest item when full. Throws DimensionError when
  /// the transition's dims disagree with earlier pushes.
  void push(Transition t);

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return size_ == 0; }
  /// Total pushes since construction, evictions included.
  std::uint64_t total_pushed() const { return total_pushed_; }

  /// i-th retained item in insertion order (0 = oldest).
  const Transition& at(std::size_t i) const;
  std::vector<Transition> contents() const;

  /// Uniform with replacement. Throws InvalidArgument on an empty buffer.
  std::vector<Transition> sample(std::size_t batch_size, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::vector<Transition> ring_;
  std::size_t head_ = 0;  // slot of the oldest item
  std::size_t size_ = 0;
  std::uint64_t total_pushed_ = 0;
  std::size_t state_dim_ = 0;
};

struct DatasetHeader {
  int schema_version = 1;
  std::string env_name;
  int obs_dim = 0;
  int action_count = 0;
  std::string behavioral_policy_tag;
  std::uint64_t source_seed = 0;
  std::size_t count = 0;

  bool operator==(const DatasetHeader&) const = default;
};

struct OfflineDataset {
  DatasetHeader header;
  std::vector<Transition> records;

  bool operator==(const OfflineDataset&) const = default;
};

/// The newest floor(fraction * size) transitions in insertion order, wrapped
/// in `header` (its count is overwritten). Throws InvalidArgument on an empty
/// buffer or a fraction outside (0, 1].
OfflineDataset extract_offline(const ReplayBuffer& buf, double fraction, DatasetHeader header);

/// Throws MismatchError when a record disagrees with the header dims.
void validate(const OfflineDataset& ds);

/// Throws MismatchError naming both values when the dataset was collected on
/// another environment or with other dims.
void check_dataset_matches(const DatasetHeader& header, const std::string& env_name, int obs_dim,
                           int action_count);

}  // namespace cqrlab
