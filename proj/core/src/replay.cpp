#include "cqrlab/replay.hpp"

#include <cmath>

#include "cqrlab/error.hpp"

namespace cqrlab {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw InvalidArgument("replay capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
  if (t.state.size() != t.next_state.size()) {
    throw DimensionError("transition next_state", t.state.size(), t.next_state.size());
  }
  if (total_pushed_ == 0) {
    state_dim_ = t.state.size();
  } else if (t.state.size() != state_dim_) {
    throw DimensionError("transition state", state_dim_, t.state.size());
  }
  if (size_ < capacity_) {
    ring_.push_back(std::move(t));
    ++size_;
  } else {
    ring_[head_] = std::move(t);
    head_ = (head_ + 1) % capacity_;
  }
  ++total_pushed_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= size_) throw InvalidArgument("replay index out of range");
  return ring_[(head_ + i) % capacity_];
}

std::vector<Transition> ReplayBuffer::contents() const {
  std::vector<Transition> out;
  out.reserve(size_);
  for (std::size_t i = 0; i < size_; ++i) out.push_back(at(i));
  return out;
}

std::vector<Transition> ReplayBuffer::sample(std::size_t batch_size, Rng& rng) const {
  if (size_ == 0) throw InvalidArgument("cannot sample from an empty replay buffer");
  std::vector<Transition> batch;
  batch.reserve(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) {
    batch.push_back(ring_[static_cast<std::size_t>(rng.index(static_cast<int>(size_)))]);
  }
  return batch;
}

OfflineDataset extract_offline(const ReplayBuffer& buf, double fraction, DatasetHeader header) {
  if (buf.empty()) throw InvalidArgument("cannot extract a dataset from an empty replay buffer");
  if (!(fraction > 0.0 && fraction <= 1.0)) throw InvalidArgument("dataset fraction must be in (0, 1]");
  // The epsilon absorbs products such as 0.1 * 30000 landing just below 3000.
  const auto n = static_cast<std::size_t>(
      std::floor(fraction * static_cast<double>(buf.size()) + 1e-9));
  OfflineDataset ds;
  ds.header = std::move(header);
  ds.records.reserve(n);
  for (std::size_t i = buf.size() - n; i < buf.size(); ++i) ds.records.push_back(buf.at(i));
  ds.header.count = ds.records.size();
  if (!ds.records.empty()) ds.header.obs_dim = static_cast<int>(ds.records.front().state.size());
  return ds;
}

void validate(const OfflineDataset& ds) {
  if (ds.header.count != ds.records.size()) {
    throw MismatchError("dataset header count " + std::to_string(ds.header.count) + " but " +
                        std::to_string(ds.records.size()) + " records");
  }
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    const Transition& t = ds.records[i];
    if (static_cast<int>(t.state.size()) != ds.header.obs_dim ||
        static_cast<int>(t.next_state.size()) != ds.header.obs_dim) {
      throw MismatchError("record " + std::to_string(i + 1) + " has state dim " +
                          std::to_string(t.state.size()) + ", header says " +
                          std::to_string(ds.header.obs_dim));
    }
    if (t.action < 0 || t.action >= ds.header.action_count) {
      throw MismatchError("record " + std::to_string(i + 1) + " action " + std::to_string(t.action) +
                          " outside [0, " + std::to_string(ds.header.action_count) + ")");
    }
  }
}

void check_dataset_matches(const DatasetHeader& header, const std::string& env_name, int obs_dim,
                           int action_count) {
  if (header.env_name != env_name) {
    throw MismatchError("dataset was collected on env '" + header.env_name + "' but the run is configured for '" +
                        env_name + "'");
  }
  if (header.obs_dim != obs_dim || header.action_count != action_count) {
    throw MismatchError("dataset dims (obs " + std::to_string(header.obs_dim) + ", actions " +
                        std::to_string(header.action_count) + ") differ from the run (obs " +
                        std::to_string(obs_dim) + ", actions " + std::to_string(action_count) + ")");
  }
}

}  // namespace cqrlab
