#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "cca/rng.hpp"
#include "cca/types.hpp"

namespace cca {

// Fixed-capacity FIFO ring of transitions. Eviction of the oldest entry is
// silent once full.
template <class S, class A>
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw std::invalid_argument("replay buffer capacity must be > 0");
    storage_.reserve(std::min<std::size_t>(capacity_, 4096));
  }

  void push(Transition<S, A> t) {
    if (storage_.size() < capacity_) {
      storage_.push_back(std::move(t));
    } else {
      storage_[cursor_] = std::move(t);
    }
    cursor_ = (cursor_ + 1) % capacity_;
  }

  std::size_t size() const { return storage_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::size_t cursor() const { return cursor_; }

  const Transition<S, A>& at(std::size_t i) const { return storage_[i]; }

  // n transitions drawn uniformly with replacement; needs a non-empty buffer.
  std::vector<Transition<S, A>> sample_batch(std::size_t n, RngStream& rng) const {
    if (storage_.empty()) {
      throw std::runtime_error("replay buffer: cannot sample batch from empty buffer");
    }
    std::vector<Transition<S, A>> batch;
    batch.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      batch.push_back(storage_[rng.uniform_int(storage_.size())]);
    }
    return batch;
  }

  // min(n, size) next-states drawn uniformly without replacement
  // (partial Fisher-Yates over an index array).
  std::vector<S> sample_states(std::size_t n, RngStream& rng) const {
    if (storage_.empty()) {
      throw std::runtime_error("replay buffer: cannot sample states from empty buffer");
    }
    const std::size_t k = std::min(n, storage_.size());
    std::vector<std::size_t> idx(storage_.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::vector<S> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + rng.uniform_int(idx.size() - i);
      std::swap(idx[i], idx[j]);
      out.push_back(storage_[idx[i]].s_next);
    }
    return out;
  }

 private:
  std::size_t capacity_;
  std::size_t cursor_ = 0;
  std::vector<Transition<S, A>> storage_;
};

}  // namespace cca
