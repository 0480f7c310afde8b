#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

namespace critlab::detail {

// Epoch-stamped array: begin() invalidates every slot in O(1), so per-trial
// exploration costs scale with the explored set, not with the window.
template <class T>
class Scratch {
 public:
  void begin(std::size_t n) {
    if (stamp_.size() < n) {
      stamp_.assign(n, 0);
      value_.resize(n);
      epoch_ = 0;
    }
    if (++epoch_ == 0) {
      std::fill(stamp_.begin(), stamp_.end(), 0);
      epoch_ = 1;
    }
  }

  bool has(std::size_t i) const { return stamp_[i] == epoch_; }
  T get(std::size_t i, T fallback = T{}) const { return stamp_[i] == epoch_ ? value_[i] : fallback; }
  void set(std::size_t i, T v) {
    stamp_[i] = epoch_;
    value_[i] = v;
  }

 private:
  std::vector<std::uint32_t> stamp_;
  std::vector<T> value_;
  std::uint32_t epoch_ = 0;
};

}  // namespace critlab::detail
