#pragma once

#include <deque>
#include <functional>
#include <optional>

namespace bbrsim {

// Exact sliding-window extremum over (key, value) samples. `Better(a, b)`
// is true when a should displace b (std::greater -> max filter). A sample is
// retained while key > newest_key - window. Monotonic deque, O(1) amortized.
template <typename Key, typename Value, typename Better, typename Span = Key>
class WindowedFilter {
 public:
  explicit WindowedFilter(Span window) : window_(window) {}

  void update(Key key, Value value) {
    while (!samples_.empty() && !Better{}(samples_.back().value, value)) samples_.pop_back();
    samples_.push_back({key, value});
    expire(key);
  }

  // Drops samples that have aged out as of `now`.
  void expire(Key now) {
    while (!samples_.empty() && !(samples_.front().key > now - window_)) samples_.pop_front();
  }

  std::optional<Value> best() const {
    if (samples_.empty()) return std::nullopt;
    return samples_.front().value;
  }
  std::optional<Key> best_key() const {
    if (samples_.empty()) return std::nullopt;
    return samples_.front().key;
  }

  bool empty() const { return samples_.empty(); }
  void reset() { samples_.clear(); }
  Span window() const { return window_; }

 private:
  struct Sample {
    Key key;
    Value value;
  };
  Span window_;
  std::deque<Sample> samples_;
};

}  // namespace bbrsim
