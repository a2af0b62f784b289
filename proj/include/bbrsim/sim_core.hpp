#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <random>
#include <stdexcept>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "bbrsim/sim_time.hpp"

namespace bbrsim {

enum class EventKind : std::uint8_t {
  PacingTimerDue,
  LinkDequeue,
  PacketArrival,
  AckArrival,
  CpuResume,
  LossTimer,
  MetricSample,
  RunEnd,
};

std::string_view to_string(EventKind kind);

struct EventHandle {
  std::uint64_t seq = 0;
  bool valid() const { return seq != 0; }
};

// Raised when a caller breaks an engine precondition, e.g. scheduling in the past.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Single-threaded discrete-event engine. Events fire in (fire_at, seq) order,
// so events sharing a timestamp run in insertion order.
class Simulator {
 public:
  using Action = std::function<void()>;
  using Observer = std::function<void(SimTime, EventKind, std::uint64_t seq)>;

  SimTime now() const { return now_; }

  EventHandle schedule(SimTime fire_at, EventKind kind, Action action);
  EventHandle schedule_in(SimTime delay, EventKind kind, Action action) {
    return schedule(now_ + delay, kind, std::move(action));
  }

  // True iff the event was still pending.
  bool cancel(EventHandle handle);
  bool pending(EventHandle handle) const { return actions_.contains(handle.seq); }

  void run_until(SimTime end);

  std::size_t pending_count() const { return actions_.size(); }
  std::uint64_t processed_count() const { return processed_; }

  // Called before each dispatched event; used for tracing and tests.
  void set_observer(Observer observer) { observer_ = std::move(observer); }

 private:
  struct Entry {
    SimTime fire_at;
    std::uint64_t seq;
    EventKind kind;
    bool operator>(const Entry& o) const {
      return fire_at != o.fire_at ? fire_at > o.fire_at : seq > o.seq;
    }
  };

  SimTime now_;
  std::uint64_t next_seq_ = 1;
  std::uint64_t processed_ = 0;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue_;
  std::unordered_map<std::uint64_t, Action> actions_;
  Observer observer_;
};

// Reproducible random stream. Each consumer owns a stream derived from the
// master seed and its own id, so adding a consumer never shifts another's values.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t next_u64() { return engine_(); }
  // Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  // Uniform integer in [0, bound); bound > 0.
  std::uint64_t below(std::uint64_t bound);
  bool bernoulli(double p) { return p >= 1.0 || (p > 0.0 && uniform() < p); }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace bbrsim
