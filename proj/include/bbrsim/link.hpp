#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>

#include "bbrsim/sim_core.hpp"
#include "bbrsim/sim_time.hpp"

namespace bbrsim {

inline constexpr std::uint64_t kMss = 1500;

// A TSO burst travelling the forward path as a single unit.
struct Burst {
  std::uint64_t seq_start = 0;
  std::uint64_t size = 0;
  std::uint64_t id = 0;  // sender-assigned, unique per transmission
  bool retransmit = false;
};

// Cumulative ACK plus one selective block naming the burst that triggered it.
struct Ack {
  std::uint64_t cum_ack = 0;
  std::uint64_t sack_start = 0;
  std::uint64_t sack_end = 0;  // sack_end <= cum_ack means the block adds nothing
};

struct LinkConfig {
  std::uint64_t bandwidth_bps = 0;
  SimTime one_way_delay;
  std::uint64_t buffer_limit = 0;  // bytes
  double loss_rate = 0.0;

  // bandwidth x RTT / 8, with RTT = 2 x one_way_delay
  std::uint64_t bdp_bytes() const { return bytes_in(bandwidth_bps, one_way_delay * 2); }

  // Config with the buffer sized to `buffer_bdp` times the path BDP.
  static LinkConfig make(std::uint64_t bandwidth_bps, SimTime rtt, double buffer_bdp = 1.0,
                         double loss_rate = 0.0);

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

// Unloaded round trip of a burst: propagation both ways plus its serialization.
SimTime min_rtt_of(const LinkConfig& link, std::uint64_t burst_bytes);

enum class EnqueueResult { Accepted, Dropped };

struct LinkStats {
  std::uint64_t enqueued_bytes = 0;
  std::uint64_t accepted_bytes = 0;
  std::uint64_t delivered_bytes = 0;
  std::uint64_t dropped_bytes = 0;  // buffer overflow plus random loss
  std::uint64_t dropped_bursts = 0;
};

// Drop-tail bottleneck with FIFO serialization at the configured bandwidth and
// a fixed propagation delay on each direction. The reverse (ACK) path is ideal.
class BottleneckLink {
 public:
  using BurstSink = std::function<void(const Burst&)>;
  using AckSink = std::function<void(const Ack&)>;

  BottleneckLink(Simulator& sim, LinkConfig config, RngStream loss_rng);

  void set_receiver(BurstSink sink) { to_receiver_ = std::move(sink); }
  void set_sender(AckSink sink) { to_sender_ = std::move(sink); }

  EnqueueResult enqueue(const Burst& burst);
  // Schedules the ACK's arrival at the sender one propagation delay from now.
  void deliver_ack(const Ack& ack);

  const LinkConfig& config() const { return config_; }
  const LinkStats& stats() const { return stats_; }
  std::uint64_t occupied() const { return occupied_; }
  SimTime busy_until() const { return busy_until_; }

 private:
  struct Queued {
    Burst burst;
    SimTime enqueued_at;
  };

  void start_service();
  void finish_service();

  Simulator& sim_;
  LinkConfig config_;
  RngStream loss_rng_;
  std::deque<Queued> fifo_;
  std::uint64_t occupied_ = 0;
  bool in_service_ = false;
  Burst serving_{};
  SimTime busy_until_;
  LinkStats stats_;
  BurstSink to_receiver_;
  AckSink to_sender_;
};

}  // namespace bbrsim
