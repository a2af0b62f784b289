#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "bbrsim/cca.hpp"
#include "bbrsim/cpu_gate.hpp"
#include "bbrsim/link.hpp"
#include "bbrsim/sim_core.hpp"

namespace bbrsim {

inline constexpr std::uint64_t kTsoMaxBytes = 65536;
inline constexpr std::uint64_t kTsoDisableBelowBps = 1'200'000;

// Bytes handed to the NIC per transmit: 1 ms worth of data at the pacing
// rate, clamped to [2 MSS, 64 KB]; a single MSS below 1.2 Mbps.
std::uint64_t tso_burst_size(std::uint64_t pacing_rate_bps);

// Gap the pacer leaves after a burst: size / rate.
SimTime pacing_interval(std::uint64_t burst_bytes, std::uint64_t pacing_rate_bps);

struct BurstRecord {
  std::uint64_t seq_start = 0;
  std::uint64_t size = 0;
  SimTime sent_at;
  std::uint64_t delivered_at_send = 0;
  SimTime delivered_time_at_send;
  SimTime first_sent_at_send;  // send time of the newest burst acked before this one left
  bool app_limited_at_send = false;
  bool lost = false;
  bool sacked = false;
  bool retransmitted = false;
};

struct SenderConfig {
  std::uint32_t tsq_limit = 2;
  SimTime min_rto = SimTime::from_ms(10);
  std::uint64_t unpaced_burst_limit = kTsoMaxBytes;
  // RTT sampled by the handshake; seeds srtt and the CCA before data flows.
  std::optional<SimTime> handshake_rtt;
  // Throttled application source; unset means an infinite bulk transfer.
  std::optional<std::uint64_t> app_rate_bps;
};

struct SenderStats {
  std::uint64_t bursts_sent = 0;
  std::uint64_t bytes_sent = 0;
  std::uint64_t retransmits = 0;
  std::uint64_t retransmitted_bytes = 0;
  std::uint64_t lost_bytes = 0;
  std::uint64_t loss_episodes = 0;
  std::uint64_t acks_processed = 0;
  std::uint64_t stale_acks = 0;
};

enum class SenderAction : std::uint8_t { Send, AckProcessed };

struct SenderTraceEntry {
  SimTime t;
  SenderAction action;
  std::uint64_t seq = 0;
  std::uint64_t size = 0;
  bool retransmit = false;
};

// TCP-like bulk sender: sequence space, inflight accounting, delivery-rate
// sampling, timeout loss recovery and a Linux-style pacer that emits TSO
// bursts. All sender work (sending, ACK processing) happens only while the
// optional CPU schedule grants the CPU; work arriving off-CPU waits for the
// next window.
class Sender {
 public:
  Sender(Simulator& sim, BottleneckLink& link, CongestionControl& cca, SenderConfig config,
         std::optional<CpuSchedule> gate);

  Sender(const Sender&) = delete;
  Sender& operator=(const Sender&) = delete;

  void start();
  // Stops all further sending and ACK processing.
  void stop();

  // Entry point for the reverse path.
  void on_ack_arrival(const Ack& ack);

  std::uint64_t inflight() const { return inflight_; }
  std::uint64_t delivered() const { return delivered_; }
  std::uint64_t snd_una() const { return snd_una_; }
  std::uint64_t next_seq() const { return next_seq_; }
  std::uint64_t cwnd() const { return decision_.cwnd; }
  std::optional<std::uint64_t> pacing_rate() const { return decision_.pacing_rate_bps; }
  SimTime next_send_due() const { return next_send_due_; }
  bool cwnd_limited() const { return cwnd_limited_; }
  bool app_limited() const { return app_limited_until_ > 0; }
  SimTime srtt() const { return srtt_; }
  const RateSample& last_sample() const { return last_sample_; }
  const SenderStats& stats() const { return stats_; }
  std::size_t tsq_depth() const { return tsq_queue_.size(); }
  std::uint64_t lost_outstanding() const { return lost_outstanding_; }
  std::uint64_t sacked_outstanding() const { return sacked_outstanding_; }

  void enable_trace(bool on) { trace_enabled_ = on; }
  const std::vector<SenderTraceEntry>& trace() const { return trace_; }

  void set_sample_hook(std::function<void(const RateSample&, SimTime)> hook) {
    sample_hook_ = std::move(hook);
  }

 private:
  bool on_cpu(SimTime t) const { return !gate_ || is_on_cpu(t, *gate_); }
  void ensure_resume();
  void on_resume();
  void drain_pending_acks();
  void on_pacing_timer();
  void on_loss_timer();

  void process_ack(const Ack& ack);
  void try_send();
  void try_send_paced(SimTime t, std::uint64_t rate);
  void try_send_unpaced();
  std::uint64_t unpaced_burst_size() const;
  // Emits one burst of at most `want` bytes; returns its size or 0 if blocked.
  std::uint64_t emit(std::uint64_t want);
  std::uint64_t app_available() const;
  void arm_pacing_timer();
  void arm_loss_timer();
  SimTime current_rto() const;
  void detect_loss_and_retransmit();
  void record(SenderAction action, std::uint64_t seq, std::uint64_t size, bool retx);

  Simulator& sim_;
  BottleneckLink& link_;
  CongestionControl& cca_;
  SenderConfig config_;
  std::optional<CpuSchedule> gate_;

  CcaDecision decision_;
  bool started_ = false;
  bool stopped_ = false;

  std::uint64_t next_seq_ = 0;
  std::uint64_t snd_una_ = 0;
  std::uint64_t inflight_ = 0;
  std::uint64_t lost_outstanding_ = 0;
  std::uint64_t sacked_outstanding_ = 0;
  std::uint64_t delivered_ = 0;
  SimTime delivered_time_;
  std::uint64_t app_limited_until_ = 0;
  std::uint64_t next_burst_id_ = 1;

  std::map<std::uint64_t, BurstRecord> outstanding_;  // keyed by seq_start
  std::deque<std::uint64_t> retransmit_queue_;        // seq_start of lost records

  SimTime next_send_due_;
  std::deque<SimTime> tsq_queue_;  // due times of bursts the gate held back
  bool cwnd_limited_ = false;

  std::deque<Ack> pending_acks_;
  bool loss_check_pending_ = false;

  EventHandle pacing_timer_;
  SimTime pacing_timer_at_;
  EventHandle resume_event_;
  SimTime first_sent_;
  SimTime min_rtt_;
  bool have_min_rtt_ = false;
  SimTime rack_sent_at_;  // send time of the most recently sent delivered burst
  bool have_rack_ = false;
  EventHandle loss_timer_;
  SimTime loss_timer_at_;

  SimTime srtt_;
  bool have_srtt_ = false;
  bool in_recovery_ = false;
  std::uint64_t recovery_point_ = 0;
  SimTime episode_start_;

  RateSample last_sample_;
  SenderStats stats_;
  bool trace_enabled_ = false;
  std::vector<SenderTraceEntry> trace_;
  std::function<void(const RateSample&, SimTime)> sample_hook_;
};

// Cumulative-ACK receiver. ACKs every arriving burst immediately and is never
// CPU gated.
class Receiver {
 public:
  explicit Receiver(BottleneckLink& link) : link_(link) {}

  void on_burst(const Burst& burst);

  // In-order bytes handed to the application.
  std::uint64_t goodput_bytes() const { return rcv_nxt_; }
  std::uint64_t bursts_received() const { return bursts_received_; }
  const std::vector<std::uint64_t>& arrival_ids() const { return arrival_ids_; }
  void record_arrivals(bool on) { record_arrivals_ = on; }

 private:
  BottleneckLink& link_;
  std::uint64_t rcv_nxt_ = 0;
  std::map<std::uint64_t, std::uint64_t> out_of_order_;  // start -> end
  std::uint64_t bursts_received_ = 0;
  bool record_arrivals_ = false;
  std::vector<std::uint64_t> arrival_ids_;
};

}  // namespace bbrsim
