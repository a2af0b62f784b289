#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "bbrsim/sim_time.hpp"

namespace bbrsim {

// Delivery-rate and RTT sample handed to the congestion controller per ACK.
struct RateSample {
  std::uint64_t delivery_rate_bps = 0;
  bool rate_valid = false;  // false when the interval was not positive or shorter than min RTT
  SimTime rtt;              // zero when the sampled burst was a retransmission
  bool rtt_valid = false;
  SimTime interval;
  std::uint64_t newly_acked = 0;
  bool is_app_limited = false;
  std::uint64_t inflight_after_ack = 0;
  std::uint64_t prior_delivered = 0;  // sender's delivered counter when the sampled burst left
  std::uint64_t delivered = 0;        // delivered counter including this ACK
  bool in_recovery = false;           // a loss episode is still being repaired
};

// What the transport enforces after a CCA update. No pacing rate = unpaced.
struct CcaDecision {
  std::optional<std::uint64_t> pacing_rate_bps;
  std::uint64_t cwnd = 0;
};

enum class CcaPhase : std::uint8_t {
  Startup,
  Drain,
  ProbeBW,
  ProbeRTT,
  SlowStart,
  CongestionAvoidance,
  Fixed,
};

std::string_view to_string(CcaPhase phase);

struct CcaTelemetry {
  CcaPhase phase = CcaPhase::Fixed;
  double pacing_gain = 0.0;
  double cwnd_gain = 0.0;
  std::uint64_t btlbw_bps = 0;
  SimTime rtprop;
  std::uint64_t est_bdp = 0;  // bytes; 0 when the algorithm keeps no model
  bool deficit_active = false;
  int cycle_index = -1;
};

class CongestionControl {
 public:
  virtual ~CongestionControl() = default;

  virtual CcaDecision on_ack(const RateSample& sample, SimTime now) = 0;
  // Called once per loss episode.
  virtual void on_loss(SimTime now) = 0;
  virtual CcaDecision current() const = 0;
  virtual CcaTelemetry telemetry() const = 0;
  // RTT measured by the connection handshake, before any data is sent.
  virtual void on_handshake_rtt(SimTime /*rtt*/) {}
};

// Constant window, optionally paced at a constant rate. Used for pipe-model
// checks with the control loop switched off.
class FixedWindow final : public CongestionControl {
 public:
  explicit FixedWindow(std::uint64_t cwnd, std::optional<std::uint64_t> pacing_rate_bps = std::nullopt)
      : decision_{pacing_rate_bps, cwnd} {}

  CcaDecision on_ack(const RateSample&, SimTime) override { return decision_; }
  void on_loss(SimTime) override { ++losses_; }
  CcaDecision current() const override { return decision_; }
  CcaTelemetry telemetry() const override { return {}; }

  int losses() const { return losses_; }

 private:
  CcaDecision decision_;
  int losses_ = 0;
};

}  // namespace bbrsim
