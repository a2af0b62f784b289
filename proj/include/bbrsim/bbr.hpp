#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "bbrsim/cca.hpp"
#include "bbrsim/link.hpp"
#include "bbrsim/windowed_filter.hpp"

namespace bbrsim {

enum class BbrVersion : std::uint8_t { V1, V3 };

std::string_view to_string(BbrVersion v);

struct BbrParams {
  BbrVersion version = BbrVersion::V1;
  double high_gain = 2.89;
  double cwnd_gain_probe_bw = 2.0;
  double drain_gain = 1.0 / 2.89;
  std::vector<double> probe_bw_gains = {1.25, 0.75, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
  int probe_bw_start_index = 2;
  SimTime probe_rtt_interval = SimTime::from_s(10);
  SimTime probe_rtt_duration = SimTime::from_ms(200);
  std::int64_t bw_window_rounds = 10;
  SimTime rtprop_window = SimTime::from_s(10);
  std::uint64_t min_cwnd = 4 * kMss;
  std::uint64_t initial_cwnd = 10 * kMss;
  double startup_growth_target = 1.25;
  int startup_full_bw_rounds = 3;
  // Fraction of BtlBw kept after a loss episode; 1.0 disables the response.
  double loss_bw_cap = 1.0;
  bool patch_enabled = false;

  static BbrParams v1(bool patch = false);
  // v1 machinery re-parameterized: 2.77 high gain, 5 s ProbeRTT interval and
  // a multiplicative bandwidth cap on loss.
  static BbrParams v3(bool patch = false);

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

// BBR congestion control (Startup / Drain / ProbeBW / ProbeRTT) with the
// optional inflight-deficit patch: whenever bytes in flight fall below the
// estimated BDP on a socket that is not app-limited, pacing_gain is raised
// to high_gain while cwnd_gain stays at its phase value.
class Bbr final : public CongestionControl {
 public:
  explicit Bbr(BbrParams params);

  CcaDecision on_ack(const RateSample& sample, SimTime now) override;
  void on_loss(SimTime now) override;
  CcaDecision current() const override { return decision_; }
  CcaTelemetry telemetry() const override;
  // Seeds the pre-sample pacing rate as high_gain x initial_cwnd / rtt.
  void on_handshake_rtt(SimTime rtt) override;

  const BbrParams& params() const { return params_; }
  CcaPhase phase() const { return phase_; }
  bool has_bw() const { return !bw_filter_.empty(); }
  std::optional<SimTime> rtprop() const { return rtprop_filter_.best(); }
  // Windowed-max BtlBw, capped after a loss for versions with a loss response.
  std::uint64_t btlbw() const;
  std::uint64_t filter_max_bw() const { return bw_filter_.best().value_or(0); }
  std::uint64_t bdp() const;
  std::int64_t round_count() const { return round_count_; }
  bool full_bw_reached() const { return full_bw_reached_; }
  std::uint64_t full_bw() const { return full_bw_; }
  int cycle_index() const { return cycle_index_; }
  double pacing_gain() const { return pacing_gain_; }
  double cwnd_gain() const { return cwnd_gain_; }
  bool deficit_active() const { return deficit_active_; }
  SimTime probe_rtt_stamp() const { return probe_rtt_stamp_; }
  std::optional<SimTime> startup_exit_time() const { return startup_exit_; }

  // Gains implied by (phase, cycle slot, deficit flag); the conformance oracle
  // for the table the state machine must follow.
  static std::pair<double, double> gains_for(const BbrParams& p, CcaPhase phase, int cycle_index,
                                             bool deficit);

  // Fires on every phase change (old, new, time).
  void set_phase_hook(std::function<void(CcaPhase, CcaPhase, SimTime)> hook) {
    phase_hook_ = std::move(hook);
  }

  // Exposed for unit tests of the individual transitions.
  void check_full_pipe(std::uint64_t bw, bool app_limited);
  void update_gains(std::uint64_t inflight, bool app_limited);

 private:
  void set_phase(CcaPhase next, SimTime now);
  void enter_probe_bw(SimTime now);
  void advance_cycle(SimTime now, std::uint64_t inflight);
  void check_drain(SimTime now, std::uint64_t inflight);
  void check_probe_rtt(const RateSample& rs, SimTime now);
  void recompute_decision();

  BbrParams params_;
  CcaPhase phase_ = CcaPhase::Startup;

  WindowedFilter<std::int64_t, std::uint64_t, std::greater<>> bw_filter_;
  WindowedFilter<SimTime, SimTime, std::less<>> rtprop_filter_;
  std::optional<std::uint64_t> bw_cap_;

  std::int64_t round_count_ = 0;
  std::uint64_t next_round_delivered_ = 0;
  bool round_start_ = false;

  std::uint64_t full_bw_ = 0;
  std::optional<SimTime> handshake_rtt_;
  std::uint64_t probe_rtt_app_limited_until_ = 0;
  int full_bw_count_ = 0;
  bool full_bw_reached_ = false;
  std::optional<SimTime> startup_exit_;

  int cycle_index_ = 0;
  SimTime cycle_stamp_;
  bool loss_in_cycle_ = false;

  SimTime probe_rtt_stamp_;
  std::optional<SimTime> probe_rtt_done_;
  bool probe_rtt_round_done_ = false;

  double pacing_gain_;
  double cwnd_gain_;
  bool deficit_active_ = false;
  CcaDecision decision_;
  std::function<void(CcaPhase, CcaPhase, SimTime)> phase_hook_;
};

}  // namespace bbrsim
