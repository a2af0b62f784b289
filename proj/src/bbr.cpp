#include "bbrsim/bbr.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bbrsim {

std::string_view to_string(BbrVersion v) { return v == BbrVersion::V1 ? "bbr1" : "bbr3"; }

BbrParams BbrParams::v1(bool patch) {
  BbrParams p;
  p.version = BbrVersion::V1;
  p.high_gain = 2.89;
  p.drain_gain = 1.0 / p.high_gain;
  p.probe_rtt_interval = SimTime::from_s(10);
  p.patch_enabled = patch;
  return p;
}

BbrParams BbrParams::v3(bool patch) {
  BbrParams p;
  p.version = BbrVersion::V3;
  p.high_gain = 2.77;
  p.drain_gain = 1.0 / p.high_gain;
  p.probe_rtt_interval = SimTime::from_s(5);
  p.loss_bw_cap = 0.7;
  p.patch_enabled = patch;
  return p;
}

void BbrParams::validate() const {
  auto fail = [](const char* what) { throw std::invalid_argument(std::string("bbr: ") + what); };
  if (!(high_gain > 1.0)) fail("high_gain must be > 1");
  if (!(cwnd_gain_probe_bw > 0.0)) fail("cwnd_gain must be > 0");
  if (!(drain_gain > 0.0 && drain_gain <= 1.0)) fail("drain_gain must be in (0,1]");
  if (probe_bw_gains.empty()) fail("probe_bw_gains must not be empty");
  for (double g : probe_bw_gains) {
    if (!(g >= 0.75 && g <= 1.25)) fail("probe_bw_gains must lie in [0.75, 1.25]");
  }
  if (probe_bw_start_index < 0 || probe_bw_start_index >= static_cast<int>(probe_bw_gains.size())) {
    fail("probe_bw_start_index out of range");
  }
  if (probe_rtt_interval <= SimTime{}) fail("probe_rtt_interval must be > 0");
  if (probe_rtt_duration < SimTime{}) fail("probe_rtt_duration must be >= 0");
  if (bw_window_rounds < 1) fail("bw_window must be >= 1 round");
  if (rtprop_window <= SimTime{}) fail("rtprop_window must be > 0");
  if (min_cwnd < kMss) fail("min_cwnd must be >= 1 MSS");
  if (initial_cwnd < min_cwnd) fail("initial_cwnd must be >= min_cwnd");
  if (!(startup_growth_target > 1.0)) fail("startup growth target must be > 1");
  if (startup_full_bw_rounds < 1) fail("startup rounds must be >= 1");
  if (!(loss_bw_cap > 0.0 && loss_bw_cap <= 1.0)) fail("loss_bw_cap must be in (0,1]");
}

Bbr::Bbr(BbrParams params)
    : params_(std::move(params)),
      bw_filter_(params_.bw_window_rounds),
      rtprop_filter_(params_.rtprop_window) {
  params_.validate();
  pacing_gain_ = params_.high_gain;
  cwnd_gain_ = params_.high_gain;
  recompute_decision();
}

std::uint64_t Bbr::btlbw() const {
  const std::uint64_t bw = bw_filter_.best().value_or(0);
  return bw_cap_ ? std::min(bw, *bw_cap_) : bw;
}

std::uint64_t Bbr::bdp() const {
  const auto rt = rtprop_filter_.best();
  if (bw_filter_.empty() || !rt) return params_.initial_cwnd;
  return bytes_in(btlbw(), *rt);
}

std::pair<double, double> Bbr::gains_for(const BbrParams& p, CcaPhase phase, int cycle_index,
                                         bool deficit) {
  double pacing = 1.0;
  double cwnd = 1.0;
  switch (phase) {
    case CcaPhase::Startup:
      pacing = p.high_gain;
      cwnd = p.high_gain;
      break;
    case CcaPhase::Drain:
      pacing = p.drain_gain;
      cwnd = p.high_gain;
      break;
    case CcaPhase::ProbeBW:
      pacing = p.probe_bw_gains.at(static_cast<std::size_t>(cycle_index));
      cwnd = p.cwnd_gain_probe_bw;
      break;
    default:
      break;
  }
  if (deficit) pacing = p.high_gain;
  return {pacing, cwnd};
}

void Bbr::set_phase(CcaPhase next, SimTime now) {
  if (next == phase_) return;
  const CcaPhase prev = phase_;
  phase_ = next;
  if (prev == CcaPhase::Startup && next == CcaPhase::Drain && !startup_exit_) startup_exit_ = now;
  if (phase_hook_) phase_hook_(prev, next, now);
}

CcaDecision Bbr::on_ack(const RateSample& rs, SimTime now) {
  if (rs.prior_delivered >= next_round_delivered_) {
    next_round_delivered_ = rs.delivered;
    ++round_count_;
    round_start_ = true;
  } else {
    round_start_ = false;
  }

  // Data sent around ProbeRTT is treated as app-limited so its low rate
  // cannot drag the bandwidth estimate down.
  const bool app_limited = rs.is_app_limited ||
      (probe_rtt_app_limited_until_ > 0 && rs.prior_delivered <= probe_rtt_app_limited_until_);

  // The window only ages when a sample is admitted, so a stretch of
  // discounted samples keeps the last maximum.
  if (rs.rate_valid && rs.delivery_rate_bps > 0) {
    // App-limited samples only count when they raise the estimate.
    if (!app_limited || rs.delivery_rate_bps > filter_max_bw()) {
      bw_filter_.update(round_count_, rs.delivery_rate_bps);
    }
  }

  if (rs.rtt_valid && rs.rtt > SimTime{}) {
    const auto current = rtprop_filter_.best();
    if (!current || rs.rtt <= *current) probe_rtt_stamp_ = now;
    rtprop_filter_.update(now, rs.rtt);
  }

  const std::uint64_t inflight = rs.inflight_after_ack;
  if (phase_ == CcaPhase::Startup && round_start_) check_full_pipe(btlbw(), app_limited);
  if (phase_ == CcaPhase::Startup && full_bw_reached_) set_phase(CcaPhase::Drain, now);
  if (phase_ == CcaPhase::Drain) check_drain(now, inflight);
  if (phase_ == CcaPhase::ProbeBW) advance_cycle(now, inflight);
  check_probe_rtt(rs, now);
  if (phase_ == CcaPhase::ProbeRTT) {
    probe_rtt_app_limited_until_ =
        std::max(probe_rtt_app_limited_until_, rs.delivered + rs.inflight_after_ack);
  }

  update_gains(inflight, app_limited);
  recompute_decision();
  return decision_;
}

void Bbr::check_full_pipe(std::uint64_t bw, bool app_limited) {
  if (full_bw_reached_ || app_limited) return;
  if (static_cast<double>(bw) >= static_cast<double>(full_bw_) * params_.startup_growth_target) {
    full_bw_ = bw;
    full_bw_count_ = 0;
    return;
  }
  if (++full_bw_count_ >= params_.startup_full_bw_rounds) full_bw_reached_ = true;
}

void Bbr::check_drain(SimTime now, std::uint64_t inflight) {
  if (inflight <= bdp()) enter_probe_bw(now);
}

void Bbr::enter_probe_bw(SimTime now) {
  set_phase(CcaPhase::ProbeBW, now);
  cycle_index_ = params_.probe_bw_start_index;
  cycle_stamp_ = now;
  loss_in_cycle_ = false;
}

void Bbr::advance_cycle(SimTime now, std::uint64_t inflight) {
  const auto rt = rtprop_filter_.best();
  const bool full_length = rt && now - cycle_stamp_ > *rt;
  const double gain = params_.probe_bw_gains[static_cast<std::size_t>(cycle_index_)];
  const double bdp_bytes = static_cast<double>(bdp());
  const double in_flight = static_cast<double>(inflight);
  // Every slot lasts one RTprop; the probe-up slot may also end on reaching
  // its inflight target or on a loss, the drain slot once inflight is back
  // at the BDP.
  bool advance = full_length;
  if (gain > 1.0) {
    advance = full_length || loss_in_cycle_ || in_flight >= gain * bdp_bytes;
  } else if (gain < 1.0) {
    advance = full_length || in_flight <= bdp_bytes;
  }
  if (!advance) return;
  cycle_index_ = (cycle_index_ + 1) % static_cast<int>(params_.probe_bw_gains.size());
  cycle_stamp_ = now;
  loss_in_cycle_ = false;
  if (params_.probe_bw_gains[static_cast<std::size_t>(cycle_index_)] > 1.0) bw_cap_.reset();
}

void Bbr::check_probe_rtt(const RateSample& rs, SimTime now) {
  if (phase_ != CcaPhase::ProbeRTT) {
    if (rtprop_filter_.best() && now - probe_rtt_stamp_ >= params_.probe_rtt_interval) {
      set_phase(CcaPhase::ProbeRTT, now);
      probe_rtt_done_.reset();
      probe_rtt_round_done_ = false;
    }
    if (phase_ != CcaPhase::ProbeRTT) return;
  }
  if (!probe_rtt_done_) {
    if (rs.inflight_after_ack <= params_.min_cwnd) {
      probe_rtt_done_ = now + params_.probe_rtt_duration;
      probe_rtt_round_done_ = false;
      next_round_delivered_ = rs.delivered;
    }
    return;
  }
  if (round_start_) probe_rtt_round_done_ = true;
  if (probe_rtt_round_done_ && now >= *probe_rtt_done_) {
    probe_rtt_stamp_ = now;
    if (full_bw_reached_) {
      enter_probe_bw(now);
    } else {
      set_phase(CcaPhase::Startup, now);
    }
  }
}

void Bbr::update_gains(std::uint64_t inflight, bool app_limited) {
  // The deficit override is not applied in ProbeRTT, whose whole purpose is
  // to hold inflight below the BDP.
  deficit_active_ = params_.patch_enabled && phase_ != CcaPhase::ProbeRTT && !app_limited &&
                    inflight < bdp();
  std::tie(pacing_gain_, cwnd_gain_) = gains_for(params_, phase_, cycle_index_, deficit_active_);
}

void Bbr::recompute_decision() {
  if (bw_filter_.empty()) {
    // Until the first bandwidth sample: high_gain x initial_cwnd per handshake
    // RTT, or per millisecond when no RTT is known.
    if (handshake_rtt_) {
      const double r = params_.high_gain * static_cast<double>(rate_of(params_.initial_cwnd, *handshake_rtt_));
      decision_.pacing_rate_bps = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(r));
    } else {
      decision_.pacing_rate_bps = rate_of(params_.initial_cwnd, SimTime::from_ms(1));
    }
    decision_.cwnd = params_.initial_cwnd;
    return;
  }
  const double rate = pacing_gain_ * static_cast<double>(btlbw());
  decision_.pacing_rate_bps = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(rate));
  if (phase_ == CcaPhase::ProbeRTT) {
    decision_.cwnd = params_.min_cwnd;
  } else {
    const auto target = static_cast<std::uint64_t>(cwnd_gain_ * static_cast<double>(bdp()));
    decision_.cwnd = std::max(target, params_.min_cwnd);
  }
}

void Bbr::on_handshake_rtt(SimTime rtt) {
  if (rtt > SimTime{}) handshake_rtt_ = rtt;
  recompute_decision();
}

void Bbr::on_loss(SimTime /*now*/) {
  if (params_.loss_bw_cap >= 1.0) return;
  const std::uint64_t bw = btlbw();
  if (bw > 0) bw_cap_ = static_cast<std::uint64_t>(params_.loss_bw_cap * static_cast<double>(bw));
  loss_in_cycle_ = true;
  recompute_decision();
}

CcaTelemetry Bbr::telemetry() const {
  CcaTelemetry t;
  t.phase = phase_;
  t.pacing_gain = pacing_gain_;
  t.cwnd_gain = cwnd_gain_;
  t.btlbw_bps = btlbw();
  t.rtprop = rtprop_filter_.best().value_or(SimTime{});
  t.est_bdp = bdp();
  t.deficit_active = deficit_active_;
  t.cycle_index = phase_ == CcaPhase::ProbeBW ? cycle_index_ : -1;
  return t;
}

std::string_view to_string(CcaPhase phase) {
  switch (phase) {
    case CcaPhase::Startup: return "startup";
    case CcaPhase::Drain: return "drain";
    case CcaPhase::ProbeBW: return "probe_bw";
    case CcaPhase::ProbeRTT: return "probe_rtt";
    case CcaPhase::SlowStart: return "slow_start";
    case CcaPhase::CongestionAvoidance: return "cong_avoid";
    case CcaPhase::Fixed: return "fixed";
  }
  return "?";
}

}  // namespace bbrsim
