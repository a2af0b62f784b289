#include "bbrsim/cubic.hpp"

#include <algorithm>
#include <cmath>

namespace bbrsim {

Cubic::Cubic(CubicParams params) : params_(params), cwnd_(params.initial_cwnd) {}

std::uint64_t Cubic::window_at(SimTime now) const {
  const double t = (now - *epoch_start_).seconds() - k_;
  const double w_mss = params_.c * t * t * t + w_max_;
  const double bytes = std::max(w_mss * static_cast<double>(kMss), static_cast<double>(params_.min_cwnd));
  return static_cast<std::uint64_t>(bytes);
}

CcaDecision Cubic::on_ack(const RateSample& sample, SimTime now) {
  // The window is held while a loss episode is being repaired.
  if (sample.in_recovery) return current();
  if (in_slow_start()) {
    cwnd_ += sample.newly_acked;
    if (ssthresh_) cwnd_ = std::min(cwnd_, *ssthresh_);
  } else {
    // The epoch opens on the first congestion-avoidance ACK after a loss.
    if (!epoch_start_) epoch_start_ = now;
    cwnd_ = window_at(now);
  }
  return current();
}

void Cubic::on_loss(SimTime /*now*/) {
  w_max_ = static_cast<double>(cwnd_) / static_cast<double>(kMss);
  const auto reduced = static_cast<std::uint64_t>(params_.beta * static_cast<double>(cwnd_));
  cwnd_ = std::max(reduced, params_.min_cwnd);
  ssthresh_ = cwnd_;
  epoch_start_.reset();
  k_ = std::cbrt(w_max_ * (1.0 - params_.beta) / params_.c);
}

CcaTelemetry Cubic::telemetry() const {
  CcaTelemetry t;
  t.phase = in_slow_start() ? CcaPhase::SlowStart : CcaPhase::CongestionAvoidance;
  return t;
}

}  // namespace bbrsim
