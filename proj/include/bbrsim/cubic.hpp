#pragma once

#include <cstdint>
#include <optional>

#include "bbrsim/cca.hpp"
#include "bbrsim/link.hpp"

namespace bbrsim {

struct CubicParams {
  double c = 0.4;
  double beta = 0.7;
  std::uint64_t initial_cwnd = 10 * kMss;
  std::uint64_t min_cwnd = 2 * kMss;
};

// Loss-based CUBIC without the TCP-friendly region and without pacing.
// Window law in MSS units: W(t) = C (t - K)^3 + W_max, t measured from the
// last loss, K = cbrt(W_max (1 - beta) / C).
class Cubic final : public CongestionControl {
 public:
  explicit Cubic(CubicParams params = {});

  CcaDecision on_ack(const RateSample& sample, SimTime now) override;
  void on_loss(SimTime now) override;
  CcaDecision current() const override { return {std::nullopt, cwnd_}; }
  CcaTelemetry telemetry() const override;

  std::uint64_t cwnd() const { return cwnd_; }
  std::optional<std::uint64_t> ssthresh() const { return ssthresh_; }
  double w_max_mss() const { return w_max_; }
  double k_seconds() const { return k_; }
  std::optional<SimTime> epoch_start() const { return epoch_start_; }
  bool in_slow_start() const { return !ssthresh_ || cwnd_ < *ssthresh_; }

  // Window in bytes the cubic law prescribes at `now` (requires an epoch).
  std::uint64_t window_at(SimTime now) const;

 private:
  CubicParams params_;
  std::uint64_t cwnd_;
  std::optional<std::uint64_t> ssthresh_;
  double w_max_ = 0.0;
  double k_ = 0.0;
  std::optional<SimTime> epoch_start_;
};

}  // namespace bbrsim
