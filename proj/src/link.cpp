#include "bbrsim/link.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bbrsim {

LinkConfig LinkConfig::make(std::uint64_t bandwidth_bps, SimTime rtt, double buffer_bdp,
                            double loss_rate) {
  LinkConfig c;
  c.bandwidth_bps = bandwidth_bps;
  c.one_way_delay = rtt / 2;
  c.loss_rate = loss_rate;
  const auto bdp = static_cast<double>(c.bdp_bytes());
  c.buffer_limit = std::max<std::uint64_t>(kMss, static_cast<std::uint64_t>(std::floor(bdp * buffer_bdp)));
  return c;
}

void LinkConfig::validate() const {
  if (bandwidth_bps == 0) throw std::invalid_argument("link: bandwidth must be > 0");
  if (one_way_delay < SimTime{}) throw std::invalid_argument("link: one_way_delay must be >= 0");
  if (buffer_limit < kMss) throw std::invalid_argument("link: buffer_limit must be >= 1 MSS");
  if (!(loss_rate >= 0.0 && loss_rate <= 1.0)) throw std::invalid_argument("link: loss_rate must be in [0,1]");
}

SimTime min_rtt_of(const LinkConfig& link, std::uint64_t burst_bytes) {
  return link.one_way_delay * 2 + transmit_time(burst_bytes, link.bandwidth_bps);
}

BottleneckLink::BottleneckLink(Simulator& sim, LinkConfig config, RngStream loss_rng)
    : sim_(sim), config_(config), loss_rng_(loss_rng) {
  config_.validate();
}

EnqueueResult BottleneckLink::enqueue(const Burst& burst) {
  stats_.enqueued_bytes += burst.size;
  const bool overflow = occupied_ + burst.size > config_.buffer_limit;
  // The loss stream is only consumed on lossy links so it cannot perturb 0% runs.
  const bool lost = !overflow && config_.loss_rate > 0.0 && loss_rng_.bernoulli(config_.loss_rate);
  if (overflow || lost) {
    stats_.dropped_bytes += burst.size;
    ++stats_.dropped_bursts;
    return EnqueueResult::Dropped;
  }
  stats_.accepted_bytes += burst.size;
  occupied_ += burst.size;
  fifo_.push_back(Queued{burst, sim_.now()});
  if (!in_service_) start_service();
  return EnqueueResult::Accepted;
}

void BottleneckLink::start_service() {
  in_service_ = true;
  // The head leaves the buffer once it starts serializing.
  serving_ = fifo_.front().burst;
  fifo_.pop_front();
  occupied_ -= serving_.size;
  busy_until_ = sim_.now() + transmit_time(serving_.size, config_.bandwidth_bps);
  sim_.schedule(busy_until_, EventKind::LinkDequeue, [this] { finish_service(); });
}

void BottleneckLink::finish_service() {
  const Burst burst = serving_;
  stats_.delivered_bytes += burst.size;
  sim_.schedule_in(config_.one_way_delay, EventKind::PacketArrival, [this, burst] {
    if (to_receiver_) to_receiver_(burst);
  });
  in_service_ = false;
  if (!fifo_.empty()) start_service();
}

void BottleneckLink::deliver_ack(const Ack& ack) {
  sim_.schedule_in(config_.one_way_delay, EventKind::AckArrival, [this, ack] {
    if (to_sender_) to_sender_(ack);
  });
}

}  // namespace bbrsim
