#include "bbrsim/transport.hpp"

#include <algorithm>

namespace bbrsim {

std::uint64_t tso_burst_size(std::uint64_t pacing_rate_bps) {
  if (pacing_rate_bps == 0) throw ContractViolation("tso_burst_size: pacing rate must be > 0");
  if (pacing_rate_bps < kTsoDisableBelowBps) return kMss;
  const std::uint64_t one_ms = bytes_in(pacing_rate_bps, SimTime::from_ms(1));
  return std::clamp<std::uint64_t>(one_ms, 2 * kMss, kTsoMaxBytes);
}

SimTime pacing_interval(std::uint64_t burst_bytes, std::uint64_t pacing_rate_bps) {
  if (pacing_rate_bps == 0) throw ContractViolation("pacing_interval: pacing rate must be > 0");
  return transmit_time(burst_bytes, pacing_rate_bps);
}

Sender::Sender(Simulator& sim, BottleneckLink& link, CongestionControl& cca, SenderConfig config,
               std::optional<CpuSchedule> gate)
    : sim_(sim), link_(link), cca_(cca), config_(config), gate_(gate) {
  if (gate_) gate_->validate();
  if (config_.tsq_limit == 0) config_.tsq_limit = 1;
  decision_ = cca_.current();
}

void Sender::start() {
  started_ = true;
  if (config_.handshake_rtt && *config_.handshake_rtt > SimTime{}) {
    srtt_ = *config_.handshake_rtt;
    have_srtt_ = true;
    cca_.on_handshake_rtt(srtt_);
    decision_ = cca_.current();
  }
  delivered_time_ = sim_.now();
  first_sent_ = sim_.now();
  next_send_due_ = sim_.now();
  try_send();
}

void Sender::stop() {
  stopped_ = true;
  sim_.cancel(pacing_timer_);
  sim_.cancel(resume_event_);
  sim_.cancel(loss_timer_);
}

void Sender::record(SenderAction action, std::uint64_t seq, std::uint64_t size, bool retx) {
  if (trace_enabled_) trace_.push_back(SenderTraceEntry{sim_.now(), action, seq, size, retx});
}

void Sender::on_ack_arrival(const Ack& ack) {
  if (stopped_) return;
  if (on_cpu(sim_.now()) && pending_acks_.empty()) {
    process_ack(ack);
    try_send();
  } else {
    pending_acks_.push_back(ack);
    ensure_resume();
  }
}

void Sender::ensure_resume() {
  if (sim_.pending(resume_event_)) return;
  const SimTime at = gate_ ? next_on_cpu(sim_.now(), *gate_) : sim_.now();
  resume_event_ = sim_.schedule(at, EventKind::CpuResume, [this] { on_resume(); });
}

void Sender::on_resume() {
  resume_event_ = {};
  if (stopped_) return;
  drain_pending_acks();
  if (loss_check_pending_) {
    loss_check_pending_ = false;
    detect_loss_and_retransmit();
  }
  try_send();
  arm_loss_timer();
}

void Sender::on_pacing_timer() {
  pacing_timer_ = {};
  try_send();
}

void Sender::on_loss_timer() {
  loss_timer_ = {};
  if (stopped_) return;
  if (!on_cpu(sim_.now())) {
    // The resume handler runs the check and re-arms the timer.
    loss_check_pending_ = true;
    ensure_resume();
    return;
  }
  // ACKs that arrived before this instant are older news than the timeout.
  drain_pending_acks();
  detect_loss_and_retransmit();
  try_send();
  arm_loss_timer();
}

// ACKs held while descheduled, in arrival order; each may release a send.
void Sender::drain_pending_acks() {
  while (!pending_acks_.empty()) {
    const Ack ack = pending_acks_.front();
    pending_acks_.pop_front();
    process_ack(ack);
    try_send();
  }
}

std::uint64_t Sender::app_available() const {
  if (!config_.app_rate_bps) return ~std::uint64_t{0};
  const std::uint64_t produced = bytes_in(*config_.app_rate_bps, sim_.now());
  return produced > next_seq_ ? produced - next_seq_ : 0;
}

void Sender::process_ack(const Ack& ack) {
  const SimTime now = sim_.now();
  record(SenderAction::AckProcessed, ack.cum_ack, 0, false);

  BurstRecord latest;
  bool have_latest = false;
  const std::uint64_t delivered_before = delivered_;
  // Moves a record out of flight (or out of the lost set) into delivered.
  auto deliver = [&](BurstRecord& rec) {
    if (rec.lost) {
      lost_outstanding_ -= rec.size;
      std::erase(retransmit_queue_, rec.seq_start);
      rec.lost = false;
    } else {
      inflight_ -= rec.size;
    }
    delivered_ += rec.size;
    if (!have_latest || rec.sent_at >= latest.sent_at) {
      latest = rec;
      have_latest = true;
    }
  };

  if (ack.sack_end > std::max(ack.cum_ack, snd_una_)) {
    auto it = outstanding_.find(ack.sack_start);
    if (it != outstanding_.end() && !it->second.sacked && it->second.size == ack.sack_end - ack.sack_start) {
      deliver(it->second);
      it->second.sacked = true;
      sacked_outstanding_ += it->second.size;
    }
  }

  const bool advanced = ack.cum_ack > snd_una_;
  if (advanced) {
    for (auto it = outstanding_.begin();
         it != outstanding_.end() && it->first + it->second.size <= ack.cum_ack;) {
      BurstRecord& rec = it->second;
      if (rec.sacked) {
        sacked_outstanding_ -= rec.size;
      } else {
        deliver(rec);
      }
      it = outstanding_.erase(it);
    }
    snd_una_ = ack.cum_ack;
  }

  if (in_recovery_ && snd_una_ >= recovery_point_) in_recovery_ = false;
  if (!have_latest) {
    ++stats_.stale_acks;
    return;
  }
  ++stats_.acks_processed;
  const std::uint64_t newly = delivered_ - delivered_before;
  delivered_time_ = now;
  if (app_limited_until_ > 0 && delivered_ > app_limited_until_) app_limited_until_ = 0;

  RateSample rs;
  rs.newly_acked = newly;
  // Karn: a retransmitted burst's ACK may belong to the original copy.
  rs.rtt_valid = !latest.retransmitted;
  if (rs.rtt_valid) rs.rtt = now - latest.sent_at;
  // The longer of the send and ACK phases bounds the rate by what was
  // actually sent; cumulative ACK jumps after a hole is filled would
  // otherwise inflate it.
  const SimTime ack_phase = now - latest.delivered_time_at_send;
  const SimTime send_phase = latest.sent_at - latest.first_sent_at_send;
  rs.interval = std::max(ack_phase, send_phase);
  rs.prior_delivered = latest.delivered_at_send;
  rs.delivered = delivered_;
  rs.is_app_limited = latest.app_limited_at_send;
  rs.inflight_after_ack = inflight_;
  first_sent_ = latest.sent_at;
  if (rs.rtt_valid && (!have_min_rtt_ || rs.rtt < min_rtt_)) {
    min_rtt_ = rs.rtt;
    have_min_rtt_ = true;
  }
  if (rs.interval > SimTime{} && (!have_min_rtt_ || rs.interval >= min_rtt_)) {
    rs.delivery_rate_bps = rate_of(delivered_ - latest.delivered_at_send, rs.interval);
    rs.rate_valid = true;
  }

  if (rs.rtt_valid) {
    if (!have_srtt_) {
      srtt_ = rs.rtt;
      have_srtt_ = true;
    } else {
      srtt_ = (srtt_ * 7 + rs.rtt) / 8;
    }
  }

  if (!have_rack_ || latest.sent_at > rack_sent_at_) {
    rack_sent_at_ = latest.sent_at;
    have_rack_ = true;
  }
  rs.in_recovery = in_recovery_;

  decision_ = cca_.on_ack(rs, now);
  last_sample_ = rs;
  if (sample_hook_) sample_hook_(rs, now);
  detect_loss_and_retransmit();
}

void Sender::try_send() {
  if (stopped_ || !started_) return;
  const SimTime t = sim_.now();
  const bool paced = decision_.pacing_rate_bps.has_value();
  if (!on_cpu(t)) {
    // The pacer's slot came due while the sender is descheduled; hold it in
    // the qdisc-like backlog until the next window.
    if (paced && next_send_due_ <= t) {
      if (tsq_queue_.empty()) tsq_queue_.push_back(next_send_due_);
      ensure_resume();
    } else if (!paced && inflight_ + kMss <= decision_.cwnd) {
      ensure_resume();
    }
    return;
  }
  if (paced) {
    try_send_paced(t, std::max<std::uint64_t>(*decision_.pacing_rate_bps, 1));
  } else {
    try_send_unpaced();
  }
  arm_loss_timer();
}

void Sender::try_send_paced(SimTime t, std::uint64_t rate) {
  cwnd_limited_ = false;
  const std::uint64_t burst = tso_burst_size(rate);
  if (!tsq_queue_.empty()) {
    // Every pacing slot that elapsed during the off-CPU gap is due, but only
    // tsq_limit of them are held; no catch-up beyond that.
    const SimTime step = pacing_interval(burst, rate);
    while (tsq_queue_.size() < config_.tsq_limit && tsq_queue_.back() + step <= t) {
      tsq_queue_.push_back(tsq_queue_.back() + step);
    }
    bool released = false;
    while (!tsq_queue_.empty() && tsq_queue_.front() <= t) {
      const std::uint64_t sent = emit(burst);
      if (sent == 0) break;
      tsq_queue_.pop_front();
      released = true;
      next_send_due_ = t + pacing_interval(sent, rate);
    }
    tsq_queue_.clear();
    if (released) {
      arm_pacing_timer();
      return;
    }
  }
  if (next_send_due_ <= t) {
    const std::uint64_t sent = emit(burst);
    if (sent > 0) {
      next_send_due_ = t + pacing_interval(sent, rate);
    } else if (!cwnd_limited_ && config_.app_rate_bps) {
      // Source ran dry; wake when the next full segment exists.
      const SimTime ready = transmit_time(next_seq_ + kMss, *config_.app_rate_bps);
      next_send_due_ = std::max(t + SimTime::from_ns(1), ready);
    }
  }
  arm_pacing_timer();
}

void Sender::try_send_unpaced() {
  cwnd_limited_ = false;
  const std::uint64_t burst = unpaced_burst_size();
  while (emit(burst) > 0) {
  }
  if (!cwnd_limited_ && config_.app_rate_bps) {
    next_send_due_ = std::max(sim_.now() + SimTime::from_ns(1),
                              transmit_time(next_seq_ + kMss, *config_.app_rate_bps));
    arm_pacing_timer();
  }
}

// TSO autosizing from the rate the window implies: 2x cwnd/srtt in slow
// start, 1.2x otherwise.
std::uint64_t Sender::unpaced_burst_size() const {
  if (!have_srtt_) return config_.unpaced_burst_limit;
  const double ratio = cca_.telemetry().phase == CcaPhase::SlowStart ? 2.0 : 1.2;
  const auto rate = static_cast<std::uint64_t>(ratio * static_cast<double>(rate_of(decision_.cwnd, srtt_)));
  if (rate == 0) return config_.unpaced_burst_limit;
  return std::min(config_.unpaced_burst_limit, tso_burst_size(rate));
}

std::uint64_t Sender::emit(std::uint64_t want) {
  const SimTime now = sim_.now();
  const std::uint64_t cwnd = decision_.cwnd;

  if (!retransmit_queue_.empty()) {
    BurstRecord& rec = outstanding_.at(retransmit_queue_.front());
    if (inflight_ > 0 && inflight_ + rec.size > cwnd) {
      cwnd_limited_ = true;
      return 0;
    }
    retransmit_queue_.pop_front();
    rec.lost = false;
    rec.retransmitted = true;
    rec.sent_at = now;
    rec.delivered_at_send = delivered_;
    rec.delivered_time_at_send = delivered_time_;
    rec.first_sent_at_send = first_sent_;
    rec.app_limited_at_send = app_limited_until_ > 0;
    lost_outstanding_ -= rec.size;
    inflight_ += rec.size;
    ++stats_.retransmits;
    stats_.retransmitted_bytes += rec.size;
    ++stats_.bursts_sent;
    stats_.bytes_sent += rec.size;
    record(SenderAction::Send, rec.seq_start, rec.size, true);
    link_.enqueue(Burst{rec.seq_start, rec.size, next_burst_id_++, true});
    return rec.size;
  }

  const std::uint64_t room = cwnd > inflight_ ? cwnd - inflight_ : 0;
  std::uint64_t size = want;
  if (room < size) size = room / kMss * kMss;
  if (size < std::min(want, kMss)) {
    cwnd_limited_ = true;
    return 0;
  }
  const std::uint64_t available = app_available();
  if (available < size) {
    size = available / kMss * kMss;
    app_limited_until_ = std::max<std::uint64_t>(1, delivered_ + inflight_);
    if (size == 0) return 0;
  }

  if (outstanding_.empty()) {  // restart the rate clock after idle
    delivered_time_ = now;
    first_sent_ = now;
  }
  BurstRecord rec;
  rec.seq_start = next_seq_;
  rec.size = size;
  rec.sent_at = now;
  rec.delivered_at_send = delivered_;
  rec.delivered_time_at_send = delivered_time_;
  rec.first_sent_at_send = first_sent_;
  rec.app_limited_at_send = app_limited_until_ > 0;
  outstanding_.emplace(rec.seq_start, rec);
  next_seq_ += size;
  inflight_ += size;
  ++stats_.bursts_sent;
  stats_.bytes_sent += size;
  record(SenderAction::Send, rec.seq_start, size, false);
  link_.enqueue(Burst{rec.seq_start, size, next_burst_id_++, false});
  return size;
}

void Sender::arm_pacing_timer() {
  if (stopped_) return;
  const SimTime now = sim_.now();
  if (next_send_due_ <= now) {
    sim_.cancel(pacing_timer_);
    pacing_timer_ = {};
    return;
  }
  if (sim_.pending(pacing_timer_) && pacing_timer_at_ == next_send_due_) return;
  sim_.cancel(pacing_timer_);
  pacing_timer_at_ = next_send_due_;
  pacing_timer_ = sim_.schedule(next_send_due_, EventKind::PacingTimerDue, [this] { on_pacing_timer(); });
}

void Sender::arm_loss_timer() {
  if (stopped_) return;
  std::optional<SimTime> oldest;
  for (const auto& [seq, rec] : outstanding_) {
    if (!rec.lost && !rec.sacked && (!oldest || rec.sent_at < *oldest)) oldest = rec.sent_at;
  }
  if (!oldest) {
    sim_.cancel(loss_timer_);
    loss_timer_ = {};
    return;
  }
  const SimTime at = std::max(sim_.now(), *oldest + current_rto() + SimTime::from_ns(1));
  if (sim_.pending(loss_timer_) && loss_timer_at_ == at) return;
  sim_.cancel(loss_timer_);
  loss_timer_at_ = at;
  loss_timer_ = sim_.schedule(at, EventKind::LossTimer, [this] { on_loss_timer(); });
}

SimTime Sender::current_rto() const {
  return have_srtt_ ? std::max(config_.min_rto, srtt_ * 2) : SimTime::from_s(1);
}

void Sender::detect_loss_and_retransmit() {
  const SimTime now = sim_.now();
  const SimTime rto = current_rto();
  bool newly_lost = false;
  bool retransmit_lost = false;
  for (auto& [seq, rec] : outstanding_) {
    if (rec.lost || rec.sacked) continue;
    // The path never reorders, so a delivered burst that left later proves
    // this one is gone; otherwise fall back to the retransmission timeout.
    const bool overtaken = have_rack_ && rec.sent_at < rack_sent_at_;
    if (!overtaken && now - rec.sent_at <= rto) continue;
    rec.lost = true;
    inflight_ -= rec.size;
    lost_outstanding_ += rec.size;
    stats_.lost_bytes += rec.size;
    retransmit_queue_.push_back(seq);
    newly_lost = true;
    retransmit_lost = retransmit_lost || rec.retransmitted;
  }
  if (!newly_lost) return;
  std::sort(retransmit_queue_.begin(), retransmit_queue_.end());
  // A lost repair means the reduction was not enough: start a new episode,
  // at most once per round trip.
  const bool repeat = retransmit_lost && now - episode_start_ >= srtt_;
  if (!in_recovery_ || repeat) {
    in_recovery_ = true;
    episode_start_ = now;
    recovery_point_ = next_seq_;
    ++stats_.loss_episodes;
    cca_.on_loss(now);
    decision_ = cca_.current();
  }
  // Retransmissions go to the head of the pacing queue.
  if (decision_.pacing_rate_bps && next_send_due_ > now) next_send_due_ = now;
}

void Receiver::on_burst(const Burst& burst) {
  ++bursts_received_;
  if (record_arrivals_) arrival_ids_.push_back(burst.id);
  const std::uint64_t end = burst.seq_start + burst.size;
  if (end > rcv_nxt_) {
    if (burst.seq_start <= rcv_nxt_) {
      rcv_nxt_ = end;
    } else {
      auto& slot = out_of_order_[burst.seq_start];
      slot = std::max(slot, end);
    }
    for (auto it = out_of_order_.begin(); it != out_of_order_.end() && it->first <= rcv_nxt_;) {
      rcv_nxt_ = std::max(rcv_nxt_, it->second);
      it = out_of_order_.erase(it);
    }
  }
  link_.deliver_ack(Ack{rcv_nxt_, burst.seq_start, end});
}

}  // namespace bbrsim
