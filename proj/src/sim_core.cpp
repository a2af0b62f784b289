#include "bbrsim/sim_core.hpp"

#include <string>

namespace bbrsim {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::PacingTimerDue: return "PacingTimerDue";
    case EventKind::LinkDequeue: return "LinkDequeue";
    case EventKind::PacketArrival: return "PacketArrival";
    case EventKind::AckArrival: return "AckArrival";
    case EventKind::CpuResume: return "CpuResume";
    case EventKind::LossTimer: return "LossTimer";
    case EventKind::MetricSample: return "MetricSample";
    case EventKind::RunEnd: return "RunEnd";
  }
  return "?";
}

EventHandle Simulator::schedule(SimTime fire_at, EventKind kind, Action action) {
  if (fire_at < now_) {
    throw ContractViolation("schedule(" + std::string(to_string(kind)) + ") at " +
                            std::to_string(fire_at.ns()) + "ns is before now=" +
                            std::to_string(now_.ns()) + "ns");
  }
  const std::uint64_t seq = next_seq_++;
  queue_.push(Entry{fire_at, seq, kind});
  actions_.emplace(seq, std::move(action));
  return EventHandle{seq};
}

bool Simulator::cancel(EventHandle handle) {
  return handle.valid() && actions_.erase(handle.seq) > 0;
}

void Simulator::run_until(SimTime end) {
  if (end < now_) {
    throw ContractViolation("run_until target is before now");
  }
  while (!queue_.empty() && queue_.top().fire_at <= end) {
    const Entry top = queue_.top();
    queue_.pop();
    auto it = actions_.find(top.seq);
    if (it == actions_.end()) continue;  // cancelled
    Action action = std::move(it->second);
    actions_.erase(it);
    now_ = top.fire_at;
    ++processed_;
    if (observer_) observer_(now_, top.kind, top.seq);
    action();
  }
  now_ = end;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : engine_(splitmix64(splitmix64(seed) ^ splitmix64(stream_id + 0x5851f42d4c957f2dULL))) {}

std::uint64_t RngStream::below(std::uint64_t bound) {
  // Rejection sampling keeps the result unbiased and platform independent.
  const std::uint64_t limit = bound * (~std::uint64_t{0} / bound);
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % bound;
}

}  // namespace bbrsim
