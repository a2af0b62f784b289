#include <gtest/gtest.h>

#include <stdexcept>
#include <vector>

#include "bbrsim/link.hpp"

using namespace bbrsim;
using namespace bbrsim::literals;

namespace {

struct Arrival {
  Burst burst;
  SimTime at;
};

struct Harness {
  Simulator sim;
  BottleneckLink link;
  std::vector<Arrival> arrivals;
  std::vector<std::pair<Ack, SimTime>> acks;

  explicit Harness(LinkConfig cfg, std::uint64_t seed = 1)
      : link(sim, cfg, RngStream(seed, 1)) {
    link.set_receiver([this](const Burst& b) { arrivals.push_back({b, sim.now()}); });
    link.set_sender([this](const Ack& a) { acks.push_back({a, sim.now()}); });
  }
};

LinkConfig hundred_meg() { return LinkConfig::make(100'000'000, 10_ms); }

}  // namespace

TEST(LinkConfig, DefaultBufferIsOneBdp) {
  const auto c = hundred_meg();
  EXPECT_EQ(c.bdp_bytes(), 125'000u);
  EXPECT_EQ(c.buffer_limit, 125'000u);
  EXPECT_EQ(c.one_way_delay, 5_ms);
  EXPECT_EQ(LinkConfig::make(100'000'000, 10_ms, 2.0).buffer_limit, 250'000u);
  EXPECT_EQ(LinkConfig::make(1'000'000'000, 40_ms).buffer_limit, 5'000'000u);
}

TEST(LinkConfig, Validation) {
  auto c = hundred_meg();
  c.bandwidth_bps = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = hundred_meg();
  c.buffer_limit = kMss - 1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = hundred_meg();
  c.loss_rate = 1.5;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(MinRtt, Examples) {
  const auto c = hundred_meg();
  EXPECT_EQ(min_rtt_of(c, 12'500), 11_ms);
  EXPECT_EQ(min_rtt_of(c, 0), 10_ms);
  const auto fast = LinkConfig::make(1'000'000'000, 10_ms);
  const auto half = LinkConfig::make(500'000'000, 10_ms);
  EXPECT_EQ((min_rtt_of(half, 125'000) - 10_ms), (min_rtt_of(fast, 125'000) - 10_ms) * 2);
}

TEST(Link, SerializationPlusPropagation) {
  Harness h(hundred_meg());
  h.sim.schedule(2_ms, EventKind::PacingTimerDue, [&] {
    EXPECT_EQ(h.link.enqueue(Burst{0, 12'500, 1, false}), EnqueueResult::Accepted);
  });
  h.sim.run_until(20_ms);
  ASSERT_EQ(h.arrivals.size(), 1u);
  EXPECT_EQ(h.arrivals[0].at, 2_ms + 1_ms + 5_ms);
}

TEST(Link, FullBufferDrops) {
  auto c = hundred_meg();
  c.buffer_limit = 3 * kMss;
  Harness h(c);
  // First burst goes straight into service; the next three fill the buffer.
  for (std::uint64_t i = 0; i < 4; ++i) {
    EXPECT_EQ(h.link.enqueue(Burst{i * kMss, kMss, i + 1, false}), EnqueueResult::Accepted);
  }
  EXPECT_EQ(h.link.occupied(), c.buffer_limit);
  EXPECT_EQ(h.link.enqueue(Burst{4 * kMss, kMss, 5, false}), EnqueueResult::Dropped);
  EXPECT_EQ(h.link.stats().dropped_bursts, 1u);
}

TEST(Link, TotalLossDropsEverything) {
  auto c = hundred_meg();
  c.loss_rate = 1.0;
  Harness h(c);
  for (std::uint64_t i = 0; i < 20; ++i) {
    EXPECT_EQ(h.link.enqueue(Burst{i * kMss, kMss, i + 1, false}), EnqueueResult::Dropped);
  }
  h.sim.run_until(1_s);
  EXPECT_TRUE(h.arrivals.empty());
}

TEST(Link, AckPathIsDelayFifoAndLossless) {
  Harness h(hundred_meg());
  h.sim.schedule(10_ms, EventKind::MetricSample, [&] {
    h.link.deliver_ack(Ack{1500, 0, 1500});
    h.link.deliver_ack(Ack{3000, 1500, 3000});
  });
  h.sim.run_until(50_ms);
  ASSERT_EQ(h.acks.size(), 2u);
  EXPECT_EQ(h.acks[0].second, 15_ms);
  EXPECT_EQ(h.acks[0].first.cum_ack, 1500u);
  EXPECT_EQ(h.acks[1].first.cum_ack, 3000u);
}

TEST(Link, ZeroDelayAckRunsAfterSameTimeEvents) {
  auto c = hundred_meg();
  c.one_way_delay = SimTime{};
  Harness h(c);
  std::vector<int> order;
  h.link.set_sender([&](const Ack&) { order.push_back(2); });
  h.sim.schedule(1_ms, EventKind::MetricSample, [&] { h.link.deliver_ack(Ack{1, 0, 1}); });
  h.sim.schedule(1_ms, EventKind::PacingTimerDue, [&] { order.push_back(1); });
  h.sim.run_until(2_ms);
  EXPECT_EQ(h.sim.now(), 2_ms);
  EXPECT_EQ(order, (std::vector<int>{1, 2}));
}

// Randomized traffic: conservation, FIFO, latency floor, throughput ceiling.
TEST(Link, RandomTrafficProperties) {
  auto c = LinkConfig::make(50'000'000, 20_ms, 0.5, 0.02);
  Harness h(c, 17);
  RngStream rng(3, 5);
  struct Sent {
    SimTime at;
    bool accepted;
  };
  std::vector<Sent> sent;
  std::vector<std::uint64_t> accepted_ids;
  std::uint64_t max_burst = 0;
  SimTime t{};
  for (std::uint64_t id = 1; id <= 3000; ++id) {
    t += SimTime::from_us(static_cast<std::int64_t>(rng.below(900)));
    const std::uint64_t size = kMss * (1 + rng.below(20));
    max_burst = std::max(max_burst, size);
    h.sim.schedule(t, EventKind::PacingTimerDue, [&h, &sent, &accepted_ids, id, size] {
      const bool ok = h.link.enqueue(Burst{0, size, id, false}) == EnqueueResult::Accepted;
      sent.push_back({h.sim.now(), ok});
      if (ok) accepted_ids.push_back(id);
      EXPECT_LE(h.link.occupied(), h.link.config().buffer_limit);
    });
  }
  h.sim.run_until(t + 10_s);

  const auto& st = h.link.stats();
  EXPECT_EQ(st.delivered_bytes + st.dropped_bytes, st.enqueued_bytes);
  EXPECT_GT(st.dropped_bursts, 0u);
  ASSERT_EQ(h.arrivals.size(), accepted_ids.size());
  for (std::size_t i = 0; i < accepted_ids.size(); ++i) {
    ASSERT_EQ(h.arrivals[i].burst.id, accepted_ids[i]);
    const SimTime enq = sent[accepted_ids[i] - 1].at;
    const SimTime ser = transmit_time(h.arrivals[i].burst.size, c.bandwidth_bps);
    ASSERT_GE(h.arrivals[i].at - enq - c.one_way_delay, ser);
  }
  // Sliding windows over arrivals respect bandwidth x W plus one burst.
  const SimTime w = 5_ms;
  std::size_t lo = 0;
  std::uint64_t in_window = 0;
  for (std::size_t hi = 0; hi < h.arrivals.size(); ++hi) {
    in_window += h.arrivals[hi].burst.size;
    while (h.arrivals[hi].at - h.arrivals[lo].at > w) in_window -= h.arrivals[lo++].burst.size;
    ASSERT_LE(in_window, bytes_in(c.bandwidth_bps, w) + max_burst);
  }
}

TEST(Link, LatencyEqualsSerializationWhenIdle) {
  Harness h(hundred_meg());
  for (int i = 0; i < 5; ++i) {
    h.sim.schedule(20_ms * i, EventKind::PacingTimerDue, [&h, i] {
      h.link.enqueue(Burst{0, 3000, static_cast<std::uint64_t>(i + 1), false});
    });
  }
  h.sim.run_until(200_ms);
  ASSERT_EQ(h.arrivals.size(), 5u);
  for (int i = 0; i < 5; ++i) {
    EXPECT_EQ(h.arrivals[i].at - 20_ms * i, 5_ms + transmit_time(3000, 100'000'000));
  }
}

// A greedy source that keeps the buffer non-empty saturates the link within one RTT.
TEST(Link, GreedySourceSaturates) {
  const auto c = hundred_meg();
  Harness h(c);
  std::uint64_t id = 0;
  std::function<void()> pump = [&] {
    while (h.link.occupied() + kMss <= c.buffer_limit) h.link.enqueue(Burst{0, kMss, ++id, false});
    h.sim.schedule_in(100_us, EventKind::PacingTimerDue, pump);
  };
  h.sim.schedule(SimTime{}, EventKind::PacingTimerDue, pump);
  h.sim.run_until(200_ms);
  std::uint64_t bytes = 0;
  for (const auto& a : h.arrivals) bytes += (a.at >= 10_ms && a.at < 200_ms) ? a.burst.size : 0;
  const double rate = bytes * 8.0 / 0.19;
  EXPECT_GE(rate, 0.99 * c.bandwidth_bps);
}
