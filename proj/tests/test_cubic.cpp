#include <gtest/gtest.h>

#include <cmath>

#include "bbrsim/cubic.hpp"
#include "bbrsim/experiment.hpp"
#include "sim_rig.hpp"

using namespace bbrsim;
using namespace bbrsim::literals;
using bbrsim::testing::Rig;

namespace {

RateSample acked(std::uint64_t bytes) {
  RateSample rs;
  rs.newly_acked = bytes;
  rs.rtt = 10_ms;
  rs.rtt_valid = true;
  return rs;
}

}  // namespace

TEST(Cubic, SlowStartDoublesPerRound) {
  Cubic c;
  EXPECT_EQ(c.cwnd(), 10 * kMss);
  EXPECT_TRUE(c.in_slow_start());
  for (int i = 0; i < 10; ++i) c.on_ack(acked(kMss), SimTime::from_ms(i));
  EXPECT_EQ(c.cwnd(), 20 * kMss);
  EXPECT_FALSE(c.current().pacing_rate_bps.has_value());
}

TEST(Cubic, LossResponse) {
  Cubic c;
  for (int i = 0; i < 90; ++i) c.on_ack(acked(kMss), SimTime::from_ms(i));
  ASSERT_EQ(c.cwnd(), 100 * kMss);
  c.on_loss(1_s);
  EXPECT_EQ(c.cwnd(), 70 * kMss);
  EXPECT_DOUBLE_EQ(c.w_max_mss(), 100.0);
  EXPECT_EQ(*c.ssthresh(), 70 * kMss);
  EXPECT_NEAR(c.k_seconds(), std::cbrt(100.0 * 0.3 / 0.4), 1e-12);
  EXPECT_NEAR(c.k_seconds(), 4.217, 1e-3);
  EXPECT_FALSE(c.epoch_start().has_value());
  EXPECT_FALSE(c.in_slow_start());
}

TEST(Cubic, InflectionAtK) {
  Cubic c;
  for (int i = 0; i < 90; ++i) c.on_ack(acked(kMss), SimTime::from_ms(i));
  c.on_loss(1_s);
  c.on_ack(acked(kMss), 1_s);  // opens the epoch
  ASSERT_EQ(*c.epoch_start(), 1_s);
  EXPECT_NEAR(static_cast<double>(c.cwnd()), 70.0 * kMss, 1.0);
  const auto k = SimTime::from_ns(static_cast<std::int64_t>(std::llround(c.k_seconds() * 1e9)));
  c.on_ack(acked(kMss), 1_s + k);
  EXPECT_NEAR(static_cast<double>(c.cwnd()), 100.0 * kMss, 1.0);
  // Past K the window grows convexly beyond W_max.
  c.on_ack(acked(kMss), 1_s + k + 2_s);
  EXPECT_NEAR(static_cast<double>(c.cwnd()), (100.0 + 0.4 * 8.0) * kMss, 1.0);
}

TEST(Cubic, HoldsWindowDuringRecovery) {
  Cubic c;
  c.on_loss(SimTime{});
  const auto w = c.cwnd();
  auto rs = acked(kMss);
  rs.in_recovery = true;
  c.on_ack(rs, 5_s);
  EXPECT_EQ(c.cwnd(), w);
  EXPECT_FALSE(c.epoch_start().has_value());
}

TEST(Cubic, FloorIsTwoSegments) {
  Cubic c;
  for (int i = 0; i < 20; ++i) c.on_loss(SimTime{});
  EXPECT_EQ(c.cwnd(), 2 * kMss);
}

TEST(Cubic, TwoDropsInOneRoundCutOnce) {
  const auto link = LinkConfig::make(100'000'000, 10_ms, 4.0);
  SenderConfig scfg;
  scfg.handshake_rtt = min_rtt_of(link, 0);
  Rig rig(link, std::make_unique<Cubic>(), scfg);
  rig.drop_ids = {30, 32};
  rig.sender->start();
  rig.sim.run_until(300_ms);
  EXPECT_EQ(rig.sender->stats().loss_episodes, 1u);
  EXPECT_EQ(rig.sender->stats().retransmits, 2u);
}

// Between losses the window follows C (t - K)^3 + W_max with W_max and the
// epoch taken from the trace itself.
TEST(CubicInvariants, WindowLawBetweenLosses) {
  for (const auto& gate : {std::optional<CpuSchedule>{}, std::optional{CpuSchedule{1_ms, 2_ms, SimTime{}}}}) {
    const auto link = LinkConfig::make(10'000'000, 10_ms);
    SenderConfig scfg;
    scfg.handshake_rtt = min_rtt_of(link, 0);
    Rig rig(link, std::make_unique<Cubic>(), scfg, gate, false);
    rig.sender->enable_trace(false);
    auto& cubic = static_cast<Cubic&>(*rig.cca);

    std::uint64_t episodes = 0;
    std::uint64_t last_cwnd = cubic.cwnd();
    std::optional<double> w_max;
    std::optional<SimTime> epoch;
    std::size_t checked = 0;
    auto note_loss = [&] {
      if (rig.sender->stats().loss_episodes == episodes) return;
      episodes = rig.sender->stats().loss_episodes;
      w_max = static_cast<double>(last_cwnd) / kMss;
      epoch.reset();
    };
    rig.sim.set_observer([&](SimTime, EventKind, std::uint64_t) {
      note_loss();
      last_cwnd = cubic.cwnd();
    });
    rig.on_sample = [&](const RateSample& rs, SimTime t) {
      note_loss();
      last_cwnd = cubic.cwnd();
      if (!w_max || rs.in_recovery || cubic.in_slow_start()) return;
      if (!epoch) epoch = t;
      const double k = std::cbrt(*w_max * 0.3 / 0.4);
      const double dt = (t - *epoch).seconds() - k;
      const double law = std::max(0.4 * dt * dt * dt + *w_max, 2.0) * kMss;
      ASSERT_NEAR(static_cast<double>(cubic.cwnd()), law, static_cast<double>(kMss)) << "t=" << t.ns();
      ++checked;
    };
    rig.sender->start();
    rig.sim.run_until(20_s);
    EXPECT_GT(episodes, 2u);
    EXPECT_GT(checked, 1000u);
  }
}

// Cubic never idles on-CPU with window to spare: once every event at an
// on-CPU instant has run, the window is exhausted or repairs are pending.
TEST(CubicInvariants, UnpacedSenderFillsTheWindowWhenOnCpu) {
  const CpuSchedule gate{1_ms, SimTime::from_ns(3'333'333), SimTime::from_us(250)};
  const auto link = LinkConfig::make(100'000'000, 10_ms);
  SenderConfig scfg;
  scfg.handshake_rtt = min_rtt_of(link, 0);
  Rig rig(link, std::make_unique<Cubic>(), scfg, gate, false);
  SimTime prev{};
  bool have_prev = false;
  std::size_t checked = 0;
  // Called before each event, so the sender state here is what every event
  // at `prev` left behind.
  rig.sim.set_observer([&](SimTime t, EventKind, std::uint64_t) {
    if (have_prev && t > prev && is_on_cpu(prev, gate)) {
      const auto& s = *rig.sender;
      ASSERT_TRUE(s.lost_outstanding() > 0 || s.inflight() + kMss > s.cwnd()) << "idle with room at " << prev.ns();
      ++checked;
    }
    have_prev = true;
    prev = t;
  });
  rig.sender->start();
  rig.sim.run_until(5_s);
  EXPECT_GT(checked, 1000u);
  // Bursts within one window leave back to back.
  const auto sends = rig.send_times();
  std::size_t same_instant = 0;
  for (std::size_t i = 1; i < sends.size(); ++i) same_instant += sends[i] == sends[i - 1];
  EXPECT_GT(same_instant, sends.size() / 4);
}

TEST(CubicInvariants, LosslessHundredMegReachesLinkRate) {
  ExperimentConfig cfg;
  cfg.cca = CcaKind::Cubic;
  cfg.bw_mbps = 100;
  cfg.rtt_ms = 10;
  cfg.duration_s = 20;
  const auto r = run_single(cfg, 0, RunOptions{false});
  EXPECT_GE(r.avg_goodput_mbps, 90.0);
  EXPECT_GT(r.loss_episodes, 0u);  // growth ends at the buffer
}
