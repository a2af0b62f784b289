#include "bbrsim/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>

#include "bbrsim/cubic.hpp"
#include "bbrsim/sim_core.hpp"
#include "bbrsim/transport.hpp"

namespace bbrsim {

namespace {

SimTime ms_to_time(double ms) { return SimTime::from_ns(std::llround(ms * 1e6)); }

// Stream ids per repetition; one per randomness consumer.
constexpr std::uint64_t kStreamsPerRep = 8;
constexpr std::uint64_t kLossStream = 1;
constexpr std::uint64_t kPhaseStream = 2;

std::uint64_t stream_id(int rep, std::uint64_t consumer) {
  return static_cast<std::uint64_t>(rep) * kStreamsPerRep + consumer;
}

}  // namespace

std::string_view to_string(CcaKind kind) {
  switch (kind) {
    case CcaKind::Bbr1: return "bbr1";
    case CcaKind::Bbr3: return "bbr3";
    case CcaKind::Cubic: return "cubic";
  }
  return "?";
}

CcaKind parse_cca(std::string_view text) {
  if (text == "bbr1") return CcaKind::Bbr1;
  if (text == "bbr3") return CcaKind::Bbr3;
  if (text == "cubic") return CcaKind::Cubic;
  throw std::invalid_argument("cca: unknown algorithm '" + std::string(text) + "' (bbr1|bbr3|cubic)");
}

void BbrOverrides::apply(BbrParams& p) const {
  if (high_gain) {
    p.high_gain = *high_gain;
    p.drain_gain = 1.0 / *high_gain;
  }
  if (cwnd_gain) p.cwnd_gain_probe_bw = *cwnd_gain;
  if (probe_bw_gains) {
    p.probe_bw_gains = *probe_bw_gains;
    if (p.probe_bw_start_index >= static_cast<int>(p.probe_bw_gains.size())) p.probe_bw_start_index = 0;
  }
  if (probe_rtt_interval_ms) p.probe_rtt_interval = ms_to_time(*probe_rtt_interval_ms);
  if (probe_rtt_duration_ms) p.probe_rtt_duration = ms_to_time(*probe_rtt_duration_ms);
  if (bw_window_rounds) p.bw_window_rounds = *bw_window_rounds;
  if (rtprop_window_ms) p.rtprop_window = ms_to_time(*rtprop_window_ms);
  if (min_cwnd_mss) p.min_cwnd = *min_cwnd_mss * kMss;
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw std::invalid_argument(field + ": " + why);
  };
  if (!(bw_mbps > 0.0)) fail("bw", "must be > 0 Mbps");
  if (!(rtt_ms >= 0.0)) fail("rtt", "must be >= 0 ms");
  if (!(buffer_bdp > 0.0)) fail("buffer_bdp", "must be > 0");
  if (!(loss >= 0.0 && loss <= 1.0)) fail("loss", "must be in [0, 1]");
  if (!(share_pct > 0.0 && share_pct <= 100.0)) fail("share", "must be in (0, 100]");
  if (gated()) {
    if (!(slice_ms > 0.0)) fail("slice", "must be > 0 ms");
    if (slice().ns() <= 0) fail("slice", "rounds to zero nanoseconds");
    if (phase_ms && (*phase_ms < 0.0 || ms_to_time(*phase_ms) >= period())) {
      fail("phase", "must be in [0, period)");
    }
  }
  if (!(duration_s > 0.0)) fail("duration", "must be > 0 s");
  if (reps < 1) fail("reps", "must be >= 1");
  if (!(sample_ms > 0.0)) fail("sample_ms", "must be > 0 ms");
  if (tsq_limit < 1) fail("tsq_limit", "must be >= 1");
  if (!(cap_mbps > 0.0)) fail("cap", "must be > 0 Mbps");
  link().validate();
  if (cca != CcaKind::Cubic) {
    try {
      bbr_params().validate();
    } catch (const std::invalid_argument& e) {
      fail("bbr", e.what());
    }
  }
}

SimTime ExperimentConfig::slice() const { return ms_to_time(slice_ms); }

SimTime ExperimentConfig::period() const {
  return SimTime::from_ns(std::llround(static_cast<double>(slice().ns()) * 100.0 / share_pct));
}

SimTime ExperimentConfig::duration() const { return SimTime::from_ns(std::llround(duration_s * 1e9)); }
SimTime ExperimentConfig::sample_interval() const { return ms_to_time(sample_ms); }

LinkConfig ExperimentConfig::link() const {
  return LinkConfig::make(static_cast<std::uint64_t>(std::llround(bw_mbps * 1e6)), ms_to_time(rtt_ms),
                          buffer_bdp, loss);
}

BbrParams ExperimentConfig::bbr_params() const {
  BbrParams p = cca == CcaKind::Bbr1 ? BbrParams::v1(patch) : BbrParams::v3(patch);
  bbr.apply(p);
  return p;
}

std::string ExperimentConfig::key() const {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s_%s_bw%g_rtt%g_slice%g_share%g_buf%g_loss%g",
                std::string(to_string(cca)).c_str(), patch ? "patch" : "orig", bw_mbps, rtt_ms,
                slice_ms, share_pct, buffer_bdp, loss);
  return buf;
}

SimTime draw_phase(const ExperimentConfig& cfg, int rep) {
  if (!cfg.gated()) return SimTime{};
  if (cfg.phase_ms) return ms_to_time(*cfg.phase_ms);
  RngStream rng(cfg.seed, stream_id(rep, kPhaseStream));
  return SimTime::from_ns(static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(cfg.period().ns()))));
}

RunResult run_single(const ExperimentConfig& cfg, int rep, RunOptions options) {
  cfg.validate();
  RunResult result;
  result.rep = rep;

  Simulator sim;
  const LinkConfig link_cfg = cfg.link();
  BottleneckLink link(sim, link_cfg, RngStream(cfg.seed, stream_id(rep, kLossStream)));
  Receiver receiver(link);

  std::optional<CpuSchedule> gate;
  if (cfg.gated()) {
    result.phase = draw_phase(cfg, rep);
    gate = CpuSchedule{cfg.slice(), cfg.period(), result.phase};
  }

  std::unique_ptr<CongestionControl> cca;
  Bbr* bbr = nullptr;
  if (cfg.cca == CcaKind::Cubic) {
    cca = std::make_unique<Cubic>();
  } else {
    auto owned = std::make_unique<Bbr>(cfg.bbr_params());
    bbr = owned.get();
    bbr->set_phase_hook([&](CcaPhase from, CcaPhase to, SimTime now) {
      if (from == CcaPhase::Startup && to == CcaPhase::Drain && !result.startup_exit_s) {
        result.startup_exit_s = now.seconds();
        result.btlbw_at_startup_exit_mbps = to_mbps(bbr->btlbw());
      }
    });
    cca = std::move(owned);
  }

  SenderConfig sender_cfg;
  sender_cfg.tsq_limit = cfg.tsq_limit;
  sender_cfg.handshake_rtt = min_rtt_of(link_cfg, 0);
  Sender sender(sim, link, *cca, sender_cfg, gate);
  link.set_receiver([&](const Burst& b) { receiver.on_burst(b); });
  link.set_sender([&](const Ack& ack) { sender.on_ack_arrival(ack); });

  const SimTime end = cfg.duration();
  sim.schedule(end, EventKind::RunEnd, [&] {
    sender.stop();
    result.goodput_bytes = receiver.goodput_bytes();
  });

  if (options.keep_series) {
    const SimTime step = cfg.sample_interval();
    const std::int64_t count = end / step;
    result.series.reserve(static_cast<std::size_t>(count));
    auto last_bytes = std::make_shared<std::uint64_t>(0);
    const std::uint64_t link_bdp = link_cfg.bdp_bytes();
    for (std::int64_t k = 1; k <= count; ++k) {
      sim.schedule(step * k, EventKind::MetricSample, [&, step, last_bytes, link_bdp] {
        SeriesSample s;
        s.t_s = sim.now().seconds();
        const std::uint64_t bytes = receiver.goodput_bytes();
        s.goodput_mbps = to_mbps(rate_of(bytes - *last_bytes, step));
        *last_bytes = bytes;
        s.pacing_mbps = to_mbps(sender.pacing_rate().value_or(0));
        s.delivery_mbps = to_mbps(sender.last_sample().delivery_rate_bps);
        s.inflight_bytes = sender.inflight();
        s.cwnd = sender.cwnd();
        s.cwnd_limited = sender.cwnd_limited();
        s.retx = sender.stats().retransmits;
        const CcaTelemetry tel = cca->telemetry();
        s.btlbw_mbps = to_mbps(tel.btlbw_bps);
        s.rtprop_ms = tel.rtprop.millis();
        s.pacing_gain = tel.pacing_gain;
        s.cwnd_gain = tel.cwnd_gain;
        s.phase = tel.phase;
        s.cycle_index = tel.cycle_index;
        s.deficit = tel.deficit_active;
        const std::uint64_t bdp = bbr ? tel.est_bdp : link_bdp;
        s.inflight_bdp = bdp > 0 ? static_cast<double>(s.inflight_bytes) / static_cast<double>(bdp) : 0.0;
        result.series.push_back(s);
      });
    }
  }

  sender.start();
  sim.run_until(end);

  result.avg_goodput_mbps = static_cast<double>(result.goodput_bytes) * 8.0 / cfg.duration_s * 1e-6;
  result.retransmits = sender.stats().retransmits;
  result.loss_episodes = sender.stats().loss_episodes;
  result.events = sim.processed_count();
  result.link = link.stats();
  return result;
}

std::string_view to_string(RunClass c) {
  switch (c) {
    case RunClass::StrictlyCpuLimited: return "strictly_cpu_limited";
    case RunClass::Recovering: return "recovering";
    case RunClass::NonLimited: return "non_limited";
  }
  return "?";
}

RunClass classify(double goodput_mbps, double bw_mbps, double cap_mbps) {
  if (goodput_mbps >= 0.8 * bw_mbps) return RunClass::NonLimited;
  if (goodput_mbps <= cap_mbps) return RunClass::StrictlyCpuLimited;
  return RunClass::Recovering;
}

RunClass classify_run(const RunResult& result, const ExperimentConfig& cfg) {
  return classify(result.avg_goodput_mbps, cfg.bw_mbps, cfg.cap_mbps);
}

}  // namespace bbrsim
