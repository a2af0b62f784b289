#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bbrsim/bbr.hpp"
#include "bbrsim/cca.hpp"
#include "bbrsim/cpu_gate.hpp"
#include "bbrsim/link.hpp"

namespace bbrsim {

enum class CcaKind : std::uint8_t { Bbr1, Bbr3, Cubic };

std::string_view to_string(CcaKind kind);
CcaKind parse_cca(std::string_view text);

// Optional overrides for every tunable BBR parameter.
struct BbrOverrides {
  std::optional<double> high_gain;
  std::optional<double> cwnd_gain;
  std::optional<std::vector<double>> probe_bw_gains;
  std::optional<double> probe_rtt_interval_ms;
  std::optional<double> probe_rtt_duration_ms;
  std::optional<std::int64_t> bw_window_rounds;
  std::optional<double> rtprop_window_ms;
  std::optional<std::uint64_t> min_cwnd_mss;

  void apply(BbrParams& params) const;
};

struct ExperimentConfig {
  CcaKind cca = CcaKind::Bbr3;
  bool patch = false;
  double bw_mbps = 100.0;
  double rtt_ms = 10.0;  // split evenly per direction
  double buffer_bdp = 1.0;
  double loss = 0.0;
  double slice_ms = 10.0;
  double share_pct = 100.0;  // 100 disables the CPU gate
  std::optional<double> phase_ms;
  double duration_s = 20.0;
  int reps = 30;
  std::uint64_t seed = 1;
  double sample_ms = 100.0;
  std::uint32_t tsq_limit = 2;
  double cap_mbps = 20.0;  // strictly-CPU-limited threshold
  BbrOverrides bbr;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;

  bool gated() const { return share_pct < 100.0; }
  SimTime slice() const;
  // slice / share, rounded to the nearest nanosecond.
  SimTime period() const;
  SimTime duration() const;
  SimTime sample_interval() const;
  LinkConfig link() const;
  BbrParams bbr_params() const;

  // Human-readable identity used in diagnostics and file names.
  std::string key() const;
};

struct SeriesSample {
  double t_s = 0.0;
  double goodput_mbps = 0.0;
  double pacing_mbps = 0.0;
  double delivery_mbps = 0.0;
  double btlbw_mbps = 0.0;
  double rtprop_ms = 0.0;
  std::uint64_t inflight_bytes = 0;
  double inflight_bdp = 0.0;
  double pacing_gain = 0.0;
  double cwnd_gain = 0.0;
  CcaPhase phase = CcaPhase::Fixed;
  int cycle_index = -1;
  bool deficit = false;
  bool cwnd_limited = false;
  std::uint64_t retx = 0;  // cumulative retransmitted bursts
  std::uint64_t cwnd = 0;
};

struct RunResult {
  int rep = 0;
  SimTime phase;
  double avg_goodput_mbps = 0.0;
  std::uint64_t goodput_bytes = 0;
  std::optional<double> startup_exit_s;
  double btlbw_at_startup_exit_mbps = 0.0;
  std::uint64_t retransmits = 0;
  std::uint64_t loss_episodes = 0;
  std::uint64_t events = 0;
  LinkStats link;
  std::vector<SeriesSample> series;
};

struct RunOptions {
  bool keep_series = true;
};

// One repetition of a bulk transfer; deterministic in (cfg, rep).
RunResult run_single(const ExperimentConfig& cfg, int rep, RunOptions options = {});

// Start-of-window offset for repetition `rep`: the explicit phase when one is
// configured, otherwise uniform in [0, period) from the repetition's stream.
SimTime draw_phase(const ExperimentConfig& cfg, int rep);

enum class RunClass : std::uint8_t { StrictlyCpuLimited, Recovering, NonLimited };

std::string_view to_string(RunClass c);
RunClass classify(double goodput_mbps, double bw_mbps, double cap_mbps = 20.0);
RunClass classify_run(const RunResult& result, const ExperimentConfig& cfg);

}  // namespace bbrsim
