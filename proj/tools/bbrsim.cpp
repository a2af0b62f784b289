// Command-line front end: single configurations or whole sweep grids.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bbrsim/export.hpp"
#include "bbrsim/sweep.hpp"

namespace {

bool parse_on_off(const std::string& v) {
  if (v == "on") return true;
  if (v == "off") return false;
  throw std::invalid_argument("patch: expected on|off, got '" + v + "'");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace bbrsim;

  CLI::App app{"Discrete-event simulator for congestion control under CPU time-slicing"};
  ExperimentConfig cfg;
  std::string cca = "bbr3";
  std::string patch = "off";
  std::string out_path;
  std::string series_path;
  std::string runs_path;
  std::string sweep_path;
  std::string format = "csv";
  int threads = 0;
  bool serial = false;
  double phase_ms = -1.0;

  app.add_option("--cca", cca, "bbr1|bbr3|cubic")->check(CLI::IsMember({"bbr1", "bbr3", "cubic"}));
  app.add_option("--patch", patch, "inflight-deficit patch on|off")->check(CLI::IsMember({"on", "off"}));
  app.add_option("--bw", cfg.bw_mbps, "bottleneck bandwidth [Mbps]");
  app.add_option("--rtt", cfg.rtt_ms, "round-trip propagation delay [ms]");
  app.add_option("--buffer-bdp", cfg.buffer_bdp, "bottleneck buffer in BDP multiples");
  app.add_option("--loss", cfg.loss, "random loss probability per burst");
  app.add_option("--slice-ms", cfg.slice_ms, "CPU timeslice [ms]");
  app.add_option("--share", cfg.share_pct, "CPU share [%], 100 disables the gate");
  app.add_option("--duration", cfg.duration_s, "run length [s]");
  app.add_option("--reps", cfg.reps, "repetitions per cell");
  app.add_option("--seed", cfg.seed, "master seed");
  app.add_option("--sample-ms", cfg.sample_ms, "time-series sampling interval [ms]");
  app.add_option("--out", out_path, "aggregate output file (stdout when omitted)");
  app.add_option("--series-out", series_path, "per-run time series CSV");
  app.add_option("--runs-out", runs_path, "per-run averages CSV");
  app.add_option("--sweep", sweep_path, "sweep grid file")->check(CLI::ExistingFile);
  app.add_option("--format", format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--threads", threads, "worker threads for sweeps (0: default)");
  app.add_flag("--serial", serial, "run the serial reference executor");
  app.add_option("--tsq-limit", cfg.tsq_limit, "bursts released per resume");
  app.add_option("--cap-mbps", cfg.cap_mbps, "strictly-CPU-limited threshold [Mbps]");
  app.add_option("--phase-ms", phase_ms, "fixed gate phase [ms] instead of a random draw");

  auto* bbr = app.add_option_group("BBR overrides");
  double high_gain = 0, cwnd_gain = 0, probe_rtt_interval = 0, probe_rtt_duration = 0, rtprop_window = 0;
  std::int64_t bw_window = 0;
  std::uint64_t min_cwnd = 0;
  std::vector<double> gains;
  bbr->add_option("--high-gain", high_gain, "Startup and deficit pacing gain");
  bbr->add_option("--cwnd-gain", cwnd_gain, "ProbeBW cwnd gain");
  bbr->add_option("--probe-bw-gains", gains, "ProbeBW pacing gain cycle")->delimiter(',');
  bbr->add_option("--probe-rtt-interval-ms", probe_rtt_interval, "ProbeRTT interval [ms]");
  bbr->add_option("--probe-rtt-duration-ms", probe_rtt_duration, "ProbeRTT hold time [ms]");
  bbr->add_option("--bw-window-rounds", bw_window, "bandwidth filter window [rounds]");
  bbr->add_option("--rtprop-window-ms", rtprop_window, "RTprop filter window [ms]");
  bbr->add_option("--min-cwnd-mss", min_cwnd, "minimum cwnd [MSS]");

  CLI11_PARSE(app, argc, argv);

  try {
    cfg.cca = parse_cca(cca);
    cfg.patch = parse_on_off(patch);
    if (phase_ms >= 0.0) cfg.phase_ms = phase_ms;
    if (app.count("--high-gain")) cfg.bbr.high_gain = high_gain;
    if (app.count("--cwnd-gain")) cfg.bbr.cwnd_gain = cwnd_gain;
    if (!gains.empty()) cfg.bbr.probe_bw_gains = gains;
    if (app.count("--probe-rtt-interval-ms")) cfg.bbr.probe_rtt_interval_ms = probe_rtt_interval;
    if (app.count("--probe-rtt-duration-ms")) cfg.bbr.probe_rtt_duration_ms = probe_rtt_duration;
    if (app.count("--bw-window-rounds")) cfg.bbr.bw_window_rounds = bw_window;
    if (app.count("--rtprop-window-ms")) cfg.bbr.rtprop_window_ms = rtprop_window;
    if (app.count("--min-cwnd-mss")) cfg.bbr.min_cwnd_mss = min_cwnd;

    std::vector<ExperimentConfig> cells;
    if (!sweep_path.empty()) {
      SweepGrid grid = parse_sweep_file(sweep_path);
      // Command-line scalars apply unless the file sets them.
      grid.base.bbr = cfg.bbr;
      grid.base.tsq_limit = app.count("--tsq-limit") ? cfg.tsq_limit : grid.base.tsq_limit;
      grid.base.cap_mbps = app.count("--cap-mbps") ? cfg.cap_mbps : grid.base.cap_mbps;
      cells = grid.expand();
    } else {
      cells.push_back(cfg);
    }
    for (const auto& c : cells) c.validate();

    SweepOptions opts;
    opts.keep_series = !series_path.empty();
    opts.threads = threads;
    const auto results = serial ? run_sweep_serial(cells, opts) : run_sweep_parallel(cells, opts);

    const ExportFormat fmt = parse_format(format);
    if (out_path.empty()) {
      if (fmt == ExportFormat::Csv) {
        write_aggregate_csv(std::cout, results);
      } else {
        write_json(std::cout, results, false);
      }
    } else {
      export_results(results, fmt, out_path);
    }
    if (!series_path.empty()) export_series(results, series_path);
    if (!runs_path.empty()) {
      std::ofstream runs(runs_path);
      if (!runs) throw ExportError("cannot write '" + runs_path + "'");
      write_runs_csv(runs, results);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "bbrsim: error: %s\n", e.what());
    return 1;
  }
  return 0;
}
