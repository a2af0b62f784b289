#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bbrsim/experiment.hpp"

namespace bbrsim {

// Axes of a cartesian experiment grid; scalar settings apply to every cell.
struct SweepGrid {
  std::vector<CcaKind> cca = {CcaKind::Bbr3};
  std::vector<bool> patch = {false};
  std::vector<double> bw_mbps = {100.0};
  std::vector<double> rtt_ms = {10.0};
  std::vector<double> buffer_bdp = {1.0};
  std::vector<double> loss = {0.0};
  std::vector<double> slice_ms = {10.0};
  std::vector<double> share_pct = {100.0};
  ExperimentConfig base;  // reps, duration, seed, sample interval, tsq, overrides

  // Row-major over the axes in declaration order (cca outermost).
  std::vector<ExperimentConfig> expand() const;
};

// Parses the flat sweep file format: one `key = v1, v2, ...` per line, `#`
// starts a comment. Axis keys: cca patch bw rtt buffer_bdp loss slice share.
// Scalar keys: reps duration seed sample_ms tsq_limit cap phase.
SweepGrid parse_sweep_text(std::string_view text);
SweepGrid parse_sweep_file(const std::string& path);

// Share axis of the measurement grid: 10..70 in steps of 5, plus 100.
std::vector<double> default_share_grid();

struct AggregateRow {
  ExperimentConfig cfg;
  int n = 0;
  double median_mbps = 0.0;
  double stddev_mbps = 0.0;
  double p10 = 0.0;
  double p90 = 0.0;
  RunClass cls = RunClass::NonLimited;
};

struct CellResult {
  ExperimentConfig cfg;
  std::vector<RunResult> runs;  // indexed by repetition
  AggregateRow row;
};

// Median of per-run averages (mean of the middle pair for even n), sample
// standard deviation and linearly interpolated 10th/90th percentiles.
AggregateRow aggregate(const ExperimentConfig& cfg, const std::vector<double>& goodputs);

double median(std::vector<double> values);
double sample_stddev(const std::vector<double>& values);
double percentile(std::vector<double> values, double q);

class SweepError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SweepOptions {
  bool keep_series = false;
  int threads = 0;  // 0: OpenMP default
};

// Reference executor: every (cell, rep) run in order on the calling thread.
std::vector<CellResult> run_sweep_serial(const std::vector<ExperimentConfig>& cells,
                                         SweepOptions options = {});

// OpenMP executor over the flattened (cell, rep) job list. Results are stored
// by index, so output is identical to the serial executor.
std::vector<CellResult> run_sweep_parallel(const std::vector<ExperimentConfig>& cells,
                                           SweepOptions options = {});

bool parallel_available();

}  // namespace bbrsim
