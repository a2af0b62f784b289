#pragma once

#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bbrsim/experiment.hpp"
#include "bbrsim/sweep.hpp"

namespace bbrsim {

inline constexpr std::string_view kAggregateHeader =
    "cca,patch,bw_mbps,rtt_ms,slice_ms,share_pct,buffer_bdp,loss,reps,median_mbps,stddev_mbps,p10,p90,class";
inline constexpr std::string_view kSeriesHeader =
    "t_s,goodput_mbps,pacing_mbps,delivery_mbps,btlbw_mbps,rtprop_ms,inflight_bytes,inflight_bdp,"
    "pacing_gain,cwnd_gain,phase,deficit,cwnd_limited,retx";
inline constexpr std::string_view kRunsHeader =
    "cca,patch,bw_mbps,rtt_ms,slice_ms,share_pct,buffer_bdp,loss,rep,avg_goodput_mbps,retransmits,startup_exit_s";

enum class ExportFormat { Csv, Json };

ExportFormat parse_format(std::string_view text);

class ExportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Six significant digits, locale-independent.
std::string fmt_num(double v);

void write_aggregate_csv(std::ostream& out, const std::vector<CellResult>& cells);
void write_series_csv(std::ostream& out, const std::vector<SeriesSample>& series);
// One row per repetition with its whole-run average.
void write_runs_csv(std::ostream& out, const std::vector<CellResult>& cells);
void write_json(std::ostream& out, const std::vector<CellResult>& cells, bool include_series);

std::string aggregate_csv(const std::vector<CellResult>& cells);
std::string series_csv(const std::vector<SeriesSample>& series);

// File variants; an unwritable path raises ExportError naming the path.
void export_results(const std::vector<CellResult>& cells, ExportFormat format, const std::string& path);
// Writes one series file per run. With a single run the path is used as is,
// otherwise `<stem>_<cellkey>_rep<r><ext>`. Returns the paths written.
std::vector<std::string> export_series(const std::vector<CellResult>& cells, const std::string& path);

}  // namespace bbrsim
