#include "bbrsim/export.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace bbrsim {

ExportFormat parse_format(std::string_view text) {
  if (text == "csv") return ExportFormat::Csv;
  if (text == "json") return ExportFormat::Json;
  throw std::invalid_argument("format: expected csv|json, got '" + std::string(text) + "'");
}

std::string fmt_num(double v) {
  if (v == 0.0) v = 0.0;  // folds -0
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

namespace {

const char* on_off(bool b) { return b ? "on" : "off"; }

void write_cell_key(std::ostream& out, const ExperimentConfig& c) {
  out << to_string(c.cca) << ',' << on_off(c.patch) << ',' << fmt_num(c.bw_mbps) << ',' << fmt_num(c.rtt_ms)
      << ',' << fmt_num(c.slice_ms) << ',' << fmt_num(c.share_pct) << ',' << fmt_num(c.buffer_bdp) << ','
      << fmt_num(c.loss);
}

std::ofstream open_or_throw(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ExportError("cannot write '" + path + "'");
  return out;
}

void close_or_throw(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw ExportError("write failed for '" + path + "'");
}

nlohmann::ordered_json series_json(const std::vector<SeriesSample>& series) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& s : series) {
    arr.push_back({{"t_s", s.t_s},
                   {"goodput_mbps", s.goodput_mbps},
                   {"pacing_mbps", s.pacing_mbps},
                   {"delivery_mbps", s.delivery_mbps},
                   {"btlbw_mbps", s.btlbw_mbps},
                   {"rtprop_ms", s.rtprop_ms},
                   {"inflight_bytes", s.inflight_bytes},
                   {"inflight_bdp", s.inflight_bdp},
                   {"pacing_gain", s.pacing_gain},
                   {"cwnd_gain", s.cwnd_gain},
                   {"phase", std::string(to_string(s.phase))},
                   {"deficit", s.deficit},
                   {"cwnd_limited", s.cwnd_limited},
                   {"retx", s.retx}});
  }
  return arr;
}

// JSON numbers go through the same 6-digit rendering so CSV and JSON agree.
double round6(double v) { return std::stod(fmt_num(v)); }

}  // namespace

void write_aggregate_csv(std::ostream& out, const std::vector<CellResult>& cells) {
  out << kAggregateHeader << '\n';
  for (const auto& cell : cells) {
    const AggregateRow& r = cell.row;
    write_cell_key(out, cell.cfg);
    out << ',' << r.n << ',' << fmt_num(r.median_mbps) << ',' << fmt_num(r.stddev_mbps) << ','
        << fmt_num(r.p10) << ',' << fmt_num(r.p90) << ',' << to_string(r.cls) << '\n';
  }
}

void write_series_csv(std::ostream& out, const std::vector<SeriesSample>& series) {
  out << kSeriesHeader << '\n';
  for (const auto& s : series) {
    out << fmt_num(s.t_s) << ',' << fmt_num(s.goodput_mbps) << ',' << fmt_num(s.pacing_mbps) << ','
        << fmt_num(s.delivery_mbps) << ',' << fmt_num(s.btlbw_mbps) << ',' << fmt_num(s.rtprop_ms) << ','
        << s.inflight_bytes << ',' << fmt_num(s.inflight_bdp) << ',' << fmt_num(s.pacing_gain) << ','
        << fmt_num(s.cwnd_gain) << ',' << to_string(s.phase) << ',' << (s.deficit ? 1 : 0) << ','
        << (s.cwnd_limited ? 1 : 0) << ',' << s.retx << '\n';
  }
}

void write_runs_csv(std::ostream& out, const std::vector<CellResult>& cells) {
  out << kRunsHeader << '\n';
  for (const auto& cell : cells) {
    for (const auto& run : cell.runs) {
      write_cell_key(out, cell.cfg);
      out << ',' << run.rep << ',' << fmt_num(run.avg_goodput_mbps) << ',' << run.retransmits << ','
          << (run.startup_exit_s ? fmt_num(*run.startup_exit_s) : std::string()) << '\n';
    }
  }
}

void write_json(std::ostream& out, const std::vector<CellResult>& cells, bool include_series) {
  auto doc = nlohmann::ordered_json::array();
  for (const auto& cell : cells) {
    const ExperimentConfig& c = cell.cfg;
    const AggregateRow& r = cell.row;
    nlohmann::ordered_json j = {{"cca", std::string(to_string(c.cca))},
                                {"patch", on_off(c.patch)},
                                {"bw_mbps", round6(c.bw_mbps)},
                                {"rtt_ms", round6(c.rtt_ms)},
                                {"slice_ms", round6(c.slice_ms)},
                                {"share_pct", round6(c.share_pct)},
                                {"buffer_bdp", round6(c.buffer_bdp)},
                                {"loss", round6(c.loss)},
                                {"reps", r.n},
                                {"median_mbps", round6(r.median_mbps)},
                                {"stddev_mbps", round6(r.stddev_mbps)},
                                {"p10", round6(r.p10)},
                                {"p90", round6(r.p90)},
                                {"class", std::string(to_string(r.cls))}};
    auto runs = nlohmann::ordered_json::array();
    for (const auto& run : cell.runs) {
      nlohmann::ordered_json rj = {{"rep", run.rep}, {"avg_goodput_mbps", round6(run.avg_goodput_mbps)}};
      if (include_series) rj["series"] = series_json(run.series);
      runs.push_back(std::move(rj));
    }
    j["runs"] = std::move(runs);
    doc.push_back(std::move(j));
  }
  out << doc.dump(2) << '\n';
}

std::string aggregate_csv(const std::vector<CellResult>& cells) {
  std::ostringstream s;
  write_aggregate_csv(s, cells);
  return s.str();
}

std::string series_csv(const std::vector<SeriesSample>& series) {
  std::ostringstream s;
  write_series_csv(s, series);
  return s.str();
}

void export_results(const std::vector<CellResult>& cells, ExportFormat format, const std::string& path) {
  auto out = open_or_throw(path);
  if (format == ExportFormat::Csv) {
    write_aggregate_csv(out, cells);
  } else {
    write_json(out, cells, false);
  }
  close_or_throw(out, path);
}

std::vector<std::string> export_series(const std::vector<CellResult>& cells, const std::string& path) {
  std::size_t total = 0;
  for (const auto& c : cells) total += c.runs.size();
  std::vector<std::string> written;
  if (total == 1) {
    for (const auto& c : cells) {
      for (const auto& run : c.runs) {
        auto out = open_or_throw(path);
        write_series_csv(out, run.series);
        close_or_throw(out, path);
        written.push_back(path);
      }
    }
    return written;
  }
  const std::filesystem::path p(path);
  const std::string ext = p.has_extension() ? p.extension().string() : ".csv";
  const std::filesystem::path stem = p.parent_path() / p.stem();
  for (const auto& c : cells) {
    for (const auto& run : c.runs) {
      const std::string file = stem.string() + "_" + c.cfg.key() + "_rep" + std::to_string(run.rep) + ext;
      auto out = open_or_throw(file);
      write_series_csv(out, run.series);
      close_or_throw(out, file);
      written.push_back(file);
    }
  }
  return written;
}

}  // namespace bbrsim
