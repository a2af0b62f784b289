#include "bbrsim/sweep.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <sstream>

#ifdef BBRSIM_HAVE_OPENMP
#include <omp.h>
#endif

namespace bbrsim {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto end = comma == std::string_view::npos ? s.size() : comma;
    std::string item = trim(s.substr(start, end - start));
    if (!item.empty()) out.push_back(std::move(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw std::invalid_argument(key + ": not a number: '" + v + "'");
  }
}

std::vector<double> parse_doubles(const std::string& key, const std::vector<std::string>& items) {
  std::vector<double> out;
  for (const auto& i : items) out.push_back(parse_double(key, i));
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "on" || v == "1" || v == "true") return true;
  if (v == "off" || v == "0" || v == "false") return false;
  throw std::invalid_argument(key + ": expected on|off, got '" + v + "'");
}

std::string single(const std::string& key, const std::vector<std::string>& items) {
  if (items.size() != 1) throw std::invalid_argument(key + ": expects a single value");
  return items.front();
}

}  // namespace

std::vector<ExperimentConfig> SweepGrid::expand() const {
  std::vector<ExperimentConfig> cells;
  for (CcaKind c : cca)
    for (bool p : patch)
      for (double bw : bw_mbps)
        for (double rtt : rtt_ms)
          for (double buf : buffer_bdp)
            for (double l : loss)
              for (double sl : slice_ms)
                for (double sh : share_pct) {
                  ExperimentConfig cfg = base;
                  cfg.cca = c;
                  cfg.patch = p;
                  cfg.bw_mbps = bw;
                  cfg.rtt_ms = rtt;
                  cfg.buffer_bdp = buf;
                  cfg.loss = l;
                  cfg.slice_ms = sl;
                  cfg.share_pct = sh;
                  cells.push_back(cfg);
                }
  return cells;
}

SweepGrid parse_sweep_text(std::string_view text) {
  SweepGrid grid;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("sweep line " + std::to_string(lineno) + ": expected key = values");
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const auto items = split_list(std::string_view(line).substr(eq + 1));
    if (items.empty()) throw std::invalid_argument(key + ": no values");

    if (key == "cca") {
      grid.cca.clear();
      for (const auto& i : items) grid.cca.push_back(parse_cca(i));
    } else if (key == "patch") {
      grid.patch.clear();
      for (const auto& i : items) grid.patch.push_back(parse_bool(key, i));
    } else if (key == "bw") {
      grid.bw_mbps = parse_doubles(key, items);
    } else if (key == "rtt") {
      grid.rtt_ms = parse_doubles(key, items);
    } else if (key == "buffer_bdp") {
      grid.buffer_bdp = parse_doubles(key, items);
    } else if (key == "loss") {
      grid.loss = parse_doubles(key, items);
    } else if (key == "slice") {
      grid.slice_ms = parse_doubles(key, items);
    } else if (key == "share") {
      grid.share_pct = parse_doubles(key, items);
    } else if (key == "reps") {
      grid.base.reps = static_cast<int>(parse_double(key, single(key, items)));
    } else if (key == "duration") {
      grid.base.duration_s = parse_double(key, single(key, items));
    } else if (key == "seed") {
      grid.base.seed = std::stoull(single(key, items));
    } else if (key == "sample_ms") {
      grid.base.sample_ms = parse_double(key, single(key, items));
    } else if (key == "tsq_limit") {
      grid.base.tsq_limit = static_cast<std::uint32_t>(parse_double(key, single(key, items)));
    } else if (key == "cap") {
      grid.base.cap_mbps = parse_double(key, single(key, items));
    } else if (key == "phase") {
      grid.base.phase_ms = parse_double(key, single(key, items));
    } else {
      throw std::invalid_argument("sweep line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  return grid;
}

SweepGrid parse_sweep_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open sweep file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_sweep_text(buf.str());
}

std::vector<double> default_share_grid() {
  std::vector<double> shares;
  for (int s = 10; s <= 70; s += 5) shares.push_back(s);
  shares.push_back(100);
  return shares;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double sample_stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  // Shifted by the first value so identical samples give exactly zero.
  const double shift = v.front();
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double x : v) {
    sum += x - shift;
    sum_sq += (x - shift) * (x - shift);
  }
  const auto n = static_cast<double>(v.size());
  const double var = (sum_sq - sum * sum / n) / (n - 1.0);
  return var > 0.0 ? std::sqrt(var) : 0.0;
}

double percentile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + (v[hi] - v[lo]) * frac;
}

AggregateRow aggregate(const ExperimentConfig& cfg, const std::vector<double>& goodputs) {
  AggregateRow row;
  row.cfg = cfg;
  row.n = static_cast<int>(goodputs.size());
  row.median_mbps = median(goodputs);
  row.stddev_mbps = sample_stddev(goodputs);
  row.p10 = percentile(goodputs, 0.10);
  row.p90 = percentile(goodputs, 0.90);
  row.cls = classify(row.median_mbps, cfg.bw_mbps, cfg.cap_mbps);
  return row;
}

namespace {

struct Job {
  std::size_t cell;
  int rep;
};

std::vector<Job> flatten(const std::vector<ExperimentConfig>& cells) {
  std::vector<Job> jobs;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (int r = 0; r < cells[c].reps; ++r) jobs.push_back({c, r});
  }
  return jobs;
}

std::vector<CellResult> prepare(const std::vector<ExperimentConfig>& cells) {
  std::vector<CellResult> out(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    try {
      cells[c].validate();
    } catch (const std::exception& e) {
      throw SweepError("invalid config " + cells[c].key() + ": " + e.what());
    }
    out[c].cfg = cells[c];
    out[c].runs.resize(static_cast<std::size_t>(cells[c].reps));
  }
  return out;
}

void finish(std::vector<CellResult>& results) {
  for (auto& cell : results) {
    std::vector<double> g;
    g.reserve(cell.runs.size());
    for (const auto& r : cell.runs) g.push_back(r.avg_goodput_mbps);
    cell.row = aggregate(cell.cfg, g);
  }
}

}  // namespace

std::vector<CellResult> run_sweep_serial(const std::vector<ExperimentConfig>& cells, SweepOptions options) {
  auto results = prepare(cells);
  for (const Job& job : flatten(cells)) {
    try {
      results[job.cell].runs[static_cast<std::size_t>(job.rep)] =
          run_single(cells[job.cell], job.rep, RunOptions{options.keep_series});
    } catch (const std::exception& e) {
      throw SweepError("run failed for " + cells[job.cell].key() + " rep " + std::to_string(job.rep) +
                       ": " + e.what());
    }
  }
  finish(results);
  return results;
}

std::vector<CellResult> run_sweep_parallel(const std::vector<ExperimentConfig>& cells, SweepOptions options) {
  auto results = prepare(cells);
  const std::vector<Job> jobs = flatten(cells);
  std::vector<std::exception_ptr> errors(jobs.size());
  const auto n = static_cast<std::int64_t>(jobs.size());

#ifdef BBRSIM_HAVE_OPENMP
  if (options.threads > 0) omp_set_num_threads(options.threads);
#pragma omp parallel for schedule(dynamic, 1)
#endif
  for (std::int64_t i = 0; i < n; ++i) {
    const Job& job = jobs[static_cast<std::size_t>(i)];
    try {
      results[job.cell].runs[static_cast<std::size_t>(job.rep)] =
          run_single(cells[job.cell], job.rep, RunOptions{options.keep_series});
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }

  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      throw SweepError("run failed for " + cells[jobs[i].cell].key() + " rep " +
                       std::to_string(jobs[i].rep) + ": " + e.what());
    }
  }
  finish(results);
  return results;
}

bool parallel_available() {
#ifdef BBRSIM_HAVE_OPENMP
  return true;
#else
  return false;
#endif
}

}  // namespace bbrsim
