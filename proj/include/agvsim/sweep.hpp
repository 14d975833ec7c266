#pragma once

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "agvsim/csv.hpp"
#include "agvsim/metrics.hpp"
#include "agvsim/run_config.hpp"
#include "agvsim/simulation.hpp"

namespace agvsim {

enum class SweepAxis { kPrr, kDelay, kTau, kPrrTau };

inline const char* axis_name(SweepAxis a) {
  switch (a) {
    case SweepAxis::kPrr: return "prr";
    case SweepAxis::kDelay: return "delay";
    case SweepAxis::kTau: return "tau";
    case SweepAxis::kPrrTau: return "prr_tau";
  }
  return "?";
}

/// One sweep coordinate. `tau` is only meaningful on the PRR x tau grid;
/// elsewhere it mirrors the tau the run actually used.
struct SweepPoint {
  double value{0.0};
  double tau{0.0};
};

struct SweepSpec {
  SweepAxis axis{SweepAxis::kPrr};
  std::vector<double> values;
  std::vector<double> taus;  // second grid axis, kPrrTau only
  std::vector<std::uint64_t> seeds;
  RunConfig base;

  void validate() const {
    if (values.empty()) throw std::invalid_argument("sweep: no values");
    if (seeds.empty()) throw std::invalid_argument("sweep: no seeds");
    if (axis == SweepAxis::kPrrTau && taus.empty())
      throw std::invalid_argument("sweep: tau grid needs tau values");
    base.validate();
  }

  std::vector<SweepPoint> points() const {
    std::vector<SweepPoint> out;
    if (axis == SweepAxis::kPrrTau) {
      for (double p : values)
        for (double t : taus) out.push_back({p, t});
      return out;
    }
    for (double v : values) out.push_back({v, axis == SweepAxis::kTau ? v : base.controller.tau});
    return out;
  }
};

/// The base config with one sweep coordinate and seed applied. PRR and
/// delay sweeps pin the channel to the fixed-quality mode.
inline RunConfig apply(const RunConfig& base, SweepAxis axis, SweepPoint pt, std::uint64_t seed) {
  RunConfig c = base;
  c.seed = seed;
  switch (axis) {
    case SweepAxis::kPrr:
      c.channel.mode = ChannelMode::kFixed;
      c.channel.fixed.prr = pt.value;
      break;
    case SweepAxis::kDelay:
      c.channel.mode = ChannelMode::kFixed;
      c.channel.fixed.delay = pt.value;
      break;
    case SweepAxis::kTau:
      c.controller.tau = pt.value;
      break;
    case SweepAxis::kPrrTau:
      c.channel.mode = ChannelMode::kFixed;
      c.channel.fixed.prr = pt.value;
      c.controller.tau = pt.tau;
      break;
  }
  return c;
}

struct SweepRow {
  SweepPoint point;
  std::uint64_t seed{0};
  double eps{std::numeric_limits<double>::quiet_NaN()};
  bool ok{false};
  std::string error;
};

struct SweepCell {
  SweepPoint point;
  Summary summary;  // over successful runs only; n == 0 when all failed
};

struct SweepResult {
  SweepAxis axis{SweepAxis::kPrr};
  std::vector<SweepRow> rows;  // point-major, seeds in spec order
  std::vector<SweepCell> cells;

  bool all_ok() const {
    return std::all_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.ok; });
  }
};

/// Called from worker threads after each successful run.
using RunCallback = std::function<void(const SweepRow&, const RunConfig&, const RunResult&)>;

inline std::vector<SweepCell> aggregate_rows(const std::vector<SweepPoint>& points,
                                             const std::vector<SweepRow>& rows) {
  std::vector<std::pair<std::size_t, double>> ok;
  const std::size_t per_point = rows.size() / points.size();
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (rows[i].ok) ok.emplace_back(i / per_point, rows[i].eps);
  const auto groups = aggregate(ok);
  std::vector<SweepCell> cells;
  for (std::size_t p = 0; p < points.size(); ++p) {
    const auto it = groups.find(p);
    cells.push_back({points[p], it == groups.end() ? Summary{} : it->second});
  }
  return cells;
}

/// Runs every (point, seed) pair. Each worker owns its simulation; results
/// land in a slot fixed by the pair's index, so `jobs` never changes output.
inline SweepResult run_sweep(const SweepSpec& spec, unsigned jobs = 1,
                             const RunCallback& on_run = {}) {
  spec.validate();
  const auto points = spec.points();
  SweepResult res;
  res.axis = spec.axis;
  res.rows.resize(points.size() * spec.seeds.size());
  for (std::size_t i = 0; i < res.rows.size(); ++i) {
    res.rows[i].point = points[i / spec.seeds.size()];
    res.rows[i].seed = spec.seeds[i % spec.seeds.size()];
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < res.rows.size(); i = next++) {
      SweepRow& row = res.rows[i];
      try {
        const RunConfig cfg = apply(spec.base, spec.axis, row.point, row.seed);
        const RunResult r = run(cfg);
        row.eps = r.eps;
        row.ok = std::isfinite(r.eps);
        if (!row.ok) row.error = "non-finite epsilon";
        if (row.ok && on_run) on_run(row, cfg, r);
      } catch (const std::exception& e) {
        row.ok = false;
        row.error = e.what();
      }
    }
  };

  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(res.rows.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  res.cells = aggregate_rows(points, res.rows);
  return res;
}

/// For each PRR column of a grid, the tau with the lowest mean epsilon.
inline std::map<double, double> best_tau_per_prr(const std::vector<SweepCell>& cells) {
  std::map<double, std::pair<double, double>> best;  // prr -> (mean, tau)
  for (const auto& c : cells) {
    if (c.summary.n == 0) continue;
    auto it = best.find(c.point.value);
    if (it == best.end() || c.summary.mean < it->second.first)
      best[c.point.value] = {c.summary.mean, c.point.tau};
  }
  std::map<double, double> out;
  for (const auto& [prr, v] : best) out[prr] = v.second;
  return out;
}

namespace csv {

inline constexpr const char* kSweepHeader = "axis_name,axis_value,tau_s,seed,eps_m,status";
inline constexpr const char* kAggregateHeader = "axis_value,mean_eps_m,sd_eps_m,n";
inline constexpr const char* kHeatmapHeader = "prr,tau_s,mean_eps_m,sd_eps_m,n,best";

/// Grid cells are keyed "prr:tau" so one column still identifies them.
inline std::string axis_value(SweepAxis axis, SweepPoint p) {
  if (axis == SweepAxis::kPrrTau) return fmt::format("{}:{}", p.value, p.tau);
  return fmt::format("{}", p.value);
}

inline std::string sweep(const SweepResult& r) {
  std::string out = std::string(kSweepHeader) + "\n";
  for (const auto& row : r.rows) {
    out += fmt::format("{},{},{},{},{:.6f},{}\n", axis_name(r.axis), axis_value(r.axis, row.point),
                       row.point.tau, row.seed, row.eps, row.ok ? "ok" : "failed");
  }
  out += std::string(kAggregateHeader) + "\n";
  for (const auto& c : r.cells) {
    out += fmt::format("{},{:.6f},{:.6f},{}\n", axis_value(r.axis, c.point),
                       c.summary.n ? c.summary.mean : std::numeric_limits<double>::quiet_NaN(),
                       c.summary.n ? c.summary.sd : std::numeric_limits<double>::quiet_NaN(),
                       c.summary.n);
  }
  return out;
}

inline std::string heatmap(const std::vector<SweepCell>& cells) {
  const auto best = best_tau_per_prr(cells);
  std::string out = std::string(kHeatmapHeader) + "\n";
  for (const auto& c : cells) {
    const auto it = best.find(c.point.value);
    const bool is_best = it != best.end() && it->second == c.point.tau;
    out += fmt::format("{},{},{:.6f},{:.6f},{},{}\n", c.point.value, c.point.tau, c.summary.mean,
                       c.summary.sd, c.summary.n, is_best ? 1 : 0);
  }
  return out;
}

/// The aggregate block of a sweep.csv, plus the axis name from its run rows.
struct ParsedSweep {
  std::string axis;
  std::vector<std::pair<std::string, Summary>> cells;
};

inline ParsedSweep parse_sweep(const std::string& text) {
  const auto rows = lines(text);
  expect_header(rows, kSweepHeader, "sweep.csv");
  ParsedSweep out;
  std::size_t i = 1;
  for (; i < rows.size() && rows[i] != kAggregateHeader; ++i) {
    const auto c = split(rows[i]);
    if (c.size() != 6) throw std::runtime_error("sweep.csv: bad run row " + std::to_string(i));
    out.axis = c[0];
  }
  if (i == rows.size()) throw std::runtime_error("sweep.csv: missing aggregate block");
  for (++i; i < rows.size(); ++i) {
    const auto c = split(rows[i]);
    if (c.size() != 4) throw std::runtime_error("sweep.csv: bad aggregate row " + std::to_string(i));
    Summary s;
    s.mean = std::stod(c[1]);
    s.sd = std::stod(c[2]);
    s.n = std::stoull(c[3]);
    out.cells.emplace_back(c[0], s);
  }
  return out;
}

struct HeatmapCell {
  double prr{0.0};
  double tau{0.0};
  double mean{0.0};
  double sd{0.0};
  std::size_t n{0};
  bool best{false};
};

inline std::vector<HeatmapCell> parse_heatmap(const std::string& text) {
  const auto rows = lines(text);
  expect_header(rows, kHeatmapHeader, "heatmap.csv");
  std::vector<HeatmapCell> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto c = split(rows[i]);
    if (c.size() != 6) throw std::runtime_error("heatmap.csv: bad row " + std::to_string(i));
    out.push_back({std::stod(c[0]), std::stod(c[1]), std::stod(c[2]), std::stod(c[3]),
                   static_cast<std::size_t>(std::stoull(c[4])), c[5] == "1"});
  }
  return out;
}

}  // namespace csv

}  // namespace agvsim
