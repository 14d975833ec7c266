// agvsim: single runs, parameter sweeps, Markov-channel runs and plots.
//
// Exit status: 0 when every requested run completed, 1 when any run failed,
// 2 for usage or configuration errors.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "agvsim/config_io.hpp"
#include "agvsim/csv.hpp"
#include "agvsim/plot.hpp"
#include "agvsim/simulation.hpp"
#include "agvsim/sweep.hpp"

namespace fs = std::filesystem;
using namespace agvsim;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::vector<std::uint64_t> seeds;
  std::optional<double> duration, prr, delay, tau;
  std::vector<double> values, taus;
  std::string out;
  unsigned jobs{std::max(1u, std::thread::hardware_concurrency())};
  bool plots{false};
  std::string plot_dir;
};

RunConfig base_config(const Options& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : load_config(o.config);
  if (o.seed) c.seed = *o.seed;
  if (o.duration) c.duration = *o.duration;
  if (o.prr || o.delay) c.channel.mode = ChannelMode::kFixed;
  if (o.prr) c.channel.fixed.prr = *o.prr;
  if (o.delay) c.channel.fixed.delay = *o.delay;
  if (o.tau) c.controller.tau = *o.tau;
  c.validate();
  return c;
}

// Explicit --seeds wins; a lone --seed runs just that seed; else 0..9.
std::vector<std::uint64_t> seed_list(const Options& o) {
  if (!o.seeds.empty()) return o.seeds;
  if (o.seed) return {*o.seed};
  std::vector<std::uint64_t> s(10);
  std::iota(s.begin(), s.end(), 0);
  return s;
}

std::string summary_csv(std::uint64_t seed, const RunResult& r) {
  const auto& k = r.output.counters;
  return fmt::format(
      "seed,eps_m,collisions,sensor_samples,poses_delivered,commands_sent,commands_delivered\n"
      "{},{:.6f},{},{},{},{},{}\n",
      seed, r.eps, k.collisions, k.sensor_samples, k.poses_delivered, k.commands_sent,
      k.commands_delivered);
}

void write_trajectory(const fs::path& dir, const RunResult& r, bool plots) {
  csv::write_atomic(dir / "trajectory.csv", csv::trajectory(r.output.trajectory));
  if (plots) csv::write_atomic(dir / "trajectory.svg", svg::trajectory(r.output.trajectory));
}

int cmd_run(const Options& o) {
  const RunConfig cfg = base_config(o);
  const RunResult r = run(cfg);
  const fs::path out(o.out);
  write_trajectory(out, r, o.plots);
  csv::write_atomic(out / "summary.csv", summary_csv(cfg.seed, r));
  fmt::print("eps_m={:.6f} collisions={}\n", r.eps, r.output.counters.collisions);
  return 0;
}

std::string run_dir_name(SweepAxis axis, const SweepRow& row) {
  std::string name = fmt::format("{}_{}", axis == SweepAxis::kPrrTau ? "prr" : axis_name(axis),
                                 row.point.value);
  if (axis == SweepAxis::kPrrTau) name += fmt::format("_tau_{}", row.point.tau);
  return name;
}

int cmd_sweep(const Options& o, SweepAxis axis) {
  SweepSpec spec;
  spec.axis = axis;
  spec.base = base_config(o);
  spec.seeds = seed_list(o);
  spec.values = o.values;
  if (spec.values.empty()) {
    switch (axis) {
      case SweepAxis::kPrr: spec.values = {1.0, 0.8, 0.65, 0.45, 0.25, 0.1}; break;
      case SweepAxis::kDelay: spec.values = {0.0, 0.1, 0.25, 0.5}; break;
      case SweepAxis::kTau: spec.values = {1.0, 2.0, 3.0, 4.0, 5.0}; break;
      case SweepAxis::kPrrTau: spec.values = {0.25, 0.45, 0.65, 0.8, 1.0}; break;
    }
  }
  if (axis == SweepAxis::kPrrTau) spec.taus = o.taus.empty() ? std::vector{1.0, 2.0, 3.0, 4.0, 5.0} : o.taus;

  const fs::path out(o.out);
  const auto on_run = [&](const SweepRow& row, const RunConfig&, const RunResult& r) {
    const fs::path dir = out / "runs" / run_dir_name(axis, row) / fmt::format("seed_{}", row.seed);
    write_trajectory(dir, r, false);
  };
  const SweepResult res = run_sweep(spec, o.jobs, on_run);

  csv::write_atomic(out / "sweep.csv", csv::sweep(res));
  if (axis == SweepAxis::kPrrTau) csv::write_atomic(out / "heatmap.csv", csv::heatmap(res.cells));

  for (const auto& row : res.rows)
    if (!row.ok)
      fmt::print(stderr, "run {} seed {} failed: {}\n", csv::axis_value(axis, row.point), row.seed,
                 row.error);
  for (const auto& c : res.cells)
    fmt::print("{}={} mean_eps_m={:.4f} sd={:.4f} n={}\n", axis_name(axis),
               csv::axis_value(axis, c.point), c.summary.mean, c.summary.sd, c.summary.n);
  if (o.plots) {
    if (axis == SweepAxis::kPrrTau) {
      csv::write_atomic(out / "heatmap.svg",
                        svg::heatmap(csv::parse_heatmap(csv::heatmap(res.cells))));
    } else {
      std::vector<svg::CurvePoint> pts;
      for (const auto& c : res.cells)
        if (c.summary.n) pts.push_back({c.point.value, c.summary.mean, c.summary.sd});
      csv::write_atomic(out / fmt::format("eps_vs_{}.svg", axis_name(axis)),
                        svg::curve(pts, fmt::format("epsilon vs {}", axis_name(axis)),
                                   axis_name(axis)));
    }
  }
  return res.all_ok() ? 0 : 1;
}

int cmd_markov(const Options& o) {
  RunConfig base = base_config(o);
  base.channel.mode = ChannelMode::kMarkov;
  base.validate();
  const auto seeds = seed_list(o);
  const fs::path out(o.out);

  std::vector<TrajectoryLog> logs;
  std::string summary = "seed,eps_m,collisions,good_fraction,mean_dwell_bad_s\n";
  bool ok = true;
  for (const auto seed : seeds) {
    RunConfig cfg = base;
    cfg.seed = seed;
    try {
      const RunResult r = run(cfg);
      const fs::path dir = seeds.size() == 1 ? out : out / "runs" / fmt::format("seed_{}", seed);
      write_trajectory(dir, r, o.plots);
      csv::write_atomic(dir / "channel.csv", csv::channel(r.output.channel_log));
      summary += fmt::format("{},{:.6f},{},{:.6f},{:.6f}\n", seed, r.eps,
                             r.output.counters.collisions,
                             occupancy(r.output.channel_log, ChannelState::kGood, cfg.duration),
                             mean_dwell(r.output.channel_log, ChannelState::kBad));
      logs.push_back(r.output.trajectory);
    } catch (const std::exception& e) {
      ok = false;
      summary += fmt::format("{},nan,0,nan,nan\n", seed);
      fmt::print(stderr, "seed {} failed: {}\n", seed, e.what());
    }
  }
  const auto bins = base.riskmap_window > 0.0
                        ? risk_map_windowed(logs, base.riskmap_bin, base.riskmap_window)
                        : risk_map(logs, base.riskmap_bin);
  csv::write_atomic(out / "riskmap.csv", csv::risk_map(bins));
  csv::write_atomic(out / "summary.csv", summary);
  if (o.plots) csv::write_atomic(out / "riskmap.svg", svg::risk_map(bins, base.path));
  fmt::print("runs={} riskmap_bins={}\n", logs.size(), bins.size());
  return ok ? 0 : 1;
}

// Renders an SVG for every recognised CSV in the directory.
int cmd_plot(const Options& o) {
  const fs::path in(o.plot_dir.empty() ? o.out : o.plot_dir);
  const fs::path out(o.out);
  const RunConfig cfg = base_config(o);
  int made = 0;
  if (fs::exists(in / "trajectory.csv")) {
    csv::write_atomic(out / "trajectory.svg",
                      svg::trajectory(csv::parse_trajectory(csv::read_file(in / "trajectory.csv"))));
    ++made;
  }
  if (fs::exists(in / "sweep.csv")) {
    const auto parsed = csv::parse_sweep(csv::read_file(in / "sweep.csv"));
    if (parsed.axis != axis_name(SweepAxis::kPrrTau)) {
      std::vector<svg::CurvePoint> pts;
      for (const auto& [key, s] : parsed.cells)
        if (s.n) pts.push_back({std::stod(key), s.mean, s.sd});
      csv::write_atomic(out / fmt::format("eps_vs_{}.svg", parsed.axis),
                        svg::curve(pts, "epsilon vs " + parsed.axis, parsed.axis));
      ++made;
    }
  }
  if (fs::exists(in / "heatmap.csv")) {
    csv::write_atomic(out / "heatmap.svg",
                      svg::heatmap(csv::parse_heatmap(csv::read_file(in / "heatmap.csv"))));
    ++made;
  }
  if (fs::exists(in / "riskmap.csv")) {
    csv::write_atomic(out / "riskmap.svg",
                      svg::risk_map(csv::parse_risk_map(csv::read_file(in / "riskmap.csv")),
                                    cfg.path));
    ++made;
  }
  if (made == 0) {
    fmt::print(stderr, "plot: no trajectory/sweep/heatmap/riskmap CSV in {}\n", in.string());
    return 1;
  }
  fmt::print("wrote {} plot(s) to {}\n", made, out.string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Networked AGV control simulator"};
  app.fallthrough();
  app.require_subcommand(1);
  Options o;
  const char* env_out = std::getenv("AGVSIM_OUT");
  o.out = env_out && *env_out ? env_out : "out";

  app.add_option("--config", o.config, "INI config file (see configs/default.ini)")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "seed for a single run");
  app.add_option("--seeds", o.seeds, "comma-separated sweep seeds (default 0..9)")->delimiter(',');
  app.add_option("--duration", o.duration, "run length [s]");
  app.add_option("--prr", o.prr, "fixed-channel packet reception ratio");
  app.add_option("--delay", o.delay, "fixed-channel delay [s]");
  app.add_option("--tau", o.tau, "controller lookahead [s]");
  app.add_option("--values", o.values, "comma-separated sweep values")->delimiter(',');
  app.add_option("--taus", o.taus, "comma-separated tau values for tau-grid")->delimiter(',');
  app.add_option("--out", o.out, "output directory (default $AGVSIM_OUT or ./out)");
  app.add_option("--jobs", o.jobs, "parallel runs in sweeps")->check(CLI::PositiveNumber);
  app.add_flag("--plots", o.plots, "also write SVG plots");

  auto* run_cmd = app.add_subcommand("run", "one closed-loop run");
  auto* sweep_cmd = app.add_subcommand("sweep", "epsilon over a parameter axis");
  sweep_cmd->require_subcommand(1);
  auto* sweep_prr = sweep_cmd->add_subcommand("prr", "sweep packet reception ratio");
  auto* sweep_delay = sweep_cmd->add_subcommand("delay", "sweep channel delay");
  auto* sweep_grid = sweep_cmd->add_subcommand("tau-grid", "PRR x tau grid");
  auto* markov_cmd = app.add_subcommand("markov", "runs over a Gilbert-Elliott channel");
  auto* plot_cmd = app.add_subcommand("plot", "render SVGs from existing CSVs");
  plot_cmd->add_option("dir", o.plot_dir, "directory holding the CSVs (default --out)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return cmd_run(o);
    if (*sweep_prr) return cmd_sweep(o, SweepAxis::kPrr);
    if (*sweep_delay) return cmd_sweep(o, SweepAxis::kDelay);
    if (*sweep_grid) return cmd_sweep(o, SweepAxis::kPrrTau);
    if (*markov_cmd) return cmd_markov(o);
    if (*plot_cmd) return cmd_plot(o);
  } catch (const ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    fmt::print(stderr, "invalid argument: {}\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 2;
}
