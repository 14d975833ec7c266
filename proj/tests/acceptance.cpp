// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 only if
// all pass. Usage: agvsim_acceptance <path-to-agvsim-cli>

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <thread>
#include <unistd.h>
#include <vector>

#include "agvsim/channel.hpp"
#include "agvsim/controller.hpp"
#include "agvsim/csv.hpp"
#include "agvsim/metrics.hpp"
#include "agvsim/simulation.hpp"
#include "agvsim/sweep.hpp"
#include "agvsim/world.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace agvsim;

namespace {

constexpr double kPi = std::numbers::pi;
const std::vector<std::uint64_t> kSeeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
const unsigned kJobs = std::max(1u, std::thread::hardware_concurrency());

struct Outcome {
  bool pass;
  std::string detail;
};

std::map<double, double> mean_eps(SweepAxis axis, const std::vector<double>& values,
                                  const RunConfig& base = {}) {
  SweepSpec s;
  s.axis = axis;
  s.values = values;
  s.seeds = kSeeds;
  s.base = base;
  const SweepResult r = run_sweep(s, kJobs);
  std::map<double, double> out;
  for (const auto& c : r.cells) out[c.point.value] = c.summary.n == kSeeds.size() ? c.summary.mean : NAN;
  return out;
}

Outcome a1_kinematics() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> v(-5, 5), w(-3, 3), dt(1e-3, 1.0), th(-kPi, kPi),
      xy(-20, 20);
  double pos = 0, head = 0;
  for (int i = 0; i < 1000; ++i) {
    const Pose p{xy(rng), xy(rng), th(rng)};
    const Twist cmd{v(rng), i % 20 == 0 ? 0.0 : w(rng)};
    const double h = dt(rng);
    const Pose got = integrate(p, cmd, h);
    const oracle::State ref = oracle::rk4({p.x, p.y, p.theta}, cmd.v, cmd.omega, h);
    pos = std::max({pos, std::abs(got.x - ref.x), std::abs(got.y - ref.y)});
    head = std::max(head, oracle::angle_gap(got.theta, ref.theta));
  }
  return {pos <= 1e-6 && head <= 1e-9,
          fmt::format("1000 triples vs RK4 (1e4 substeps): max |dpos| {:.2e} m (tol 1e-6), "
                      "max |dtheta| {:.2e} rad (tol 1e-9)",
                      pos, head)};
}

Outcome a2_channel() {
  const GilbertElliott half = fixed({0.5, 0.0});
  ChannelRealization hr(half, 1);
  auto stream = make_stream(1, StreamId::kUplink);
  int ok = 0;
  for (int i = 0; i < 100000; ++i) ok += transmit(half, hr, stream, 1e-3 * i).delivered;
  const double ratio = ok / 1e5;

  // Over 1e6 ticks the G-fraction's sampling sd is about 0.017 with a 1 s
  // dwell, wider than the 0.01 tolerance, so the 1e6-tick check uses a 10 ms
  // dwell (sd ~0.002) and the 1 s default is checked over 1e8 ticks.
  const auto markov = [](double dwell, double seconds, std::uint64_t seed) {
    const GilbertElliott ch = from_stationary(0.75, dwell, 0.001, {1, 0}, {0.5, 0.5});
    ChannelRealization r(ch, seed);
    r.step(ch, seconds);
    return std::pair{occupancy(r.state_log(), ChannelState::kGood, seconds),
                     mean_dwell(r.state_log(), ChannelState::kBad)};
  };
  const auto [g_short, d_short] = markov(0.01, 1000.0, 7);
  const auto [g_long, d_long] = markov(1.0, 100000.0, 7);
  const auto [g_default_1e6, d_default_1e6] = markov(1.0, 1000.0, 7);

  const bool pass = std::abs(ratio - 0.5) <= 0.01 && std::abs(g_short - 0.75) <= 0.01 &&
                    std::abs(d_short / 0.01 - 1) <= 0.05 && std::abs(g_long - 0.75) <= 0.01 &&
                    std::abs(d_long / 1.0 - 1) <= 0.05;
  return {pass,
          fmt::format("fixed prr 0.5: {:.4f} of 1e5 delivered; P[G]=0.75: G-fraction {:.4f} "
                      "and B-dwell {:.4f}/0.01 s over 1e6 ticks, {:.4f} and {:.4f}/1 s over 1e8 "
                      "ticks (tol 0.01, 5%) [1 s dwell over 1e6 ticks, informational: {:.4f}]",
                      ratio, g_short, d_short, g_long, d_long, g_default_1e6)};
}

int sh(const std::string& cmd) { return std::system((cmd + " > /dev/null 2>&1").c_str()); }

Outcome a3_determinism(const std::string& cli) {
  const fs::path dir = fs::temp_directory_path() / fmt::format("agvsim_accept_{}", ::getpid());
  fs::remove_all(dir);
  const auto d = [&](const char* s) { return (dir / s).string(); };
  bool ok = sh(fmt::format("'{}' run --seed 11 --prr 0.45 --out '{}'", cli, d("r1"))) == 0 &&
            sh(fmt::format("'{}' run --seed 11 --prr 0.45 --out '{}'", cli, d("r2"))) == 0;
  const bool runs_equal =
      ok && csv::read_file(dir / "r1/trajectory.csv") == csv::read_file(dir / "r2/trajectory.csv");

  const std::string sweep = "sweep prr --values 0.25,0.65 --seeds 0,1,2,3";
  ok = sh(fmt::format("'{}' {} --jobs 1 --out '{}'", cli, sweep, d("j1"))) == 0 &&
       sh(fmt::format("'{}' {} --jobs 8 --out '{}'", cli, sweep, d("j8"))) == 0;
  std::size_t compared = 0;
  bool jobs_equal = ok;
  if (ok) {
    for (const auto& e : fs::recursive_directory_iterator(dir / "j1")) {
      if (!e.is_regular_file()) continue;
      const fs::path rel = fs::relative(e.path(), dir / "j1");
      jobs_equal = jobs_equal && fs::exists(dir / "j8" / rel) &&
                   csv::read_file(e.path()) == csv::read_file(dir / "j8" / rel);
      compared += rel.filename() == "trajectory.csv";
    }
  }
  fs::remove_all(dir);
  return {runs_equal && jobs_equal && compared == 8,
          fmt::format("two executions identical: {}; --jobs 1 vs 8: {} trajectory.csv files "
                      "compared, identical: {}",
                      runs_equal, compared, jobs_equal)};
}

Outcome a4_perfect_channel() {
  const double eps = run(RunConfig{}).eps;
  return {eps <= 2.0, fmt::format("default config, PRR 1, delay 0: eps {:.3f} m (limit 2)", eps)};
}

Outcome a5_prr_trend(std::map<double, double>& cache) {
  cache = mean_eps(SweepAxis::kPrr, {1.0, 0.65, 0.45, 0.25, 0.1});
  const auto& m = cache;
  const bool pass = m.at(1.0) < m.at(0.65) && m.at(0.65) < m.at(0.45) && m.at(0.45) < m.at(0.25) &&
                    m.at(0.1) < m.at(0.25);
  return {pass, fmt::format("mean eps over 10 seeds: PRR 1 {:.2f} < 0.65 {:.2f} < 0.45 {:.2f} < "
                            "0.25 {:.2f} > 0.1 {:.2f}",
                            m.at(1.0), m.at(0.65), m.at(0.45), m.at(0.25), m.at(0.1))};
}

Outcome a6_delay_trend(const std::map<double, double>& prr) {
  const auto m = mean_eps(SweepAxis::kDelay, {0.0, 0.1, 0.25, 0.5});
  const bool monotone = m.at(0.0) <= m.at(0.1) && m.at(0.1) <= m.at(0.25) && m.at(0.25) <= m.at(0.5);
  const double delay_cost = m.at(0.5) - m.at(0.0);
  const double loss_cost = prr.at(0.25) - prr.at(1.0);
  return {monotone && delay_cost < loss_cost,
          fmt::format("mean eps at 0/100/250/500 ms: {:.2f} {:.2f} {:.2f} {:.2f}; "
                      "delay cost {:.2f} m < loss cost {:.2f} m",
                      m.at(0.0), m.at(0.1), m.at(0.25), m.at(0.5), delay_cost, loss_cost)};
}

Outcome a7_lookahead() {
  SweepSpec s;
  s.axis = SweepAxis::kPrrTau;
  s.values = {0.45, 0.65, 1.0};
  s.taus = {1, 2, 3, 4};
  s.seeds = kSeeds;
  const SweepResult r = run_sweep(s, kJobs);
  const auto best = best_tau_per_prr(r.cells);
  std::string grid;
  for (const auto& c : r.cells)
    grid += fmt::format(" ({},{}):{:.2f}", c.point.value, c.point.tau, c.summary.mean);
  return {best.at(0.45) >= best.at(1.0),
          fmt::format("argmin tau: PRR 0.45 -> {}, 0.65 -> {}, 1.0 -> {};{}", best.at(0.45),
                      best.at(0.65), best.at(1.0), grid)};
}

Outcome a8_circling() {
  const double half_a = EightPath{}.amplitude_x / 2;
  int inside = 0;
  std::string med;
  for (const auto seed : kSeeds) {
    RunConfig c;
    c.seed = seed;
    c.channel.fixed = {0.1, 0.0};
    const double m = median_distance_from_origin(run(c).output.trajectory);
    inside += m < half_a;
    med += fmt::format(" {:.1f}", m);
  }
  const double frac = inside / static_cast<double>(kSeeds.size());
  return {frac >= 0.7, fmt::format("PRR 0.1: {:.0f}% of seeds with median |p| < {} m (need 70%); "
                                   "medians:{}",
                                   100 * frac, half_a, med)};
}

Outcome a9_metric() {
  const auto log = [](auto offset) {
    TrajectoryLog l;
    for (int i = 0; i <= 3100; ++i) {
      const double t = 0.02 * i;
      l.samples.push_back({t, {t, offset(t), 0}, {t, 0}, ChannelState::kGood, false});
    }
    return l;
  };
  const double c = epsilon(log([](double) { return 3.0; }));
  const double r = epsilon(log([](double t) { return 10 * t / 62; }));
  return {std::abs(c - 3) <= 1e-9 && std::abs(r - 5) <= 1e-6,
          fmt::format("constant 3 m -> {:.12f} (tol 1e-9); ramp 0..10 m -> {:.9f} (tol 1e-6)", c,
                      r)};
}

Outcome a10_controller() {
  int failures = 0;
  const auto check = [&](bool ok) { failures += !ok; };
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(-30, 30), th(-kPi, kPi), g(0, 4), e(-5, 5);
  const EightPath path;
  for (int i = 0; i < 2000; ++i) {
    // theta_e wrapping and 2*pi invariance.
    const Pose p{u(rng), u(rng), th(rng)};
    const TrackingError a = tracking_errors(p, path, 10, 2);
    const TrackingError b = tracking_errors({p.x, p.y, p.theta + 2 * kPi}, path, 10, 2);
    check(a.theta_e > -kPi && a.theta_e <= kPi && std::abs(a.theta_e - b.theta_e) < 1e-9);

    // PID linearity with the integral bound inactive.
    const PidGains gains{g(rng), g(rng), g(rng)};
    const double err = e(rng), alpha = e(rng);
    const PidResult r1 = pid_step(gains, {}, err, 0.02);
    const PidResult r2 = pid_step(gains, {}, alpha * err, 0.02);
    check(std::abs(r2.output - alpha * r1.output) < 1e-9);

    // Saturation bounds.
    ControllerConfig cfg;
    cfg.gains_linear = {g(rng), g(rng), g(rng)};
    cfg.gains_angular = {g(rng), g(rng), g(rng)};
    ControllerState st;
    const Twist cmd = control_step(cfg, path, st, PoseSample{p, 1.0}, 1.0);
    check(cmd.v >= 0 && cmd.v <= cfg.v_max && std::abs(cmd.omega) <= cfg.omega_max);
  }
  // Zero-error fixed point.
  PidState s;
  for (int i = 0; i < 100; ++i) {
    const PidResult r = pid_step({1, 1, 1}, s, 0.0, 0.02);
    check(r.output == 0.0);
    s = r.state;
  }
  return {failures == 0, fmt::format("theta_e wrap, PID linearity, saturation, zero-error fixed "
                                     "point over 2000 random cases: {} failures",
                                     failures)};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    fmt::print(stderr, "usage: {} <agvsim-cli>\n", argv[0]);
    return 2;
  }
  const std::string cli = argv[1];
  std::map<double, double> prr_means;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"A1", a1_kinematics},
      {"A2", a2_channel},
      {"A3", [&] { return a3_determinism(cli); }},
      {"A4", a4_perfect_channel},
      {"A5", [&] { return a5_prr_trend(prr_means); }},
      {"A6", [&] { return a6_delay_trend(prr_means); }},
      {"A7", a7_lookahead},
      {"A8", a8_circling},
      {"A9", a9_metric},
      {"A10", a10_controller},
  };
  int failed = 0;
  for (const auto& [id, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    fmt::print("{} {} {}\n", id, o.pass ? "PASS" : "FAIL", o.detail);
    std::fflush(stdout);
  }
  fmt::print("{}/{} criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
