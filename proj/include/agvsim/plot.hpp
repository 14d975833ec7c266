#pragma once

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "agvsim/metrics.hpp"
#include "agvsim/sweep.hpp"
#include "agvsim/trajectory.hpp"

namespace agvsim::svg {

/// Maps a data rectangle onto a fixed-size canvas with a margin for axes.
class Frame {
 public:
  Frame(double x0, double x1, double y0, double y1, double width = 640, double height = 480)
      : x0_(x0), x1_(x1 > x0 ? x1 : x0 + 1), y0_(y0), y1_(y1 > y0 ? y1 : y0 + 1), w_(width),
        h_(height) {}

  double px(double x) const { return kMargin + (x - x0_) / (x1_ - x0_) * (w_ - 2 * kMargin); }
  double py(double y) const { return h_ - kMargin - (y - y0_) / (y1_ - y0_) * (h_ - 2 * kMargin); }

  std::string open(const std::string& title, const std::string& xlabel,
                   const std::string& ylabel) const {
    std::string s = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
        "font-family=\"sans-serif\" font-size=\"12\">\n"
        "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        "<text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
        w_, h_, w_ / 2, title);
    s += fmt::format(
        "<g class=\"axes\" stroke=\"black\"><line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\"/>"
        "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{3}\"/></g>\n",
        kMargin, h_ - kMargin, w_ - kMargin, kMargin);
    s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", w_ / 2,
                     h_ - 12, xlabel);
    s += fmt::format(
        "<text x=\"14\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 14 {0})\">{1}"
        "</text>\n",
        h_ / 2, ylabel);
    s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{:g}</text>\n", px(x0_),
                     h_ - kMargin + 16, x0_);
    s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{:g}</text>\n", px(x1_),
                     h_ - kMargin + 16, x1_);
    s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{:g}</text>\n", kMargin - 4,
                     py(y0_) + 4, y0_);
    s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{:g}</text>\n", kMargin - 4,
                     py(y1_) + 4, y1_);
    return s;
  }

  static std::string close() { return "</svg>\n"; }

 private:
  static constexpr double kMargin = 50;
  double x0_, x1_, y0_, y1_, w_, h_;
};

inline std::string polyline(const Frame& f, const std::vector<Vec2>& pts, const char* cls,
                            const char* color) {
  std::string s = fmt::format("<polyline class=\"{}\" fill=\"none\" stroke=\"{}\" points=\"", cls,
                              color);
  for (const auto& p : pts) s += fmt::format("{:.2f},{:.2f} ", f.px(p.x), f.py(p.y));
  s += "\"/>\n";
  return s;
}

/// Blue-to-red ramp for t in [0, 1].
inline std::string color_ramp(double t) {
  t = std::clamp(std::isfinite(t) ? t : 0.0, 0.0, 1.0);
  const int r = static_cast<int>(std::lround(255 * t));
  const int b = static_cast<int>(std::lround(255 * (1 - t)));
  return fmt::format("rgb({},60,{})", r, b);
}

/// Planned path in green, driven path in blue.
inline std::string trajectory(const TrajectoryLog& log, const std::string& title = "trajectory") {
  std::vector<Vec2> planned, actual;
  double lo = -1, hi = 1;
  for (const auto& s : log.samples) {
    planned.push_back(s.reference);
    actual.push_back(s.pose.position());
    for (double v : {s.reference.x, s.reference.y, s.pose.x, s.pose.y}) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  const Frame f(lo, hi, lo, hi, 560, 560);
  return f.open(title, "x [m]", "y [m]") + polyline(f, planned, "planned", "green") +
         polyline(f, actual, "actual", "blue") + Frame::close();
}

struct CurvePoint {
  double x{0.0};
  double mean{0.0};
  double sd{0.0};
};

/// Mean epsilon against one sweep axis, with +-1 sd bars.
inline std::string curve(const std::vector<CurvePoint>& pts, const std::string& title,
                         const std::string& xlabel) {
  double x0 = 0, x1 = 1, y1 = 1;
  if (!pts.empty()) {
    x0 = x1 = pts.front().x;
    for (const auto& p : pts) {
      x0 = std::min(x0, p.x);
      x1 = std::max(x1, p.x);
      if (std::isfinite(p.mean)) y1 = std::max(y1, p.mean + (std::isfinite(p.sd) ? p.sd : 0.0));
    }
  }
  const Frame f(x0, x1, 0.0, y1 * 1.05);
  std::string s = f.open(title, xlabel, "epsilon [m]");
  std::vector<Vec2> line;
  for (const auto& p : pts) {
    if (!std::isfinite(p.mean)) continue;
    line.push_back({p.x, p.mean});
    s += fmt::format(
        "<line class=\"errorbar\" x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" "
        "stroke=\"gray\"/>\n",
        f.px(p.x), f.py(p.mean - p.sd), f.py(p.mean + p.sd));
    s += fmt::format("<circle class=\"mean\" cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"black\"/>\n",
                     f.px(p.x), f.py(p.mean));
  }
  std::sort(line.begin(), line.end(), [](Vec2 a, Vec2 b) { return a.x < b.x; });
  return s + polyline(f, line, "trend", "black") + Frame::close();
}

/// One rectangle per (PRR, tau) cell; per-column minima get a red outline.
inline std::string heatmap(const std::vector<csv::HeatmapCell>& cells) {
  std::set<double> prrs, taus;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& c : cells) {
    prrs.insert(c.prr);
    taus.insert(c.tau);
    if (std::isfinite(c.mean)) {
      lo = std::min(lo, c.mean);
      hi = std::max(hi, c.mean);
    }
  }
  const std::vector<double> px(prrs.begin(), prrs.end()), ty(taus.begin(), taus.end());
  const Frame f(0.0, static_cast<double>(std::max<std::size_t>(px.size(), 1)), 0.0,
                static_cast<double>(std::max<std::size_t>(ty.size(), 1)));
  std::string s = f.open("mean epsilon over (PRR, tau)", "PRR", "tau [s]");
  const auto index = [](const std::vector<double>& v, double x) {
    return static_cast<double>(std::lower_bound(v.begin(), v.end(), x) - v.begin());
  };
  for (const auto& c : cells) {
    const double i = index(px, c.prr), j = index(ty, c.tau);
    const double t = hi > lo ? (c.mean - lo) / (hi - lo) : 0.0;
    s += fmt::format(
        "<rect class=\"cell{}\" x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" "
        "fill=\"{}\" stroke=\"{}\" stroke-width=\"{}\"/>\n",
        c.best ? " best" : "", f.px(i), f.py(j + 1), f.px(i + 1) - f.px(i), f.py(j) - f.py(j + 1),
        color_ramp(t), c.best ? "red" : "white", c.best ? 3 : 1);
    s += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{:.2f}</text>\n",
                     f.px(i + 0.5), f.py(j + 0.5) + 4, c.mean);
  }
  for (std::size_t i = 0; i < px.size(); ++i)
    s += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{:g}</text>\n",
                     f.px(i + 0.5), f.py(0) + 30, px[i]);
  for (std::size_t j = 0; j < ty.size(); ++j)
    s += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">{:g}</text>\n",
                     f.px(0) - 20, f.py(j + 0.5) + 4, ty[j]);
  return s + Frame::close();
}

/// One dot per bad-state bin, colored by its mean error.
inline std::string risk_map(const std::vector<RiskMapBin>& bins, const EightPath& path) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& b : bins) {
    lo = std::min(lo, b.mean_eps_bad);
    hi = std::max(hi, b.mean_eps_bad);
  }
  const double ex = path.amplitude_x + 2, ey = path.amplitude_y + 2;
  const Frame f(-ex, ex, -ey, ey, 560, 560);
  std::string s = f.open("bad-state tracking error", "x [m]", "y [m]");
  std::vector<Vec2> ref;
  const int n = 400;
  for (int i = 0; i <= n; ++i) ref.push_back(reference_point(path, path.period() * i / n));
  s += polyline(f, ref, "planned", "lightgray");
  for (const auto& b : bins) {
    const double t = hi > lo ? (b.mean_eps_bad - lo) / (hi - lo) : 0.0;
    s += fmt::format(
        "<circle class=\"bin\" cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"4\" fill=\"{}\">"
        "<title>{:.3f} m, n={}</title></circle>\n",
        f.px(b.center.x), f.py(b.center.y), color_ramp(t), b.mean_eps_bad, b.count);
  }
  return s + Frame::close();
}

}  // namespace agvsim::svg
