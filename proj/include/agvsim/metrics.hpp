#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "agvsim/channel.hpp"
#include "agvsim/world.hpp"

namespace agvsim {

struct TrajectorySample {
  double t{0.0};
  Pose pose;
  Vec2 reference;
  ChannelState channel{ChannelState::kGood};
  bool collided{false};

  /// Distance to the reference at the same instant (zero lookahead).
  double error() const { return distance(reference, pose.position()); }
};

struct TrajectoryLog {
  std::vector<TrajectorySample> samples;
};

/// Time-averaged distance between actual and reference path, trapezoidal
/// rule over the sample instants.
inline double epsilon(const TrajectoryLog& log) {
  const auto& s = log.samples;
  if (s.size() < 2) throw std::invalid_argument("epsilon: need at least two samples");
  const double span = s.back().t - s.front().t;
  if (!(span > 0.0)) throw std::invalid_argument("epsilon: log must cover a positive time span");
  double area = 0.0;
  double prev = s.front().error();
  for (std::size_t i = 1; i < s.size(); ++i) {
    const double dt = s[i].t - s[i - 1].t;
    if (!(dt > 0.0)) throw std::invalid_argument("epsilon: sample times must be increasing");
    const double cur = s[i].error();
    area += 0.5 * (prev + cur) * dt;
    prev = cur;
  }
  return area / span;
}

struct Summary {
  double mean{0.0};
  double sd{0.0};  // sample standard deviation, 0 for a single run
  std::size_t n{0};
  double min{0.0};
  double max{0.0};
};

inline Summary summarize(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("summarize: no values");
  Summary s;
  s.n = values.size();
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(sq / static_cast<double>(s.n - 1));
  }
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  s.min = *lo;
  s.max = *hi;
  return s;
}

/// Groups (key, epsilon) pairs by key and summarizes each group.
template <class Key>
std::map<Key, Summary> aggregate(const std::vector<std::pair<Key, double>>& runs) {
  std::map<Key, std::vector<double>> groups;
  for (const auto& [key, eps] : runs) groups[key].push_back(eps);
  std::map<Key, Summary> out;
  for (const auto& [key, values] : groups) out.emplace(key, summarize(values));
  return out;
}

struct RiskMapBin {
  Vec2 center;
  double mean_eps_bad{0.0};
  std::size_t count{0};
};

namespace detail {

inline std::pair<std::int64_t, std::int64_t> bin_of(Vec2 p, double bin_size) {
  return {static_cast<std::int64_t>(std::floor(p.x / bin_size)),
          static_cast<std::int64_t>(std::floor(p.y / bin_size))};
}

inline std::vector<RiskMapBin> finish_bins(
    const std::map<std::pair<std::int64_t, std::int64_t>, std::pair<double, std::size_t>>& acc,
    double bin_size) {
  std::vector<RiskMapBin> out;
  out.reserve(acc.size());
  for (const auto& [idx, sum] : acc) {
    out.push_back({{(static_cast<double>(idx.first) + 0.5) * bin_size,
                    (static_cast<double>(idx.second) + 0.5) * bin_size},
                   sum.first / static_cast<double>(sum.second),
                   sum.second});
  }
  return out;
}

}  // namespace detail

/// Mean tracking error of bad-state samples, binned by the reference
/// position the vehicle should have been at.
inline std::vector<RiskMapBin> risk_map(const std::vector<TrajectoryLog>& logs, double bin_size) {
  if (!(bin_size > 0.0)) throw std::invalid_argument("risk_map: bin_size must be > 0");
  std::map<std::pair<std::int64_t, std::int64_t>, std::pair<double, std::size_t>> acc;
  for (const auto& log : logs) {
    for (const auto& s : log.samples) {
      if (s.channel != ChannelState::kBad) continue;
      auto& slot = acc[detail::bin_of(s.reference, bin_size)];
      slot.first += s.error();
      ++slot.second;
    }
  }
  return detail::finish_bins(acc, bin_size);
}

/// Like risk_map, but each bad-state sample contributes the mean error over
/// the trailing `window` seconds instead of its instantaneous error.
inline std::vector<RiskMapBin> risk_map_windowed(const std::vector<TrajectoryLog>& logs,
                                                 double bin_size, double window) {
  if (!(bin_size > 0.0)) throw std::invalid_argument("risk_map: bin_size must be > 0");
  if (!(window >= 0.0)) throw std::invalid_argument("risk_map: window must be >= 0");
  std::map<std::pair<std::int64_t, std::int64_t>, std::pair<double, std::size_t>> acc;
  for (const auto& log : logs) {
    std::deque<std::pair<double, double>> recent;
    double running = 0.0;
    for (const auto& s : log.samples) {
      recent.emplace_back(s.t, s.error());
      running += s.error();
      while (recent.front().first < s.t - window) {
        running -= recent.front().second;
        recent.pop_front();
      }
      if (s.channel != ChannelState::kBad) continue;
      auto& slot = acc[detail::bin_of(s.reference, bin_size)];
      slot.first += running / static_cast<double>(recent.size());
      ++slot.second;
    }
  }
  return detail::finish_bins(acc, bin_size);
}

/// Median over samples of the vehicle's distance from the origin.
inline double median_distance_from_origin(const TrajectoryLog& log) {
  if (log.samples.empty()) throw std::invalid_argument("median: empty log");
  std::vector<double> d;
  d.reserve(log.samples.size());
  for (const auto& s : log.samples) d.push_back(norm(s.pose.position()));
  const auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  if (d.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(d.begin(), mid);
  return 0.5 * (lower + upper);
}

}  // namespace agvsim
