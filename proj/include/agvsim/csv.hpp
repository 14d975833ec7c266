#pragma once

#include <fmt/format.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "agvsim/channel.hpp"
#include "agvsim/metrics.hpp"

namespace agvsim::csv {

inline constexpr const char* kTrajectoryHeader =
    "t_s,x_m,y_m,theta_rad,xref_m,yref_m,de_m,channel_state,collided";
inline constexpr const char* kChannelHeader = "t_s,state";
inline constexpr const char* kRiskMapHeader = "bin_x_m,bin_y_m,mean_eps_m,count";

/// Writes to a sibling temporary and renames it into place, so readers
/// never observe a half-written file.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

inline std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

inline std::string trajectory(const TrajectoryLog& log) {
  std::string out = std::string(kTrajectoryHeader) + "\n";
  for (const auto& s : log.samples) {
    out += fmt::format("{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{},{}\n", s.t, s.pose.x,
                       s.pose.y, s.pose.theta, s.reference.x, s.reference.y, s.error(),
                       to_char(s.channel), s.collided ? 1 : 0);
  }
  return out;
}

inline std::string channel(const std::vector<StateChange>& log) {
  std::string out = std::string(kChannelHeader) + "\n";
  for (const auto& c : log) out += fmt::format("{:.6f},{}\n", c.t, to_char(c.state));
  return out;
}

inline std::string risk_map(const std::vector<RiskMapBin>& bins) {
  std::string out = std::string(kRiskMapHeader) + "\n";
  for (const auto& b : bins)
    out += fmt::format("{:.6f},{:.6f},{:.6f},{}\n", b.center.x, b.center.y, b.mean_eps_bad,
                       b.count);
  return out;
}

inline void expect_header(const std::vector<std::string>& rows, const char* header,
                          const std::string& what) {
  if (rows.empty() || rows.front() != header)
    throw std::runtime_error(what + ": unexpected header");
}

/// Parses a trajectory CSV back into a log (for plotting).
inline TrajectoryLog parse_trajectory(const std::string& text) {
  const auto rows = lines(text);
  expect_header(rows, kTrajectoryHeader, "trajectory.csv");
  TrajectoryLog log;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto c = split(rows[i]);
    if (c.size() != 9) throw std::runtime_error("trajectory.csv: bad row " + std::to_string(i));
    TrajectorySample s;
    s.t = std::stod(c[0]);
    s.pose = {std::stod(c[1]), std::stod(c[2]), std::stod(c[3])};
    s.reference = {std::stod(c[4]), std::stod(c[5])};
    s.channel = c[7] == "B" ? ChannelState::kBad : ChannelState::kGood;
    s.collided = c[8] == "1";
    log.samples.push_back(s);
  }
  return log;
}

inline std::vector<RiskMapBin> parse_risk_map(const std::string& text) {
  const auto rows = lines(text);
  expect_header(rows, kRiskMapHeader, "riskmap.csv");
  std::vector<RiskMapBin> bins;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto c = split(rows[i]);
    if (c.size() != 4) throw std::runtime_error("riskmap.csv: bad row " + std::to_string(i));
    bins.push_back({{std::stod(c[0]), std::stod(c[1])}, std::stod(c[2]),
                    static_cast<std::size_t>(std::stoull(c[3]))});
  }
  return bins;
}

}  // namespace agvsim::csv
