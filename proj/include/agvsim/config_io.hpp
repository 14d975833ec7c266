#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "agvsim/run_config.hpp"

namespace agvsim {

namespace config_detail {

inline double parse_double(const std::string& field, std::string text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError(field, "not a number: '" + text + "'");
  }
  if (used != text.size()) throw ConfigError(field, "not a number: '" + text + "'");
  return v;
}

inline std::uint64_t parse_u64(const std::string& field, const std::string& text) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw ConfigError(field, "not a non-negative integer: '" + text + "'");
  return v;
}

inline bool parse_bool(const std::string& field, const std::string& text) {
  if (text == "true") return true;
  if (text == "false") return false;
  throw ConfigError(field, "expected true or false, got '" + text + "'");
}

inline std::string unquote(std::string s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

/// One config key: where it lives and how to move it in and out of a
/// RunConfig.
struct Field {
  std::string section;
  std::string key;
  std::string comment;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;

  std::string path() const { return section + "." + key; }
};

inline Field real(std::string section, std::string key, std::string comment,
                  double RunConfig::*member) {
  return {std::move(section), std::move(key), std::move(comment),
          [member](const RunConfig& c) { return fmt::format("{}", c.*member); },
          [member](RunConfig& c, const std::string& f, const std::string& v) {
            c.*member = parse_double(f, v);
          }};
}

template <class Get>
Field real_at(std::string section, std::string key, std::string comment, Get get) {
  return {std::move(section), std::move(key), std::move(comment),
          [get](const RunConfig& c) { return fmt::format("{}", get(c)); },
          [get](RunConfig& c, const std::string& f, const std::string& v) {
            get(c) = parse_double(f, v);
          }};
}

template <class Get>
Field flag_at(std::string section, std::string key, std::string comment, Get get) {
  return {std::move(section), std::move(key), std::move(comment),
          [get](const RunConfig& c) {
            return std::string(get(c) ? "true" : "false");
          },
          [get](RunConfig& c, const std::string& f, const std::string& v) {
            get(c) = parse_bool(f, v);
          }};
}

template <class Get>
Field text_at(std::string section, std::string key, std::string comment, Get get) {
  return {std::move(section), std::move(key), std::move(comment),
          [get](const RunConfig& c) { return get(c); },
          [get](RunConfig& c, const std::string&, const std::string& v) { get(c) = v; }};
}

template <class Enum, class Get>
Field choice_at(std::string section, std::string key, std::string comment, Get get,
                std::vector<std::pair<std::string, Enum>> names) {
  return {std::move(section), std::move(key), std::move(comment),
          [get, names](const RunConfig& c) {
            const Enum v = get(c);
            for (const auto& [n, e] : names)
              if (e == v) return n;
            return std::string("?");
          },
          [get, names](RunConfig& c, const std::string& f, const std::string& v) {
            for (const auto& [n, e] : names) {
              if (n == v) {
                get(c) = e;
                return;
              }
            }
            std::string allowed;
            for (const auto& [n, e] : names) allowed += (allowed.empty() ? "" : ", ") + n;
            throw ConfigError(f, "expected one of {" + allowed + "}, got '" + v + "'");
          }};
}

inline const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back(real("run", "duration_s", "simulated run length", &RunConfig::duration));
    f.push_back({"run", "seed", "base seed of all random streams",
                 [](const RunConfig& c) { return std::to_string(c.seed); },
                 [](RunConfig& c, const std::string& k, const std::string& v) {
                   c.seed = parse_u64(k, v);
                 }});
    f.push_back(real("run", "update_rate_hz", "physics frame rate; sets the clock frame",
                     &RunConfig::update_rate));
    f.push_back({"run", "max_pending_events", "event-storm guard",
                 [](const RunConfig& c) { return std::to_string(c.max_pending_events); },
                 [](RunConfig& c, const std::string& k, const std::string& v) {
                   c.max_pending_events = static_cast<std::size_t>(parse_u64(k, v));
                 }});

    f.push_back(real_at("geometry", "rho_m", "wheel separation",
                        [](auto& c) -> auto& { return c.geometry.rho; }));
    f.push_back(real_at("geometry", "wheel_radius_m", "",
                        [](auto& c) -> auto& { return c.geometry.wheel_radius; }));
    f.push_back(real_at("geometry", "left_x_m", "left wheel center",
                        [](auto& c) -> auto& { return c.geometry.left_center.x; }));
    f.push_back(real_at("geometry", "left_y_m", "",
                        [](auto& c) -> auto& { return c.geometry.left_center.y; }));
    f.push_back(real_at("geometry", "right_x_m", "right wheel center",
                        [](auto& c) -> auto& { return c.geometry.right_center.x; }));
    f.push_back(real_at("geometry", "right_y_m", "",
                        [](auto& c) -> auto& { return c.geometry.right_center.y; }));
    f.push_back(real_at("geometry", "mass_x_m", "mass center",
                        [](auto& c) -> auto& { return c.geometry.mass_center.x; }));
    f.push_back(real_at("geometry", "mass_y_m", "",
                        [](auto& c) -> auto& { return c.geometry.mass_center.y; }));
    f.push_back(choice_at<OmegaConvention>(
        "geometry", "omega_convention", "left_minus_right or right_minus_left",
        [](auto& c) -> auto& { return c.geometry.omega_convention; },
        {{"left_minus_right", OmegaConvention::kLeftMinusRight},
         {"right_minus_left", OmegaConvention::kRightMinusLeft}}));

    f.push_back(real_at("agv", "x0_m", "initial pose",
                        [](auto& c) -> auto& { return c.initial_pose.x; }));
    f.push_back(real_at("agv", "y0_m", "",
                        [](auto& c) -> auto& { return c.initial_pose.y; }));
    f.push_back(real_at("agv", "theta0_rad", "",
                        [](auto& c) -> auto& { return c.initial_pose.theta; }));

    f.push_back(real_at("path", "amplitude_x_m", "x* = A sin(kt + phase)",
                        [](auto& c) -> auto& { return c.path.amplitude_x; }));
    f.push_back(real_at("path", "amplitude_y_m", "y* = B sin(kt + phase) cos(kt + phase)",
                        [](auto& c) -> auto& { return c.path.amplitude_y; }));
    f.push_back(real_at("path", "rate_rad_s", "k; 2*pi/62 traverses one eight per 62 s run",
                        [](auto& c) -> auto& { return c.path.rate; }));
    f.push_back(real_at("path", "phase_rad", "",
                        [](auto& c) -> auto& { return c.path.phase; }));

    f.push_back(real_at("controller", "linear_kp", "PID on the distance error",
                        [](auto& c) -> auto& { return c.controller.gains_linear.kp; }));
    f.push_back(real_at("controller", "linear_ki", "",
                        [](auto& c) -> auto& { return c.controller.gains_linear.ki; }));
    f.push_back(real_at("controller", "linear_kd", "",
                        [](auto& c) -> auto& { return c.controller.gains_linear.kd; }));
    f.push_back(real_at("controller", "angular_kp", "PID on the heading error",
                        [](auto& c) -> auto& { return c.controller.gains_angular.kp; }));
    f.push_back(real_at("controller", "angular_ki", "",
                        [](auto& c) -> auto& { return c.controller.gains_angular.ki; }));
    f.push_back(real_at("controller", "angular_kd", "",
                        [](auto& c) -> auto& { return c.controller.gains_angular.kd; }));
    f.push_back(real_at("controller", "tau_s", "lookahead along the reference",
                        [](auto& c) -> auto& { return c.controller.tau; }));
    f.push_back(real_at("controller", "period_s", "control interval in periodic mode",
                        [](auto& c) -> auto& { return c.controller.period; }));
    f.push_back(real_at("controller", "v_max_mps", "",
                        [](auto& c) -> auto& { return c.controller.v_max; }));
    f.push_back(real_at("controller", "omega_max_rps", "",
                        [](auto& c) -> auto& { return c.controller.omega_max; }));
    f.push_back(real_at("controller", "d_tol_m", "below this distance theta_e is 0",
                        [](auto& c) -> auto& { return c.controller.d_tol; }));
    f.push_back(flag_at("controller", "allow_reverse", "",
                        [](auto& c) -> auto& { return c.controller.allow_reverse; }));
    f.push_back(flag_at("controller", "project_de", "feed d_e*cos(theta_e) to the linear PID",
                        [](auto& c) -> auto& { return c.controller.project_de; }));
    f.push_back(choice_at<ControlTrigger>(
        "controller", "trigger", "periodic or on_pose",
        [](auto& c) -> auto& { return c.controller.trigger; },
        {{"periodic", ControlTrigger::kPeriodic}, {"on_pose", ControlTrigger::kOnPose}}));

    f.push_back(choice_at<ChannelMode>(
        "channel", "mode", "fixed or markov",
        [](auto& c) -> auto& { return c.channel.mode; },
        {{"fixed", ChannelMode::kFixed}, {"markov", ChannelMode::kMarkov}}));
    f.push_back(real_at("channel", "prr", "fixed mode",
                        [](auto& c) -> auto& { return c.channel.fixed.prr; }));
    f.push_back(real_at("channel", "delay_s", "fixed mode",
                        [](auto& c) -> auto& { return c.channel.fixed.delay; }));
    f.push_back(real_at("channel", "p_good", "markov mode: stationary P[G]",
                        [](auto& c) -> auto& { return c.channel.p_good; }));
    f.push_back(real_at("channel", "mean_dwell_bad_s", "markov mode",
                        [](auto& c) -> auto& { return c.channel.mean_dwell_bad; }));
    f.push_back(real_at("channel", "good_prr", "",
                        [](auto& c) -> auto& { return c.channel.good.prr; }));
    f.push_back(real_at("channel", "good_delay_s", "",
                        [](auto& c) -> auto& { return c.channel.good.delay; }));
    f.push_back(real_at("channel", "bad_prr", "",
                        [](auto& c) -> auto& { return c.channel.bad.prr; }));
    f.push_back(real_at("channel", "bad_delay_s", "",
                        [](auto& c) -> auto& { return c.channel.bad.delay; }));
    f.push_back(real_at("channel", "tick_s", "state update interval",
                        [](auto& c) -> auto& { return c.channel.tick; }));
    f.push_back(flag_at("channel", "uplink", "impair pose traffic",
                        [](auto& c) -> auto& { return c.channel.uplink; }));
    f.push_back(flag_at("channel", "downlink", "impair command traffic",
                        [](auto& c) -> auto& { return c.channel.downlink; }));

    f.push_back(real_at("arena", "half_extent_x_m", "",
                        [](auto& c) -> auto& { return c.arena.half_extent_x; }));
    f.push_back(real_at("arena", "half_extent_y_m", "",
                        [](auto& c) -> auto& { return c.arena.half_extent_y; }));
    f.push_back(flag_at("arena", "walls", "",
                        [](auto& c) -> auto& { return c.arena.walls_enabled; }));

    f.push_back(real("sensor", "rate_hz", "pose publish rate", &RunConfig::sensor_rate));
    f.push_back(real("sensor", "noise_sigma_m", "gaussian position noise",
                     &RunConfig::noise_sigma));

    f.push_back(real("metrics", "interval_s", "trajectory sampling interval",
                     &RunConfig::metric_interval));
    f.push_back(real("metrics", "riskmap_bin_m", "", &RunConfig::riskmap_bin));
    f.push_back(real("metrics", "riskmap_window_s", "0 = instantaneous error per sample",
                     &RunConfig::riskmap_window));

    f.push_back(text_at("topics", "sensor_pose", "",
                        [](auto& c) -> auto& { return c.topics.sensor_pose; }));
    f.push_back(text_at("topics", "controller_pose", "",
                        [](auto& c) -> auto& { return c.topics.controller_pose; }));
    f.push_back(text_at("topics", "controller_cmd", "",
                        [](auto& c) -> auto& { return c.topics.controller_cmd; }));
    f.push_back(text_at("topics", "agv_cmd", "",
                        [](auto& c) -> auto& { return c.topics.agv_cmd; }));
    return f;
  }();
  return table;
}

}  // namespace config_detail

/// Reads an INI/TOML-style document. Missing keys keep their defaults;
/// unknown sections or keys are rejected.
inline RunConfig parse_config(std::istream& in, RunConfig cfg = {}) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config", e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  const auto& table = config_detail::fields();
  for (const auto& [section, keys] : tree) {
    if (keys.empty() && !keys.data().empty())
      throw ConfigError(section, "key outside of any section");
    for (const auto& [key, value] : keys) {
      const std::string path = section + "." + key;
      const auto it = std::find_if(table.begin(), table.end(),
                                   [&](const auto& f) { return f.path() == path; });
      if (it == table.end()) throw ConfigError(path, "unknown key");
      it->set(cfg, path, config_detail::unquote(value.data()));
    }
  }
  cfg.validate();
  return cfg;
}

inline RunConfig parse_config(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  return parse_config(in);
}

/// Writes every key, so the output documents all defaults.
inline std::string serialize_config(const RunConfig& cfg) {
  std::string out;
  std::string section;
  for (const auto& f : config_detail::fields()) {
    if (f.section != section) {
      if (!section.empty()) out += "\n";
      section = f.section;
      out += "[" + section + "]\n";
    }
    if (!f.comment.empty()) out += "# " + f.comment + "\n";
    out += f.key + " = " + f.get(cfg) + "\n";
  }
  return out;
}

}  // namespace agvsim
