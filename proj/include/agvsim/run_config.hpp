#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "agvsim/channel.hpp"
#include "agvsim/controller.hpp"
#include "agvsim/trajectory.hpp"
#include "agvsim/world.hpp"

namespace agvsim {

/// Invalid configuration; `what()` starts with the offending field path.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& field, const std::string& reason)
      : std::invalid_argument(field + ": " + reason), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class ChannelMode { kFixed, kMarkov };

struct ChannelSpec {
  ChannelMode mode{ChannelMode::kFixed};
  LinkQuality fixed{1.0, 0.0};
  double p_good{0.75};
  double mean_dwell_bad{1.0};
  LinkQuality good{1.0, 0.0};
  LinkQuality bad{0.5, 0.5};
  double tick{0.001};
  bool uplink{true};
  bool downlink{true};

  GilbertElliott build() const {
    if (mode == ChannelMode::kFixed) {
      GilbertElliott ch = agvsim::fixed(fixed);
      ch.tick = tick;
      return ch;
    }
    return from_stationary(p_good, mean_dwell_bad, tick, good, bad);
  }
};

struct Topics {
  std::string sensor_pose{"/network/pose"};
  std::string controller_pose{"/controller/pose"};
  std::string controller_cmd{"/controller/cmd_vel"};
  std::string agv_cmd{"/network/cmd_vel"};
};

struct RunConfig {
  double duration{62.0};
  AgvGeometry geometry;
  Pose initial_pose;
  EightPath path;
  ControllerConfig controller;
  ChannelSpec channel;
  Arena arena;
  double sensor_rate{2.0};
  double metric_interval{0.02};
  double riskmap_bin{1.0};
  double riskmap_window{0.0};
  double update_rate{1000.0};
  double noise_sigma{0.0};
  std::uint64_t seed{0};
  std::size_t max_pending_events{1'000'000};
  Topics topics;

  void validate() const {
    const auto check = [](const char* field, auto&& fn) {
      try {
        fn();
      } catch (const ConfigError&) {
        throw;
      } catch (const std::invalid_argument& e) {
        throw ConfigError(field, e.what());
      }
    };
    if (!(duration > 0.0)) throw ConfigError("run.duration_s", "must be > 0");
    if (!(sensor_rate > 0.0)) throw ConfigError("sensor.rate_hz", "must be > 0");
    if (!(metric_interval > 0.0)) throw ConfigError("metrics.interval_s", "must be > 0");
    if (!(riskmap_bin > 0.0)) throw ConfigError("metrics.riskmap_bin_m", "must be > 0");
    if (!(riskmap_window >= 0.0)) throw ConfigError("metrics.riskmap_window_s", "must be >= 0");
    if (!(update_rate > 0.0)) throw ConfigError("run.update_rate_hz", "must be > 0");
    if (!(noise_sigma >= 0.0)) throw ConfigError("sensor.noise_sigma_m", "must be >= 0");
    if (max_pending_events == 0) throw ConfigError("run.max_pending_events", "must be > 0");
    check("geometry", [&] { geometry.validate(); });
    check("path", [&] { path.validate(); });
    check("controller", [&] { controller.validate(); });
    check("channel", [&] { channel.build(); });
    check("arena", [&] { arena.validate(); });
  }
};

}  // namespace agvsim
