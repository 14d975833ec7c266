#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "agvsim/bus.hpp"
#include "agvsim/channel.hpp"
#include "agvsim/controller.hpp"
#include "agvsim/metrics.hpp"
#include "agvsim/run_config.hpp"
#include "agvsim/trajectory.hpp"
#include "agvsim/world.hpp"

namespace agvsim {

/// One dispatched event as seen by the run log.
struct RunRecord {
  double t{0.0};
  EventKind kind{EventKind::kEndOfRun};
  Pose pose;
  Vec2 reference;
  Twist command;
  ChannelState channel{ChannelState::kGood};
};

struct RunCounters {
  std::uint64_t sensor_samples{0};
  std::uint64_t poses_delivered{0};
  std::uint64_t commands_sent{0};
  std::uint64_t commands_delivered{0};
  std::uint64_t collisions{0};
};

struct RunOutput {
  TrajectoryLog trajectory;
  std::vector<RunRecord> events;
  std::vector<StateChange> channel_log;
  RunCounters counters;
};

/// One closed-loop run: sensor -> network -> controller -> network -> AGV,
/// all driven by a single event queue. The vehicle pose is integrated
/// exactly between events under the last command received.
class Simulation {
 public:
  explicit Simulation(RunConfig cfg, bool record_events = true)
      : cfg_(validated(std::move(cfg))),
        record_events_(record_events),
        channel_(cfg_.channel.build()),
        realization_(channel_, cfg_.seed),
        uplink_rng_(make_stream(cfg_.seed, StreamId::kUplink)),
        downlink_rng_(make_stream(cfg_.seed, StreamId::kDownlink)),
        noise_rng_(make_stream(cfg_.seed, StreamId::kNoise)),
        queue_(cfg_.max_pending_events),
        bus_(queue_),
        controller_(cfg_.controller, cfg_.path),
        pose_(cfg_.initial_pose) {
    pose_.theta = wrap_angle(pose_.theta);
    queue_.set_frame(1.0 / cfg_.update_rate);
    wire();
  }

  RunOutput run() {
    if (started_) throw SimulationError("Simulation::run called twice");
    started_ = true;
    queue_.schedule({0.0, EventKind::kSensorSample, 0, std::nullopt});
    if (cfg_.controller.trigger == ControlTrigger::kPeriodic)
      queue_.schedule({0.0, EventKind::kControlTick, 0, std::nullopt});
    queue_.schedule({0.0, EventKind::kMetricSample, 0, std::nullopt});
    queue_.schedule({cfg_.duration, EventKind::kEndOfRun, 0, std::nullopt});

    run_until(
        queue_, cfg_.duration, [this](double t) { advance_physics(t); },
        [this](const Event& ev) { return dispatch(ev); });

    realization_.step(channel_, cfg_.duration);
    out_.channel_log = realization_.state_log();
    return std::move(out_);
  }

  const Pose& pose() const { return pose_; }
  const Twist& active_command() const { return active_cmd_; }

 private:
  static RunConfig validated(RunConfig cfg) {
    cfg.validate();
    return cfg;
  }

  void wire() {
    const Topics& tp = cfg_.topics;
    bus_.add_bridge(tp.sensor_pose, tp.controller_pose, [this](const Message&, double t) {
      return link(cfg_.channel.uplink, uplink_rng_, t);
    });
    bus_.add_bridge(tp.controller_cmd, tp.agv_cmd, [this](const Message&, double t) {
      return link(cfg_.channel.downlink, downlink_rng_, t);
    });
    bus_.subscribe(tp.controller_pose, [this](const Message& m) { on_pose(m); });
    bus_.subscribe(tp.agv_cmd, [this](const Message& m) { on_command(m); });
  }

  BridgeResult link(bool impaired, std::mt19937_64& rng, double t) {
    if (!impaired) return {true, t};
    const Delivery d = transmit(channel_, realization_, rng, t);
    return {d.delivered, d.at};
  }

  void advance_physics(double t) {
    if (t <= physics_time_) return;
    pose_ = integrate(pose_, active_cmd_, t - physics_time_);
    physics_time_ = t;
    const auto [clamped, hit] = clamp_to_arena(pose_, cfg_.arena);
    pose_ = clamped;
    if (hit && !touching_wall_) ++out_.counters.collisions;
    touching_wall_ = hit;
    collided_since_sample_ = collided_since_sample_ || hit;
  }

  bool dispatch(const Event& ev) {
    const double now = ev.t_due;
    switch (ev.kind) {
      case EventKind::kMessageDelivery:
        bus_.deliver(*ev.message);
        break;
      case EventKind::kSensorSample:
        on_sensor(now);
        break;
      case EventKind::kControlTick:
        publish_command(now);
        schedule_periodic(EventKind::kControlTick, ++control_ticks_, cfg_.controller.period);
        break;
      case EventKind::kMetricSample:
        on_metric(now);
        break;
      case EventKind::kEndOfRun:
        record(ev.kind, now);
        return false;
    }
    if (ev.kind != EventKind::kMetricSample) record(ev.kind, now);
    return true;
  }

  // Periodic events are placed at index * interval to avoid accumulating
  // floating-point drift.
  void schedule_periodic(EventKind kind, std::uint64_t index, double interval) {
    double t = static_cast<double>(index) * interval;
    if (t > cfg_.duration + 1e-9) return;
    t = std::min(t, cfg_.duration);
    queue_.schedule({t, kind, 0, std::nullopt});
  }

  void on_sensor(double now) {
    PoseSample sample{pose_, now};
    if (cfg_.noise_sigma > 0.0) {
      std::normal_distribution<double> noise(0.0, cfg_.noise_sigma);
      sample.pose.x += noise(noise_rng_);
      sample.pose.y += noise(noise_rng_);
    }
    ++out_.counters.sensor_samples;
    bus_.publish(cfg_.topics.sensor_pose, sample, now);
    schedule_periodic(EventKind::kSensorSample, out_.counters.sensor_samples,
                      1.0 / cfg_.sensor_rate);
  }

  void on_pose(const Message& m) {
    ++out_.counters.poses_delivered;
    const bool fresh = controller_.on_pose(std::get<PoseSample>(m.payload));
    if (fresh && cfg_.controller.trigger == ControlTrigger::kOnPose)
      publish_command(queue_.now());
  }

  void publish_command(double now) {
    const Twist cmd = controller_.step(now);
    ++out_.counters.commands_sent;
    bus_.publish(cfg_.topics.controller_cmd, cmd, now);
  }

  // The newest arrival replaces whatever the vehicle was doing.
  void on_command(const Message& m) {
    ++out_.counters.commands_delivered;
    active_cmd_ = std::get<Twist>(m.payload);
  }

  void on_metric(double now) {
    realization_.step(channel_, now);
    out_.trajectory.samples.push_back({now, pose_, reference_point(cfg_.path, now),
                                       realization_.state(), collided_since_sample_});
    collided_since_sample_ = touching_wall_;
    record(EventKind::kMetricSample, now);
    schedule_periodic(EventKind::kMetricSample, ++metric_samples_, cfg_.metric_interval);
  }

  void record(EventKind kind, double now) {
    if (!record_events_) return;
    realization_.step(channel_, now);
    out_.events.push_back(
        {now, kind, pose_, reference_point(cfg_.path, now), active_cmd_, realization_.state()});
  }

  RunConfig cfg_;
  bool record_events_;
  GilbertElliott channel_;
  ChannelRealization realization_;
  std::mt19937_64 uplink_rng_;
  std::mt19937_64 downlink_rng_;
  std::mt19937_64 noise_rng_;
  EventQueue queue_;
  TopicBus bus_;
  Controller controller_;

  Pose pose_;
  Twist active_cmd_;
  double physics_time_{0.0};
  bool touching_wall_{false};
  bool collided_since_sample_{false};
  bool started_{false};
  std::uint64_t control_ticks_{0};
  std::uint64_t metric_samples_{0};
  RunOutput out_;
};

/// Convenience wrapper: validate, simulate, and score one configuration.
struct RunResult {
  RunOutput output;
  double eps{0.0};
};

inline RunResult run(const RunConfig& cfg, bool record_events = false) {
  Simulation sim(cfg, record_events);
  RunResult r;
  r.output = sim.run();
  r.eps = epsilon(r.output.trajectory);
  return r;
}

}  // namespace agvsim
