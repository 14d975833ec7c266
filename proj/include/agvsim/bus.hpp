#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "agvsim/controller.hpp"
#include "agvsim/world.hpp"

namespace agvsim {

/// Event kinds double as priority classes: at equal timestamps a lower
/// value is dispatched first, so a delivery landing on a control tick is
/// visible to that tick.
enum class EventKind : std::uint8_t {
  kMessageDelivery = 0,
  kSensorSample = 1,
  kControlTick = 2,
  kMetricSample = 3,
  kEndOfRun = 4,
};

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::kMessageDelivery: return "delivery";
    case EventKind::kSensorSample: return "sensor";
    case EventKind::kControlTick: return "control";
    case EventKind::kMetricSample: return "metric";
    case EventKind::kEndOfRun: return "end";
  }
  return "?";
}

using Payload = std::variant<PoseSample, Twist>;

struct Message {
  std::string topic;
  Payload payload;
  std::uint64_t seq{0};
  double t_created{0.0};
};

struct Event {
  double t_due{0.0};
  EventKind kind{EventKind::kEndOfRun};
  std::uint64_t seq{0};  // assigned by the queue
  std::optional<Message> message;

  struct Key {
    double t_due;
    std::uint8_t priority;
    std::uint64_t seq;
    auto operator<=>(const Key&) const = default;
  };
  Key key() const { return {t_due, static_cast<std::uint8_t>(kind), seq}; }
};

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SimClock {
  double now{0.0};
  double frame{0.001};
};

/// Priority queue with a strict total order on (t_due, priority, seq).
class EventQueue {
 public:
  explicit EventQueue(std::size_t max_pending = 1'000'000) : max_pending_(max_pending) {}

  std::uint64_t schedule(Event ev) {
    if (ev.t_due < clock_.now)
      throw std::invalid_argument("schedule: event due before the current time");
    if (heap_.size() >= max_pending_)
      throw SimulationError("event storm: pending events exceeded " +
                            std::to_string(max_pending_));
    const std::uint64_t seq = next_seq_++;
    ev.seq = seq;
    heap_.push(std::move(ev));
    return seq;
  }

  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }
  double now() const { return clock_.now; }
  const SimClock& clock() const { return clock_; }
  void set_frame(double frame) { clock_.frame = frame; }

  const Event& top() const { return heap_.top(); }

  Event pop() {
    Event ev = heap_.top();
    heap_.pop();
    clock_.now = ev.t_due;
    return ev;
  }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const { return a.key() > b.key(); }
  };
  std::priority_queue<Event, std::vector<Event>, Later> heap_;
  std::uint64_t next_seq_{0};
  std::size_t max_pending_;
  SimClock clock_;
};

/// Outcome of pushing a message through a network bridge.
struct BridgeResult {
  bool delivered{false};
  double at{0.0};
};

/// Topic router. Local topics deliver at the publish time; bridged topics
/// ask a link for a fate and re-publish on the destination topic.
class TopicBus {
 public:
  using Handler = std::function<void(const Message&)>;
  using Link = std::function<BridgeResult(const Message&, double t)>;

  explicit TopicBus(EventQueue& queue) : queue_(queue) {}

  void add_topic(const std::string& topic) { topics_.try_emplace(topic); }

  void add_bridge(const std::string& from, const std::string& to, Link link) {
    add_topic(to);
    auto& t = topics_[from];
    t.bridge_to = to;
    t.link = std::move(link);
  }

  void subscribe(const std::string& topic, Handler h) {
    find(topic).handlers.push_back(std::move(h));
  }

  void publish(const std::string& topic, Payload payload, double t) {
    Topic& entry = find(topic);
    Message msg{topic, std::move(payload), entry.next_seq++, t};
    if (entry.bridge_to.empty()) {
      queue_.schedule({t, EventKind::kMessageDelivery, 0, std::move(msg)});
      return;
    }
    const BridgeResult fate = entry.link(msg, t);
    if (!fate.delivered) return;
    if (fate.at < t) throw SimulationError("bridge delivered a message before it was sent");
    msg.topic = entry.bridge_to;
    queue_.schedule({fate.at, EventKind::kMessageDelivery, 0, std::move(msg)});
  }

  /// Runs the subscribers of the message's topic.
  void deliver(const Message& msg) {
    for (const auto& h : find(msg.topic).handlers) h(msg);
  }

  bool has_topic(const std::string& topic) const { return topics_.contains(topic); }

 private:
  struct Topic {
    std::vector<Handler> handlers;
    std::string bridge_to;
    Link link;
    std::uint64_t next_seq{0};
  };

  Topic& find(const std::string& topic) {
    auto it = topics_.find(topic);
    if (it == topics_.end()) throw std::invalid_argument("unknown topic: " + topic);
    return it->second;
  }

  EventQueue& queue_;
  std::map<std::string, Topic> topics_;
};

/// Pops events in key order until the queue drains or the clock reaches
/// `t_end`. `advance(t)` is called before each dispatch so continuous state
/// can catch up to the event time.
template <class Advance, class Dispatch>
void run_until(EventQueue& queue, double t_end, Advance&& advance, Dispatch&& dispatch) {
  if (t_end < queue.now()) throw std::invalid_argument("run_until: t_end is in the past");
  while (!queue.empty() && queue.top().t_due <= t_end) {
    Event ev = queue.pop();
    advance(ev.t_due);
    const bool keep_going = dispatch(ev);
    if (!keep_going) return;
  }
  advance(t_end);
}

}  // namespace agvsim
