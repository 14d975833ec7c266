#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace agvsim {

enum class ChannelState : std::uint8_t { kGood, kBad };

inline char to_char(ChannelState s) { return s == ChannelState::kGood ? 'G' : 'B'; }

struct LinkQuality {
  double prr{1.0};
  double delay{0.0};

  void validate() const {
    if (!(prr >= 0.0 && prr <= 1.0)) throw std::invalid_argument("link prr must be in [0, 1]");
    if (!(delay >= 0.0) || !std::isfinite(delay))
      throw std::invalid_argument("link delay must be finite and >= 0");
  }
  friend bool operator==(const LinkQuality&, const LinkQuality&) = default;
};

/// Two-state Markov link. Transitions are sampled once per `tick`.
struct GilbertElliott {
  double p_gb{0.0};
  double p_bg{0.0};
  LinkQuality good;
  LinkQuality bad;
  double tick{0.001};
  /// Draw the initial state from the stationary law instead of starting in G.
  bool stationary_start{false};

  const LinkQuality& quality(ChannelState s) const {
    return s == ChannelState::kGood ? good : bad;
  }

  /// Stationary probability of G; 1 for a chain that never leaves its state.
  double stationary_good() const {
    const double total = p_gb + p_bg;
    return total > 0.0 ? p_bg / total : 1.0;
  }

  void validate() const {
    if (!(p_gb >= 0.0 && p_gb <= 1.0) || !(p_bg >= 0.0 && p_bg <= 1.0))
      throw std::invalid_argument("channel transition probabilities must be in [0, 1]");
    if (!(tick > 0.0)) throw std::invalid_argument("channel.tick must be > 0");
    good.validate();
    bad.validate();
  }
};

/// Builds a chain with stationary P[G] = p_good whose bad-state sojourns last
/// `mean_dwell_bad` seconds on average.
inline GilbertElliott from_stationary(double p_good, double mean_dwell_bad, double tick,
                                      LinkQuality good, LinkQuality bad) {
  if (!(p_good > 0.0 && p_good < 1.0))
    throw std::invalid_argument("from_stationary: p_good must be in (0, 1); use fixed()");
  if (!(tick > 0.0)) throw std::invalid_argument("from_stationary: tick must be > 0");
  if (!(mean_dwell_bad >= tick))
    throw std::invalid_argument("from_stationary: mean_dwell_bad must be >= tick");
  GilbertElliott ch;
  ch.p_bg = tick / mean_dwell_bad;
  ch.p_gb = ch.p_bg * (1.0 - p_good) / p_good;
  if (ch.p_gb > 1.0)
    throw std::invalid_argument("from_stationary: implied good->bad probability exceeds 1");
  ch.good = good;
  ch.bad = bad;
  ch.tick = tick;
  ch.stationary_start = true;
  ch.validate();
  return ch;
}

/// A chain pinned to one quality for the whole run.
inline GilbertElliott fixed(LinkQuality quality) {
  quality.validate();
  GilbertElliott ch;
  ch.good = quality;
  ch.bad = quality;
  return ch;
}

/// Independent random streams of one run.
enum class StreamId : std::uint32_t { kTransitions = 1, kUplink = 2, kDownlink = 3, kNoise = 4 };

inline std::mt19937_64 make_stream(std::uint64_t seed, StreamId id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(id)};
  return std::mt19937_64(seq);
}

/// Uniform variate on (0, 1] with 53 random bits.
inline double uniform_open_closed(std::mt19937_64& rng) {
  return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;
}

struct StateChange {
  double t{0.0};
  ChannelState state{ChannelState::kGood};
};

/// One sampled trajectory of the chain.
class ChannelRealization {
 public:
  ChannelRealization(const GilbertElliott& ch, std::uint64_t seed)
      : rng_(make_stream(seed, StreamId::kTransitions)) {
    if (ch.stationary_start && uniform_open_closed(rng_) > ch.stationary_good())
      state_ = ChannelState::kBad;
    log_.push_back({0.0, state_});
  }

  ChannelState state() const { return state_; }
  std::int64_t ticks() const { return ticks_; }
  const std::vector<StateChange>& state_log() const { return log_; }

  /// Advances tick by tick up to and including `until`.
  void step(const GilbertElliott& ch, double until) {
    if (ch.p_gb == 0.0 && ch.p_bg == 0.0) {
      // Degenerate chain: no draws, just move the clock.
      const auto target = static_cast<std::int64_t>(std::floor(until / ch.tick + 1e-9));
      if (target > ticks_) ticks_ = target;
      return;
    }
    while (static_cast<double>(ticks_ + 1) * ch.tick <= until + 1e-12) {
      ++ticks_;
      const double u = uniform_open_closed(rng_);
      const double p = state_ == ChannelState::kGood ? ch.p_gb : ch.p_bg;
      if (u <= p) {
        state_ = state_ == ChannelState::kGood ? ChannelState::kBad : ChannelState::kGood;
        log_.push_back({static_cast<double>(ticks_) * ch.tick, state_});
      }
    }
  }

 private:
  std::mt19937_64 rng_;
  ChannelState state_{ChannelState::kGood};
  std::int64_t ticks_{0};
  std::vector<StateChange> log_;
};

inline void step(const GilbertElliott& ch, ChannelRealization& real, double until) {
  real.step(ch, until);
}

struct Delivery {
  bool delivered{false};
  double at{0.0};
  ChannelState state{ChannelState::kGood};
};

/// Decides the fate of one message sent at `t_send`: the chain state at send
/// time fixes both the drop probability and the latency.
inline Delivery transmit(const GilbertElliott& ch, ChannelRealization& real, std::mt19937_64& stream,
                         double t_send) {
  real.step(ch, t_send);
  const ChannelState s = real.state();
  const LinkQuality& q = ch.quality(s);
  const double u = uniform_open_closed(stream);
  if (u > q.prr) return {false, t_send, s};
  return {true, t_send + q.delay, s};
}

/// Mean length of the completed sojourns in `which` (the trailing, censored
/// one is skipped). Returns 0 if no sojourn completed.
inline double mean_dwell(const std::vector<StateChange>& log, ChannelState which) {
  double total = 0.0;
  int visits = 0;
  for (std::size_t i = 0; i + 1 < log.size(); ++i) {
    if (log[i].state != which) continue;
    total += log[i + 1].t - log[i].t;
    ++visits;
  }
  return visits > 0 ? total / visits : 0.0;
}

/// Fraction of [0, t_end] spent in `which`.
inline double occupancy(const std::vector<StateChange>& log, ChannelState which, double t_end) {
  double total = 0.0;
  for (std::size_t i = 0; i < log.size(); ++i) {
    if (log[i].state != which) continue;
    const double end = i + 1 < log.size() ? log[i + 1].t : t_end;
    total += end - log[i].t;
  }
  return t_end > 0.0 ? total / t_end : 0.0;
}

}  // namespace agvsim
