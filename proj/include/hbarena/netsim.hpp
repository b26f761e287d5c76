#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hbarena/decimal.hpp"
#include "hbarena/domain.hpp"

namespace hbarena {

/// Deterministic random stream keyed by (master seed, site, round, purpose).
///
/// The generator is SplitMix64: the key is folded into the initial state
/// through FNV-1a and the SplitMix64 finalizer, and each draw advances the
/// state by the golden-ratio increment. Streams with different keys are
/// independent of each other and of the order in which they are created.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::string_view site_id, std::uint64_t round_index,
            std::string_view purpose);

  std::uint64_t next_u64();
  /// Uniform double in [0, 1) with 53 bits of precision.
  double next_unit();
  /// Standard normal via Box-Muller (cosine branch only).
  double next_normal();
  std::uint64_t state() const { return state_; }

  static std::uint64_t mix64(std::uint64_t z);
  static std::uint64_t key_hash(std::string_view site_id, std::uint64_t round_index, std::string_view purpose);

 private:
  std::uint64_t state_;
};

/// Raw draw from a distribution (no rounding, no range clamp).
double sample_raw(const Distribution& d, RngStream& r);

/// Positive latency rounded to the millisecond grid. Throws ConfigError for
/// an unusable model.
Millis sample_latency(const LatencyModel& m, RngStream& r);

/// Bid price, or nullopt when the partner declines (with probability
/// 1 - response_probability). Consumes exactly one uniform for the response
/// decision before sampling the price.
std::optional<Cpm> sample_bid(const BidModel& m, double response_probability, RngStream& r);

/// Thrown when a handler schedules an event before the current clock.
class SimulationError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

template <class Payload>
struct ScheduledEvent {
  Millis fire_at;
  std::uint64_t seq = 0;
  Payload payload;
};

template <class Payload>
struct Timed {
  Millis fire_at;
  Payload payload;
};

template <class Payload>
struct SimRun {
  Millis clock;
  std::vector<ScheduledEvent<Payload>> log;
};

/// Runs a discrete-event simulation to quiescence. Events fire in
/// (fire_at, seq) order where seq is the global insertion counter, so
/// simultaneous events are processed FIFO.
template <class Payload, class Handler>
SimRun<Payload> run_sim(std::vector<Timed<Payload>> initial, Handler&& handler) {
  using Event = ScheduledEvent<Payload>;
  auto later = [](const Event& a, const Event& b) {
    if (a.fire_at != b.fire_at) return a.fire_at > b.fire_at;
    return a.seq > b.seq;
  };
  std::priority_queue<Event, std::vector<Event>, decltype(later)> queue(later);
  std::uint64_t next_seq = 0;
  SimRun<Payload> run;

  for (auto& t : initial) {
    if (t.fire_at < Millis{}) throw SimulationError("initial event scheduled before t=0");
    queue.push(Event{t.fire_at, next_seq++, std::move(t.payload)});
  }
  while (!queue.empty()) {
    Event ev = queue.top();
    queue.pop();
    run.clock = ev.fire_at;
    std::vector<Timed<Payload>> spawned = handler(std::as_const(ev));
    for (auto& t : spawned) {
      if (t.fire_at < run.clock)
        throw SimulationError("event scheduled at " + t.fire_at.str() + "ms, before clock " + run.clock.str() + "ms");
      queue.push(Event{t.fire_at, next_seq++, std::move(t.payload)});
    }
    run.log.push_back(std::move(ev));
  }
  return run;
}

}  // namespace hbarena
