#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "edgefed/core.hpp"

namespace edgefed::sim {

class SchedulingInPast : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct SimEvent {
  SimTime fire_time;
  std::uint64_t sequence = 0;
  std::string label;
  std::function<void()> action;
};

/// What advance() reports about the event it just ran.
struct Dispatched {
  SimTime fire_time;
  std::uint64_t sequence = 0;
  std::string label;
};

/// Discrete-event queue. Events fire in (fire_time, sequence) order, where
/// sequence is assigned at scheduling time.
class EventQueue {
 public:
  /// Throws SchedulingInPast if fire_time < now().
  std::uint64_t schedule(SimTime fire_time, std::function<void()> action, std::string label = {});
  std::uint64_t schedule_after(SimTime delay, std::function<void()> action, std::string label = {}) {
    return schedule(now_ + delay, std::move(action), std::move(label));
  }

  /// Pops and runs the next event. Returns nullopt when the queue is empty,
  /// which is the end-of-simulation signal.
  std::optional<Dispatched> advance();

  /// Runs events with fire_time <= horizon; returns how many ran.
  std::size_t run_until(SimTime horizon);

  SimTime now() const { return now_; }
  bool empty() const { return heap_.empty(); }
  std::size_t pending() const { return heap_.size(); }
  std::optional<SimTime> next_time() const;

 private:
  struct Later {
    bool operator()(const SimEvent& a, const SimEvent& b) const {
      if (a.fire_time != b.fire_time) return a.fire_time > b.fire_time;
      return a.sequence > b.sequence;
    }
  };
  std::priority_queue<SimEvent, std::vector<SimEvent>, Later> heap_;
  SimTime now_;
  std::uint64_t next_sequence_ = 0;
};

}  // namespace edgefed::sim
