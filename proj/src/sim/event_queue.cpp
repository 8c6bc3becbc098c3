#include "edgefed/sim/event_queue.hpp"

namespace edgefed::sim {

std::uint64_t EventQueue::schedule(SimTime fire_time, std::function<void()> action, std::string label) {
  if (fire_time < now_)
    throw SchedulingInPast("event '" + label + "' at " + format_seconds(fire_time) + " is before clock " +
                           format_seconds(now_));
  const auto seq = next_sequence_++;
  heap_.push(SimEvent{fire_time, seq, std::move(label), std::move(action)});
  return seq;
}

std::optional<Dispatched> EventQueue::advance() {
  if (heap_.empty()) return std::nullopt;
  // priority_queue::top is const; the event is copied out before pop.
  SimEvent ev = heap_.top();
  heap_.pop();
  now_ = ev.fire_time;
  if (ev.action) ev.action();
  return Dispatched{ev.fire_time, ev.sequence, std::move(ev.label)};
}

std::size_t EventQueue::run_until(SimTime horizon) {
  std::size_t n = 0;
  while (!heap_.empty() && heap_.top().fire_time <= horizon) {
    advance();
    ++n;
  }
  return n;
}

std::optional<SimTime> EventQueue::next_time() const {
  if (heap_.empty()) return std::nullopt;
  return heap_.top().fire_time;
}

}  // namespace edgefed::sim
