#include "ztmaf/sim/event_queue.hpp"

#include "ztmaf/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace ztmaf::sim {

std::uint64_t Scheduler::schedule(double at_s, EventTag tag, Action action)
{
  if (!std::isfinite(at_s))
  {
    throw SchedulingError("event time must be finite");
  }
  if (at_s < now_)
  {
    throw SchedulingError(fmt::format("event '{}' at {} is before now ({})", tag.kind, at_s, now_));
  }
  std::uint64_t seq = next_seq_++;
  queue_.push_back(Event{at_s, seq, std::move(tag), std::move(action)});
  std::push_heap(queue_.begin(), queue_.end(), Later{});
  return seq;
}

std::size_t Scheduler::run_until(double t_end_s)
{
  std::size_t count = 0;
  while (!queue_.empty() && queue_.front().fire_at_s <= t_end_s)
  {
    std::pop_heap(queue_.begin(), queue_.end(), Later{});
    Event ev = std::move(queue_.back());
    queue_.pop_back();
    now_ = ev.fire_at_s;
    if (tracing_)
    {
      trace_.push_back(TraceRow{ev.fire_at_s, ev.seq, std::string(ev.tag.kind),
                                ev.tag.from ? ev.tag.from->label() : std::string(),
                                ev.tag.to ? ev.tag.to->label() : std::string(),
                                ev.tag.ref ? fmt::format("attempt={}", ev.tag.ref) : std::string()});
    }
    ev.action();
    ++count;
    ++fired_;
  }
  return count;
}

void Scheduler::write_trace_csv(std::ostream &out) const
{
  out << kTraceHeader << '\n';
  for (const auto &row : trace_)
  {
    out << fmt::format("{:.9f},{},{},{},{},{}\n", row.t_s, row.seq, row.kind, row.from, row.to,
                       row.detail);
  }
}

}  // namespace ztmaf::sim
