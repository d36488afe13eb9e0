#pragma once

#include "ztmaf/domain.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace ztmaf::sim {

/// Describes an event for the trace dump; kind must outlive the scheduler
/// (string literals in practice).
struct EventTag
{
  std::string_view      kind;
  std::optional<NodeId> from;
  std::optional<NodeId> to;
  std::uint64_t         ref{0};  // correlates with an attempt id, 0 when none
};

struct TraceRow
{
  double        t_s;
  std::uint64_t seq;
  std::string   kind;
  std::string   from;
  std::string   to;
  std::string   detail;

  bool operator==(const TraceRow &) const = default;
};

/// Single-threaded discrete-event loop. Events fire in (time, seq) order;
/// seq is assigned at scheduling time, so equal-time events keep insertion order.
class Scheduler
{
public:
  using Action = std::function<void()>;

  double now() const { return now_; }

  /// Throws SchedulingError if at_s is before now() or not finite.
  std::uint64_t schedule(double at_s, EventTag tag, Action action);
  std::uint64_t schedule_in(double delay_s, EventTag tag, Action action)
  {
    return schedule(now_ + delay_s, std::move(tag), std::move(action));
  }

  /// Fires every event with fire time <= t_end_s. Returns the number fired.
  std::size_t run_until(double t_end_s);

  std::size_t pending() const { return queue_.size(); }
  std::size_t fired() const { return fired_; }

  void                          enable_trace(bool on) { tracing_ = on; }
  bool                          tracing() const { return tracing_; }
  const std::vector<TraceRow> &trace() const { return trace_; }

  static constexpr std::string_view kTraceHeader = "t_s,seq,kind,from,to,detail";
  void                              write_trace_csv(std::ostream &out) const;

private:
  struct Event
  {
    double        fire_at_s;
    std::uint64_t seq;
    EventTag      tag;
    Action        action;
  };
  struct Later
  {
    bool operator()(const Event &a, const Event &b) const
    {
      if (a.fire_at_s != b.fire_at_s)
      {
        return a.fire_at_s > b.fire_at_s;
      }
      return a.seq > b.seq;
    }
  };

  double                                           now_{0.0};
  std::uint64_t                                    next_seq_{0};
  std::size_t                                      fired_{0};
  bool                                             tracing_{false};
  std::vector<Event>                               queue_;  // binary heap under Later
  std::vector<TraceRow>                            trace_;
};

}  // namespace ztmaf::sim
