#include "ztmaf/sim/channel.hpp"

#include <algorithm>

namespace ztmaf::sim {

TransmitResult Channel::transmit(Scheduler &sched, const NodeId &from, const NodeId &to,
                                 bool link_up, EventTag tag, Callback on_deliver,
                                 ArrivalCheck still_linked, Callback on_fail)
{
  const double now = sched.now();
  ++stats_.sent;
  if (!link_up)
  {
    ++stats_.link_down;
    return {TransmitStatus::LinkDown, now, now};
  }
  if (params_.loss_prob > 0.0 && rng_.bernoulli(params_.loss_prob))
  {
    ++stats_.dropped;
    return {TransmitStatus::Dropped, now, now};
  }

  double &busy   = busy_until_[from];
  double  start  = std::max(now, busy);
  double  finish = start + params_.transmission_s();
  busy           = finish;
  double deliver = finish + params_.propagation_s;

  sched.schedule(deliver, std::move(tag),
                 [this, from, to, now, deliver, on_deliver = std::move(on_deliver),
                  still_linked = std::move(still_linked), on_fail = std::move(on_fail)] {
                   if (still_linked && !still_linked())
                   {
                     ++stats_.link_down;
                     if (on_fail)
                     {
                       on_fail();
                     }
                     return;
                   }
                   ++stats_.delivered;
                   if (deliver - now < params_.min_delay_s() - 1e-9)  // subtraction of absolute times loses ~1e-14
                   {
                     ++stats_.causality_violations;
                   }
                   if (logging_)
                   {
                     log_.push_back({from, to, now, deliver});
                   }
                   on_deliver();
                 });
  return {TransmitStatus::Scheduled, now, deliver};
}

double Channel::estimate_delay(const NodeId &from, double now_s) const
{
  auto   it    = busy_until_.find(from);
  double start = it == busy_until_.end() ? now_s : std::max(now_s, it->second);
  return start - now_s + params_.min_delay_s();
}

}  // namespace ztmaf::sim
