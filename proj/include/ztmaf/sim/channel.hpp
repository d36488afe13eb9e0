#pragma once

#include "ztmaf/domain.hpp"
#include "ztmaf/sim/event_queue.hpp"
#include "ztmaf/sim/random.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

namespace ztmaf::sim {

struct ChannelParams
{
  double        bandwidth_bps{10e6};
  std::uint32_t packet_bytes{512};
  double        propagation_s{1e-3};
  double        loss_prob{0.0};

  double transmission_s() const { return packet_bytes * 8.0 / bandwidth_bps; }
  double min_delay_s() const { return transmission_s() + propagation_s; }
};

enum class TransmitStatus
{
  Scheduled,
  Dropped,
  LinkDown,
};

struct TransmitResult
{
  TransmitStatus status{TransmitStatus::LinkDown};
  double         sent_s{0.0};
  double         deliver_s{0.0};
};

struct ChannelStats
{
  std::uint64_t sent{0};
  std::uint64_t delivered{0};
  std::uint64_t dropped{0};
  std::uint64_t link_down{0};  // no link at send time, or receiver gone at arrival
  std::uint64_t causality_violations{0};

  std::uint64_t in_flight() const { return sent - delivered - dropped - link_down; }
};

struct DeliveryLogEntry
{
  NodeId from;
  NodeId to;
  double sent_s;
  double deliver_s;
};

/// Fixed-size packets over per-sender FIFO queues with infinite buffers.
/// Delivery time = max(now, sender queue free) + packet_bytes*8/bandwidth + propagation.
class Channel
{
public:
  using Callback     = std::function<void()>;
  using ArrivalCheck = std::function<bool()>;

  Channel(ChannelParams params, Rng loss_rng) : params_(params), rng_(loss_rng) {}

  const ChannelParams &params() const { return params_; }
  const ChannelStats  &stats() const { return stats_; }

  /// link_up is the link state in the current topology. When the message is
  /// scheduled, on_deliver fires at arrival unless still_linked (if given)
  /// returns false then, in which case on_fail fires instead.
  TransmitResult transmit(Scheduler &sched, const NodeId &from, const NodeId &to, bool link_up,
                          EventTag tag, Callback on_deliver, ArrivalCheck still_linked = {},
                          Callback on_fail = {});

  /// One-way delay a packet queued by `from` right now would see.
  double estimate_delay(const NodeId &from, double now_s) const;

  void                                 enable_log(bool on) { logging_ = on; }
  const std::vector<DeliveryLogEntry> &log() const { return log_; }

private:
  ChannelParams                 params_;
  Rng                           rng_;
  ChannelStats                  stats_;
  std::map<NodeId, double>      busy_until_;
  bool                          logging_{false};
  std::vector<DeliveryLogEntry> log_;
};

}  // namespace ztmaf::sim
