#pragma once

#include "ztmaf/metrics.hpp"
#include "ztmaf/mobility.hpp"
#include "ztmaf/scenario/config.hpp"
#include "ztmaf/sim/channel.hpp"
#include "ztmaf/sim/event_queue.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace ztmaf::scenario {

struct SimOptions
{
  bool log_deliveries{false};
  bool trace_events{false};
  // Overrides mobility.mode; the first `fleet` trajectories are used.
  std::optional<std::vector<mobility::Trajectory>> trajectories;
};

struct RunResult
{
  std::size_t                                            fleet{0};
  std::uint64_t                                          run_seed{0};
  std::vector<metrics::AttemptRecord>                    attempts;  // quantized, initiation order
  std::vector<std::tuple<double, std::string, double>>   trust_rows;
  std::map<std::string, metrics::TrustHistory>           trust_histories;
  std::vector<std::string>                               sybil_flagged;  // union over fogs
  std::size_t                                            honest_sybil_flags{0};
  sim::ChannelStats                                      channel;
  std::vector<sim::DeliveryLogEntry>                     deliveries;
  std::vector<sim::TraceRow>                             trace;
  std::size_t                                            events_fired{0};
  std::size_t                                            events_pending{0};
  std::uint64_t                                          honest_nonces{0};
  metrics::RunSummary                                    summary;
};

/// Runs one scenario for a given fleet size. run_seed seeds every stream.
RunResult simulate(const ScenarioConfig &cfg, std::size_t fleet, std::uint64_t run_seed,
                   const SimOptions &opts = {});

/// Grid placement of fog nodes over the loop's bounding box.
Positions fog_positions(const ScenarioConfig &cfg);

}  // namespace ztmaf::scenario
