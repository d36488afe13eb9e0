#pragma once

#include "ztmaf/mobility.hpp"
#include "ztmaf/protocol.hpp"
#include "ztmaf/sim/channel.hpp"
#include "ztmaf/sim/cost_model.hpp"
#include "ztmaf/threats.hpp"
#include "ztmaf/trust.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ztmaf::scenario {

enum class MobilityTier
{
  Low,
  Normal,
  High,
};

std::string_view to_string(MobilityTier t);
double           tier_factor(MobilityTier t);

struct ScenarioConfig
{
  std::uint64_t seed{1};

  double duration_s{600.0};
  double tick_s{1.0};
  double join_window_s{30.0};

  std::vector<std::size_t> fleet_sizes{100, 200, 300, 400, 500};

  std::size_t fog_count{10};
  std::size_t fog_rows{2};
  std::size_t fog_cols{5};
  double      fog_range_m{400.0};

  trust::TrustParams trust;
  double             initial_trust{0.5};
  double             claim_tolerance{0.05};

  double        bandwidth_mbps{10.0};
  std::uint32_t packet_bytes{512};
  double        propagation_ms{1.0};
  double        loss_prob{0.0};

  std::optional<double> replay_ttl_s{30.0};  // empty = infinite

  double session_lifetime_s{120.0};
  double challenge_timeout_ms{100.0};
  double attempt_timeout_s{1.0};
  double retry_backoff_s{1.0};       // first retry; doubles per consecutive failure
  double retry_backoff_max_s{16.0};

  std::string            mobility_mode{"synthetic"};
  std::string            trace_path;
  MobilityTier           tier{MobilityTier::Normal};
  mobility::KraussParams krauss;
  mobility::RoadLoop     road;

  double                     spoof_rate_hz{0.0};
  double                     replay_rate_hz{0.0};
  std::size_t                sybil_count{0};
  double                     sybil_rate_hz{0.0};
  double                     attack_start_s{60.0};
  double                     attack_stop_s{540.0};
  double                     replay_delay_min_s{1.0};
  double                     replay_delay_max_s{32.0};
  threats::SpoofMode         spoof_mode{threats::SpoofMode::AttackerKey};
  std::size_t                context_liars{0};
  std::vector<std::uint32_t> attack_targets;  // fog indices; empty = every fog

  std::uint32_t pki_chain_depth{2};
  double        pki_cert_verify_ms{20.0};
  double        pki_revocation_rtt_ms{40.0};
  double        block_interval_ms{60.0};

  sim::CostTable                          cycles;
  std::array<double, sim::kOpKindCount>   time_ms{0.5, 1.0, 52.0, 65.0, 1.0, 20.0, 0.0};

  double delta_max_ms{200.0};
  double convergence_eps{0.01};
  bool   exclude_malicious{true};

  bool dump_events{false};

  /// Throws ConfigError naming the first offending key.
  void validate() const;

  sim::ChannelParams       channel() const;
  sim::ProcessingTimes     processing_times() const;
  protocol::ProtocolParams protocol(double expected_speed_mps) const;
  threats::BaselineModel   baseline(threats::BaselineKind kind) const;
  std::vector<threats::AttackPlan> attack_plans() const;
  /// Krauss parameters with v_max scaled by the mobility tier.
  mobility::KraussParams tiered_krauss() const;
};

/// Parses JSON text: nested objects and dotted keys are both accepted and
/// flattened to dotted paths. Unknown keys and type mismatches raise
/// ConfigError(key). The result is validated.
ScenarioConfig parse_config(const std::string &json_text);
ScenarioConfig load_config(const std::filesystem::path &path);

/// Every key with its resolved value, as flat JSON that parse_config accepts.
std::string echo_config(const ScenarioConfig &cfg);

/// All recognised dotted keys, sorted.
std::vector<std::string> config_keys();

}  // namespace ztmaf::scenario
