#pragma once

#include "ztmaf/protocol.hpp"
#include "ztmaf/sim/cost_model.hpp"
#include "ztmaf/sim/random.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace ztmaf::threats {

enum class AttackKind
{
  None,
  Spoof,
  Replay,
  Sybil,
  Context,  // registered key, lying context
};

std::string_view to_string(AttackKind kind);
/// "" and "none" map to None. Throws ConfigError("attack_kind") otherwise.
AttackKind parse_attack_kind(std::string_view name);

enum class SpoofMode
{
  AttackerKey,
  RandomBytes,
};

std::string_view to_string(SpoofMode mode);
SpoofMode        parse_spoof_mode(std::string_view name);

struct AttackPlan
{
  AttackKind          kind{AttackKind::Spoof};
  double              rate_hz{0.0};
  std::vector<NodeId> targets;  // fog nodes
  double              start_s{0.0};
  double              stop_s{0.0};
  // Replays re-inject a captured message this long after capture.
  double    replay_delay_min_s{1.0};
  double    replay_delay_max_s{32.0};
  std::size_t sybil_count{0};
  SpoofMode spoof_mode{SpoofMode::AttackerKey};

  /// Throws ConfigError with the attack.* key at fault.
  void validate() const;
  bool active(double now_s) const { return rate_hz > 0.0 && now_s >= start_s && now_s <= stop_s; }
};

/// Index ranges reserved for adversary identities.
inline constexpr std::uint32_t kAttackerBase = 900000;
inline constexpr std::uint32_t kSybilBase    = 800000;

inline NodeId attacker_for(const NodeId &fog) { return NodeId::vehicle(kAttackerBase + fog.index); }

/// Impersonates `victim` with its true context. The signature comes from the
/// attacker's own key or is random bytes.
protocol::AuthRequest spoof_attempt(const NodeId &victim, const ContextVector &ctx, double claimed_trust,
                                    const crypto::KeyPair &attacker_key, SpoofMode mode, sim::Rng &rng,
                                    double now_s);

/// Byte-identical copy of the captured request.
protocol::AuthRequest replay_attempt(const protocol::AuthRequest &captured);

/// Delay between capture and re-injection, uniform over the plan's window.
double sample_replay_delay(const AttackPlan &plan, sim::Rng &rng);

/// Fabricated identities; none of them is ever registered. Throws ConfigError
/// for count < 2.
std::vector<NodeId> sybil_spawn(std::size_t count, std::uint32_t first_index = kSybilBase);

/// A Sybil identity's request, signed with the attacker's key.
protocol::AuthRequest sybil_request(const NodeId &id, const ContextVector &ctx,
                                    const crypto::KeyPair &attacker_key, crypto::NonceStream &nonces,
                                    double now_s);

enum class BaselineKind
{
  Ztmaf,
  Pki,
  Blockchain,
};

std::string_view to_string(BaselineKind kind);
/// Throws ConfigError("model") for unknown names.
BaselineKind parse_baseline_kind(std::string_view name);

struct BaselineModel
{
  BaselineKind  kind{BaselineKind::Ztmaf};
  std::uint32_t chain_depth{2};
  double        cert_verify_s{0.020};
  double        revocation_rtt_s{0.040};
  double        block_interval_s{0.060};

  void validate() const;
};

struct AttemptCost
{
  double        latency_s{0.0};
  std::uint64_t cycles{0};
};

/// Overlays a baseline on a measured ZTMAF attempt. PKI adds chain_depth
/// certificate verifications and a revocation round trip; blockchain adds a
/// uniform block-inclusion residual and the consensus overhead. The rng is
/// only drawn for the blockchain residual.
AttemptCost baseline_authenticate(const BaselineModel &model, const AttemptCost &ztmaf,
                                  const sim::CostTable &cycles, sim::Rng &rng);

}  // namespace ztmaf::threats
