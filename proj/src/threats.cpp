#include "ztmaf/threats.hpp"

#include "ztmaf/errors.hpp"

#include <cmath>
#include <string>

namespace ztmaf::threats {

std::string_view to_string(AttackKind kind)
{
  switch (kind)
  {
  case AttackKind::None: return "none";
  case AttackKind::Spoof: return "spoof";
  case AttackKind::Replay: return "replay";
  case AttackKind::Sybil: return "sybil";
  case AttackKind::Context: return "context";
  }
  return "none";
}

AttackKind parse_attack_kind(std::string_view name)
{
  for (auto k : {AttackKind::None, AttackKind::Spoof, AttackKind::Replay, AttackKind::Sybil,
                 AttackKind::Context})
  {
    if (to_string(k) == name)
    {
      return k;
    }
  }
  if (name.empty())
  {
    return AttackKind::None;
  }
  throw ConfigError("attack_kind", "unknown attack kind '" + std::string(name) + "'");
}

std::string_view to_string(SpoofMode mode)
{
  return mode == SpoofMode::AttackerKey ? "attacker_key" : "random_bytes";
}

SpoofMode parse_spoof_mode(std::string_view name)
{
  if (name == "attacker_key") return SpoofMode::AttackerKey;
  if (name == "random_bytes") return SpoofMode::RandomBytes;
  throw ConfigError("attack.spoof_mode", "expected attacker_key or random_bytes");
}

void AttackPlan::validate() const
{
  if (!(rate_hz >= 0.0) || !std::isfinite(rate_hz))
  {
    throw ConfigError("attack.rate_hz", "rate must be non-negative");
  }
  if (!(stop_s >= start_s))
  {
    throw ConfigError("attack.stop_s", "attack window ends before it starts");
  }
  if (kind == AttackKind::Replay &&
      !(replay_delay_min_s >= 0.0 && replay_delay_max_s >= replay_delay_min_s))
  {
    throw ConfigError("attack.replay_delay_max_s", "replay window must satisfy 0 <= min <= max");
  }
  if (kind == AttackKind::Sybil && sybil_count < 2)
  {
    throw ConfigError("attack.sybil_count", "a Sybil attack needs at least 2 identities");
  }
  for (const auto &t : targets)
  {
    if (t.kind != NodeKind::Fog)
    {
      throw ConfigError("attack.targets", "targets must be fog nodes");
    }
  }
}

protocol::AuthRequest spoof_attempt(const NodeId &victim, const ContextVector &ctx, double claimed_trust,
                                    const crypto::KeyPair &attacker_key, SpoofMode mode, sim::Rng &rng,
                                    double now_s)
{
  protocol::AuthRequest req;
  req.vehicle_id     = victim;
  req.ctx            = ctx;
  req.claimed_trust  = claimed_trust;
  req.request_digest = crypto::hash_request(crypto::canonical_encode(victim, ctx, claimed_trust));
  for (auto &b : req.nonce.bytes)
  {
    b = static_cast<std::uint8_t>(rng.next_u64());
  }
  if (mode == SpoofMode::AttackerKey)
  {
    auto sig = crypto::sign(req.signed_message(), attacker_key);
    req.signature.assign(sig.begin(), sig.end());
  }
  else
  {
    req.signature.resize(64);
    for (auto &b : req.signature)
    {
      b = static_cast<std::uint8_t>(rng.next_u64());
    }
  }
  req.sent_at_s = now_s;
  return req;
}

protocol::AuthRequest replay_attempt(const protocol::AuthRequest &captured)
{
  return captured;
}

double sample_replay_delay(const AttackPlan &plan, sim::Rng &rng)
{
  return rng.uniform(plan.replay_delay_min_s, plan.replay_delay_max_s);
}

std::vector<NodeId> sybil_spawn(std::size_t count, std::uint32_t first_index)
{
  if (count < 2)
  {
    throw ConfigError("attack.sybil_count", "a Sybil attack needs at least 2 identities");
  }
  std::vector<NodeId> ids;
  ids.reserve(count);
  for (std::size_t k = 0; k < count; ++k)
  {
    ids.push_back(NodeId::vehicle(first_index + static_cast<std::uint32_t>(k)));
  }
  return ids;
}

protocol::AuthRequest sybil_request(const NodeId &id, const ContextVector &ctx,
                                    const crypto::KeyPair &attacker_key, crypto::NonceStream &nonces,
                                    double now_s)
{
  return protocol::build_request(id, ctx, 0.5, attacker_key, nonces, now_s);
}

std::string_view to_string(BaselineKind kind)
{
  switch (kind)
  {
  case BaselineKind::Ztmaf: return "ztmaf";
  case BaselineKind::Pki: return "pki";
  case BaselineKind::Blockchain: return "blockchain";
  }
  return "ztmaf";
}

BaselineKind parse_baseline_kind(std::string_view name)
{
  for (auto k : {BaselineKind::Ztmaf, BaselineKind::Pki, BaselineKind::Blockchain})
  {
    if (to_string(k) == name)
    {
      return k;
    }
  }
  throw ConfigError("model", "unknown model '" + std::string(name) + "'");
}

void BaselineModel::validate() const
{
  auto check = [](double v, const char *key) {
    if (!(v >= 0.0) || !std::isfinite(v))
    {
      throw ConfigError(key, "must be non-negative");
    }
  };
  check(cert_verify_s, "baselines.pki_cert_verify_ms");
  check(revocation_rtt_s, "baselines.pki_revocation_rtt_ms");
  check(block_interval_s, "baselines.block_interval_ms");
}

AttemptCost baseline_authenticate(const BaselineModel &model, const AttemptCost &ztmaf,
                                  const sim::CostTable &cycles, sim::Rng &rng)
{
  using sim::OpKind;
  AttemptCost out = ztmaf;
  switch (model.kind)
  {
  case BaselineKind::Ztmaf:
    break;
  case BaselineKind::Pki:
    out.latency_s += model.chain_depth * model.cert_verify_s + model.revocation_rtt_s;
    out.cycles = model.chain_depth * cycles.at(OpKind::CertVerify) + cycles.at(OpKind::Sign) +
                 cycles.at(OpKind::SigVerify);
    break;
  case BaselineKind::Blockchain:
    out.latency_s += rng.uniform01() * model.block_interval_s;
    out.cycles += cycles.at(OpKind::ConsensusOverhead);
    break;
  }
  return out;
}

}  // namespace ztmaf::threats
