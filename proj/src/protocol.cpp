#include "ztmaf/protocol.hpp"

#include "ztmaf/errors.hpp"

#include <algorithm>
#include <cmath>

namespace ztmaf::protocol {

namespace {

std::string cache_key(const std::string &label, const Nonce &nonce)
{
  std::string key = label;
  key.push_back('\0');
  key.append(reinterpret_cast<const char *>(nonce.bytes.data()), nonce.bytes.size());
  return key;
}

Bytes challenge_message(const ChallengeValue &value, const std::string &label)
{
  Bytes msg(value.begin(), value.end());
  msg.insert(msg.end(), label.begin(), label.end());
  return msg;
}

Bytes beacon_message(const NodeId &vehicle, const ContextVector &ctx, std::uint64_t seq)
{
  Bytes msg = crypto::canonical_encode(vehicle, ctx, 0.0);
  for (int i = 7; i >= 0; --i)
  {
    msg.push_back(static_cast<std::uint8_t>(seq >> (8 * i)));
  }
  return msg;
}

}  // namespace

Bytes AuthRequest::signed_message() const
{
  Bytes msg(request_digest.begin(), request_digest.end());
  msg.insert(msg.end(), nonce.bytes.begin(), nonce.bytes.end());
  return msg;
}

const PublicKey *KeyRegistry::find(const std::string &label) const
{
  auto it = keys_.find(label);
  return it == keys_.end() ? nullptr : &it->second;
}

void ReplayCache::evict(double now_s)
{
  if (!ttl_s_)
  {
    return;
  }
  while (!order_.empty() && now_s - order_.front().first > *ttl_s_)
  {
    keys_.erase(order_.front().second);
    order_.pop_front();
  }
}

bool ReplayCache::contains(const std::string &label, const Nonce &nonce, double now_s)
{
  evict(now_s);
  return keys_.contains(cache_key(label, nonce));
}

void ReplayCache::insert(const std::string &label, const Nonce &nonce, double now_s)
{
  evict(now_s);
  auto key = cache_key(label, nonce);
  if (keys_.insert(key).second)
  {
    order_.emplace_back(now_s, std::move(key));
  }
}

std::string_view to_string(VerifyStatus s)
{
  switch (s)
  {
  case VerifyStatus::Verified:
    return "Verified";
  case VerifyStatus::UnknownIdentity:
    return "UnknownIdentity";
  case VerifyStatus::SpoofSuspected:
    return "SpoofSuspected";
  case VerifyStatus::ReplayDetected:
    return "ReplayDetected";
  }
  return "?";
}

AuthRequest build_request(const NodeId &vehicle, const ContextVector &ctx, double local_trust,
                          const KeyPair &key, crypto::NonceStream &nonces, double now_s)
{
  AuthRequest req;
  req.vehicle_id     = vehicle;
  req.ctx            = ctx;
  req.claimed_trust  = local_trust;
  req.request_digest = crypto::hash_request(crypto::canonical_encode(vehicle, ctx, local_trust));
  req.nonce          = nonces.next();
  req.sent_at_s      = now_s;
  auto sig           = crypto::sign(req.signed_message(), key);
  req.signature.assign(sig.begin(), sig.end());
  return req;
}

VerifyStatus verify_request(const AuthRequest &req, const KeyRegistry &registry, ReplayCache &cache,
                            double now_s)
{
  const std::string label = req.vehicle_id.label();
  const PublicKey  *key   = registry.find(label);
  if (key == nullptr)
  {
    return VerifyStatus::UnknownIdentity;
  }
  if (!crypto::verify(req.signature, req.signed_message(), *key))
  {
    return VerifyStatus::SpoofSuspected;
  }
  Digest recomputed;
  try
  {
    recomputed = crypto::hash_request(crypto::canonical_encode(label, req.ctx, req.claimed_trust));
  }
  catch (const Error &)
  {
    return VerifyStatus::SpoofSuspected;
  }
  if (recomputed != req.request_digest)
  {
    return VerifyStatus::SpoofSuspected;
  }
  if (cache.contains(label, req.nonce, now_s))
  {
    return VerifyStatus::ReplayDetected;
  }
  cache.insert(label, req.nonce, now_s);
  return VerifyStatus::Verified;
}

Decision decide(double updated_trust, double theta)
{
  return updated_trust >= theta ? Decision::Accept : Decision::Fallback;
}

SessionRecord establish_session(const AuthRequest &req, const NodeId &fog,
                                const SharedSecret &shared, double now_s, double lifetime_s,
                                double trust_at_grant, bool via_fallback, bool link_up)
{
  if (!link_up)
  {
    throw SessionAborted(req.vehicle_id.label() + " left the range of " + fog.label());
  }
  SessionRecord rec;
  rec.vehicle_id     = req.vehicle_id;
  rec.fog_id         = fog;
  rec.key            = crypto::derive_session_key(shared, req.nonce, now_s, lifetime_s);
  rec.trust_at_grant = trust_at_grant;
  rec.established_s  = now_s;
  rec.via_fallback   = via_fallback;
  return rec;
}

AckToken make_ack_token(const SessionKey &key, const Digest &request_digest)
{
  static constexpr std::string_view kLabel = "ztmaf-ack";
  Bytes msg(kLabel.begin(), kLabel.end());
  msg.insert(msg.end(), request_digest.begin(), request_digest.end());
  Digest   tag = crypto::hmac_sha256(key.bytes, msg);
  AckToken token{};
  std::copy(request_digest.begin(), request_digest.end(), token.begin());
  std::copy(tag.begin(), tag.end(), token.begin() + 32);
  return token;
}

bool check_ack_token(const AckToken &token, const SessionKey &key, const Digest &request_digest)
{
  return make_ack_token(key, request_digest) == token;
}

ChallengeResponse answer_challenge(const Challenge &challenge, const KeyPair &key)
{
  ChallengeResponse resp;
  resp.vehicle_id = challenge.vehicle_id;
  resp.value      = challenge.value;
  resp.signature  = crypto::sign(challenge_message(challenge.value, challenge.vehicle_id.label()), key);
  return resp;
}

FallbackVerdict judge_fallback(const ChallengeResponse &resp, const std::optional<Challenge> &pending,
                               const KeyRegistry &registry, double now_s, double timeout_s)
{
  if (!pending || pending->vehicle_id != resp.vehicle_id || pending->value != resp.value)
  {
    return FallbackVerdict::Reject;
  }
  if (now_s - pending->issued_s > timeout_s)
  {
    return FallbackVerdict::Reject;
  }
  const std::string label = resp.vehicle_id.label();
  const PublicKey  *key   = registry.find(label);
  if (key == nullptr)
  {
    return FallbackVerdict::Reject;
  }
  return crypto::verify(resp.signature, challenge_message(resp.value, label), *key)
             ? FallbackVerdict::Accept
             : FallbackVerdict::Reject;
}

ContextBeacon make_beacon(const NodeId &vehicle, const ContextVector &ctx, std::uint64_t seq,
                          const SharedSecret &shared)
{
  ContextBeacon b;
  b.vehicle_id = vehicle;
  b.ctx        = ctx;
  b.seq        = seq;
  b.mac        = crypto::hmac_sha256(shared.bytes, beacon_message(vehicle, ctx, seq));
  return b;
}

bool check_beacon_mac(const ContextBeacon &beacon, const SharedSecret &shared)
{
  try
  {
    return crypto::hmac_sha256(shared.bytes, beacon_message(beacon.vehicle_id, beacon.ctx, beacon.seq)) ==
           beacon.mac;
  }
  catch (const Error &)
  {
    return false;
  }
}

std::vector<std::string> CoLocationMonitor::report(const std::string &label, const ContextVector &ctx,
                                                   double now_s)
{
  while (!recent_.empty() && now_s - recent_.front().received_s > 2.0)
  {
    recent_.pop_front();
  }
  std::vector<std::string> newly;
  auto                     flag = [&](const std::string &l) {
    if (flagged_.insert(l).second)
    {
      newly.push_back(l);
    }
  };
  for (const auto &e : recent_)
  {
    if (e.label != label && std::abs(e.ctx_time_s - ctx.timestamp_s) <= window_s_ &&
        distance(e.location, ctx.location) <= radius_m_)
    {
      flag(e.label);
      flag(label);
    }
  }
  recent_.push_back({label, ctx.location, ctx.timestamp_s, now_s});
  return newly;
}

FogAuthority::FogAuthority(NodeId id, Point position, double range_m, const KeyRegistry &registry,
                           SecretLookup secrets, trust::TrustParams trust_params,
                           ProtocolParams params, std::uint64_t master_seed)
  : id_(id),
    position_(position),
    range_m_(range_m),
    registry_(registry),
    secrets_(std::move(secrets)),
    trust_params_(trust_params),
    params_(params),
    cache_(params.replay_ttl_s),
    colocation_(params.colocation_radius_m, params.colocation_window_s),
    challenge_stream_(master_seed, id.index, "fog-challenge")
{}

FogAuthority::VehicleView &FogAuthority::view(const NodeId &vehicle, double now_s)
{
  auto it = views_.find(vehicle);
  if (it == views_.end())
  {
    it = views_
             .emplace(vehicle, VehicleView{TrustState(params_.initial_trust, now_s),
                                           params_.initial_behavior, std::nullopt, std::nullopt, 0})
             .first;
  }
  return it->second;
}

void FogAuthority::record_behavior(VehicleView &v, bool valid)
{
  v.behavior = trust::filter_step(v.behavior, valid ? 1.0 : 0.0, trust_params_.alpha);
}

Point FogAuthority::estimate_location(const NodeId &vehicle, Point reported, double now_s) const
{
  auto it = views_.find(vehicle);
  if (it != views_.end() && it->second.last && now_s - it->second.last->t_s <= params_.observation_gap_s)
  {
    const auto &last = *it->second.last;
    const auto &prev = it->second.prev;
    if (prev && last.t_s > prev->t_s)
    {
      double dt = last.t_s - prev->t_s;
      double vx = (last.location.x - prev->location.x) / dt;
      double vy = (last.location.y - prev->location.y) / dt;
      double h  = now_s - last.t_s;
      return {last.location.x + vx * h, last.location.y + vy * h};
    }
    return last.location;
  }
  // No usable history: the vehicle can only be somewhere inside our coverage disc.
  double d = distance(reported, position_);
  if (d <= range_m_ || d == 0.0)
  {
    return reported;
  }
  double s = range_m_ / d;
  return {position_.x + (reported.x - position_.x) * s, position_.y + (reported.y - position_.y) * s};
}

double FogAuthority::apply_context(const NodeId &vehicle, VehicleView &v, const ContextVector &ctx,
                                   double now_s)
{
  Point est = estimate_location(vehicle, ctx.location, now_s);

  ContextVector observed = ctx;
  observed.behavior      = v.behavior;
  observed.timestamp_s   = now_s;
  double p               = trust::psi(observed, params_.expected_speed_mps, est, trust_params_);
  v.trust                = trust::update_trust(v.trust, observed, p, trust_params_);

  if (v.last && now_s - v.last->t_s > params_.observation_gap_s)
  {
    v.last.reset();
  }
  v.prev = v.last;
  v.last = Observation{ctx.location, now_s};
  return v.trust.value();
}

FogAuthority::RequestOutcome FogAuthority::handle_request(const AuthRequest &req, double now_s,
                                                          bool requester_linked)
{
  RequestOutcome out;
  const std::string label = req.vehicle_id.label();
  if (std::isfinite(req.ctx.location.x) && std::isfinite(req.ctx.location.y) &&
      std::isfinite(req.ctx.timestamp_s))
  {
    colocation_.report(label, req.ctx, now_s);
  }

  out.status = verify_request(req, registry_, cache_, now_s);
  if (out.status == VerifyStatus::UnknownIdentity)
  {
    return out;
  }
  out.ops.push_back(sim::OpKind::SigVerify);

  VehicleView &v   = view(req.vehicle_id, now_s);
  out.trust_before = v.trust.value();
  if (out.status != VerifyStatus::Verified)
  {
    record_behavior(v, false);
    out.trust_after = v.trust.value();
    out.behavior    = v.behavior;
    return out;
  }

  out.claim_mismatch = std::abs(req.claimed_trust - out.trust_before) > params_.claim_tolerance;
  record_behavior(v, !out.claim_mismatch);
  out.trust_after = apply_context(req.vehicle_id, v, req.ctx, now_s);
  out.behavior    = v.behavior;
  out.ops.push_back(sim::OpKind::TrustUpdate);

  out.decision = decide(out.trust_after, trust_params_.theta);
  if (*out.decision == Decision::Accept)
  {
    out.ops.push_back(sim::OpKind::Hmac);
    if (!requester_linked)
    {
      out.aborted = true;
      return out;
    }
    auto rec = establish_session(req, id_, secrets_(req.vehicle_id), now_s, params_.session_lifetime_s,
                                 out.trust_after, false, requester_linked);
    out.token                   = make_ack_token(rec.key, req.request_digest);
    out.session                 = rec;
    sessions_[req.vehicle_id]   = rec;
    return out;
  }

  Challenge ch;
  ch.vehicle_id = req.vehicle_id;
  ch.fog_id     = id_;
  ch.value      = challenge_stream_.next().bytes;
  ch.issued_s   = now_s;
  pending_[req.vehicle_id] = PendingChallenge{ch, req};
  out.challenge            = ch;
  return out;
}

FogAuthority::FallbackOutcome FogAuthority::handle_challenge_response(const ChallengeResponse &resp,
                                                                      double now_s,
                                                                      bool requester_linked)
{
  FallbackOutcome out;
  auto            it = pending_.find(resp.vehicle_id);
  if (it == pending_.end() || it->second.challenge.value != resp.value)
  {
    // Stale or unsolicited: the live challenge, if any, is left untouched.
    out.stale = true;
    return out;
  }
  out.ops.push_back(sim::OpKind::SigVerify);
  PendingChallenge pending = it->second;
  pending_.erase(it);
  out.request_digest = pending.request.request_digest;
  out.verdict = judge_fallback(resp, pending.challenge, registry_, now_s, params_.challenge_timeout_s);
  if (out.verdict == FallbackVerdict::Reject)
  {
    return out;
  }
  out.ops.push_back(sim::OpKind::Hmac);
  if (!requester_linked)
  {
    out.aborted = true;
    return out;
  }
  double trust = trust_of(resp.vehicle_id);
  auto   rec   = establish_session(pending.request, id_, secrets_(resp.vehicle_id), now_s,
                                   params_.session_lifetime_s, trust, true, requester_linked);
  out.token                  = make_ack_token(rec.key, pending.request.request_digest);
  out.session                = rec;
  sessions_[resp.vehicle_id] = rec;
  return out;
}

void FogAuthority::mark_challenge_sent(const NodeId &vehicle, double sent_s)
{
  auto it = pending_.find(vehicle);
  if (it != pending_.end() && sent_s > it->second.challenge.issued_s)
  {
    it->second.challenge.issued_s = sent_s;
  }
}

bool FogAuthority::expire_challenge(const NodeId &vehicle, const ChallengeValue &value)
{
  auto it = pending_.find(vehicle);
  if (it == pending_.end() || it->second.challenge.value != value)
  {
    return false;
  }
  pending_.erase(it);
  return true;
}

std::vector<sim::OpKind> FogAuthority::observe_beacon(const ContextBeacon &beacon, double now_s)
{
  std::vector<sim::OpKind> ops{sim::OpKind::Hmac};
  if (!registry_.contains(beacon.vehicle_id.label()))
  {
    return ops;
  }
  VehicleView &v     = view(beacon.vehicle_id, now_s);
  bool         valid = check_beacon_mac(beacon, secrets_(beacon.vehicle_id)) && beacon.seq > v.last_beacon_seq;
  record_behavior(v, valid);
  if (!valid)
  {
    return ops;
  }
  v.last_beacon_seq = beacon.seq;
  try
  {
    beacon.ctx.validate();
  }
  catch (const InvalidContext &)
  {
    return ops;
  }
  apply_context(beacon.vehicle_id, v, beacon.ctx, now_s);
  ops.push_back(sim::OpKind::TrustUpdate);
  return ops;
}

const SessionRecord *FogAuthority::session_for(const NodeId &vehicle) const
{
  auto it = sessions_.find(vehicle);
  return it == sessions_.end() ? nullptr : &it->second;
}

double FogAuthority::trust_of(const NodeId &vehicle) const
{
  auto it = views_.find(vehicle);
  return it == views_.end() ? params_.initial_trust : it->second.trust.value();
}

double FogAuthority::behavior_of(const NodeId &vehicle) const
{
  auto it = views_.find(vehicle);
  return it == views_.end() ? params_.initial_behavior : it->second.behavior;
}

const TrustState *FogAuthority::trust_state(const NodeId &vehicle) const
{
  auto it = views_.find(vehicle);
  return it == views_.end() ? nullptr : &it->second.trust;
}

std::optional<Challenge> FogAuthority::pending_challenge(const NodeId &vehicle) const
{
  auto it = pending_.find(vehicle);
  if (it == pending_.end())
  {
    return std::nullopt;
  }
  return it->second.challenge;
}

}  // namespace ztmaf::protocol
