#pragma once

#include "ztmaf/crypto.hpp"
#include "ztmaf/domain.hpp"
#include "ztmaf/sim/cost_model.hpp"
#include "ztmaf/trust.hpp"

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

namespace ztmaf::protocol {

using crypto::Bytes;
using crypto::Digest;
using crypto::KeyPair;
using crypto::Nonce;
using crypto::PublicKey;
using crypto::SessionKey;
using crypto::SharedSecret;

inline constexpr std::size_t kAckTokenBytes = 64;
using AckToken       = std::array<std::uint8_t, kAckTokenBytes>;
using ChallengeValue = std::array<std::uint8_t, 16>;

/// R_i plus its signature. The signature covers digest || nonce, so the
/// nonce cannot be swapped without the signer's key.
struct AuthRequest
{
  NodeId        vehicle_id;
  ContextVector ctx;
  double        claimed_trust{0.0};
  Digest        request_digest{};
  Bytes         signature;
  Nonce         nonce;
  double        sent_at_s{0.0};

  Bytes signed_message() const;
  bool  operator==(const AuthRequest &) const = default;
};

struct SessionRecord
{
  NodeId     vehicle_id;
  NodeId     fog_id;
  SessionKey key;
  double     trust_at_grant{0.0};
  double     established_s{0.0};
  bool       via_fallback{false};
};

struct Challenge
{
  NodeId         vehicle_id;
  NodeId         fog_id;
  ChallengeValue value{};
  double         issued_s{0.0};
};

struct ChallengeResponse
{
  NodeId              vehicle_id;
  ChallengeValue      value{};
  crypto::Signature   signature{};
};

/// Periodic context report from a vehicle, MAC'd under the pair's shared secret.
struct ContextBeacon
{
  NodeId        vehicle_id;
  ContextVector ctx;
  std::uint64_t seq{0};
  Digest        mac{};
};

class KeyRegistry
{
public:
  void                      add(const std::string &label, const PublicKey &key) { keys_[label] = key; }
  bool                      contains(const std::string &label) const { return keys_.contains(label); }
  const PublicKey          *find(const std::string &label) const;
  std::size_t               size() const { return keys_.size(); }

private:
  std::map<std::string, PublicKey> keys_;
};

/// (vehicle label, nonce) pairs seen within the last ttl seconds. An entry
/// inserted at t stays resident while now - t <= ttl. No ttl means never evict.
class ReplayCache
{
public:
  explicit ReplayCache(std::optional<double> ttl_s = 30.0) : ttl_s_(ttl_s) {}

  bool        contains(const std::string &label, const Nonce &nonce, double now_s);
  void        insert(const std::string &label, const Nonce &nonce, double now_s);
  std::size_t size() const { return keys_.size(); }

  const std::optional<double> &ttl_s() const { return ttl_s_; }

private:
  void evict(double now_s);

  std::optional<double>                         ttl_s_;
  std::unordered_set<std::string>               keys_;
  std::deque<std::pair<double, std::string>>    order_;
};

enum class VerifyStatus
{
  Verified,
  UnknownIdentity,
  SpoofSuspected,
  ReplayDetected,
};

enum class Decision
{
  Accept,
  Fallback,
};

enum class FallbackVerdict
{
  Accept,
  Reject,
};

std::string_view to_string(VerifyStatus s);

AuthRequest build_request(const NodeId &vehicle, const ContextVector &ctx, double local_trust,
                          const KeyPair &key, crypto::NonceStream &nonces, double now_s);

/// Checks identity, then signature and digest, then freshness. A Verified
/// request's nonce is inserted into the cache.
VerifyStatus verify_request(const AuthRequest &req, const KeyRegistry &registry, ReplayCache &cache,
                            double now_s);

/// Inclusive threshold: Accept iff updated_trust >= theta.
Decision decide(double updated_trust, double theta);

/// Throws SessionAborted when the requester is no longer reachable.
SessionRecord establish_session(const AuthRequest &req, const NodeId &fog,
                                const SharedSecret &shared, double now_s, double lifetime_s,
                                double trust_at_grant, bool via_fallback, bool link_up = true);

AckToken make_ack_token(const SessionKey &key, const Digest &request_digest);
bool     check_ack_token(const AckToken &token, const SessionKey &key, const Digest &request_digest);

/// Signs challenge || vehicle label.
ChallengeResponse answer_challenge(const Challenge &challenge, const KeyPair &key);

/// Judges a response against the pending challenge, if any. Stale values,
/// late responses and bad signatures are rejected.
FallbackVerdict judge_fallback(const ChallengeResponse &resp, const std::optional<Challenge> &pending,
                               const KeyRegistry &registry, double now_s, double timeout_s);

ContextBeacon make_beacon(const NodeId &vehicle, const ContextVector &ctx, std::uint64_t seq,
                          const SharedSecret &shared);
bool          check_beacon_mac(const ContextBeacon &beacon, const SharedSecret &shared);

struct ProtocolParams
{
  double                session_lifetime_s{120.0};
  double                challenge_timeout_s{0.1};
  double                claim_tolerance{0.05};
  double                initial_trust{0.5};
  double                initial_behavior{1.0};
  double                expected_speed_mps{13.9};
  std::optional<double> replay_ttl_s{30.0};
  double                observation_gap_s{5.0};  // older observations do not seed dead reckoning
  double                colocation_radius_m{5.0};
  double                colocation_window_s{0.01};
};

/// Flags distinct identities that report near-identical locations at the same instant.
class CoLocationMonitor
{
public:
  CoLocationMonitor(double radius_m, double window_s) : radius_m_(radius_m), window_s_(window_s) {}

  /// Returns the labels newly flagged by this report.
  std::vector<std::string> report(const std::string &label, const ContextVector &ctx, double now_s);

  const std::set<std::string> &flagged() const { return flagged_; }

private:
  struct Entry
  {
    std::string label;
    Point       location;
    double      ctx_time_s;
    double      received_s;
  };

  double                radius_m_;
  double                window_s_;
  std::deque<Entry>     recent_;
  std::set<std::string> flagged_;
};

/// Fog-side handshake state machine: trust bookkeeping per vehicle, replay
/// cache, pending challenges and granted sessions for one fog node.
class FogAuthority
{
public:
  using SecretLookup = std::function<SharedSecret(const NodeId &vehicle)>;

  struct RequestOutcome
  {
    VerifyStatus                 status{VerifyStatus::UnknownIdentity};
    std::optional<Decision>      decision;
    double                       trust_before{0.0};
    double                       trust_after{0.0};
    double                       behavior{0.0};
    bool                         claim_mismatch{false};
    bool                         aborted{false};  // accepted, but requester gone at establishment
    std::optional<SessionRecord> session;
    std::optional<AckToken>      token;
    std::optional<Challenge>     challenge;
    std::vector<sim::OpKind>     ops;  // fog-side work performed
  };

  struct FallbackOutcome
  {
    FallbackVerdict              verdict{FallbackVerdict::Reject};
    bool                         stale{false};
    bool                         aborted{false};
    std::optional<SessionRecord> session;
    std::optional<AckToken>      token;
    std::optional<Digest>        request_digest;
    std::vector<sim::OpKind>     ops;
  };

  FogAuthority(NodeId id, Point position, double range_m, const KeyRegistry &registry,
               SecretLookup secrets, trust::TrustParams trust_params, ProtocolParams params,
               std::uint64_t master_seed);

  const NodeId &id() const { return id_; }

  /// Algorithm 1 from the fog's side. requester_linked is the link state when
  /// the session would be established.
  RequestOutcome handle_request(const AuthRequest &req, double now_s, bool requester_linked = true);

  FallbackOutcome handle_challenge_response(const ChallengeResponse &resp, double now_s,
                                            bool requester_linked = true);

  /// The response window opens when the challenge leaves the fog, which can
  /// be later than the decision that issued it.
  void mark_challenge_sent(const NodeId &vehicle, double sent_s);

  /// Drops the pending challenge if it is still the given one; returns true
  /// when that happened (the fallback is rejected by timeout).
  bool expire_challenge(const NodeId &vehicle, const ChallengeValue &value);

  /// Returns the ops performed (MAC check and trust update).
  std::vector<sim::OpKind> observe_beacon(const ContextBeacon &beacon, double now_s);

  void                 drop_session(const NodeId &vehicle) { sessions_.erase(vehicle); }
  const SessionRecord *session_for(const NodeId &vehicle) const;
  std::size_t          session_count() const { return sessions_.size(); }

  bool                                knows(const NodeId &vehicle) const { return views_.contains(vehicle); }
  double                              trust_of(const NodeId &vehicle) const;
  double                              behavior_of(const NodeId &vehicle) const;
  const TrustState                   *trust_state(const NodeId &vehicle) const;
  const std::set<std::string>        &sybil_flags() const { return colocation_.flagged(); }
  const ReplayCache                  &replay_cache() const { return cache_; }
  std::optional<Challenge>            pending_challenge(const NodeId &vehicle) const;

  /// Location the fog expects the vehicle to report now.
  Point estimate_location(const NodeId &vehicle, Point reported, double now_s) const;

private:
  struct Observation
  {
    Point  location;
    double t_s;
  };
  struct VehicleView
  {
    TrustState                 trust;
    double                     behavior;
    std::optional<Observation> last;
    std::optional<Observation> prev;
    std::uint64_t              last_beacon_seq{0};
  };
  struct PendingChallenge
  {
    Challenge   challenge;
    AuthRequest request;
  };

  VehicleView &view(const NodeId &vehicle, double now_s);
  void         record_behavior(VehicleView &v, bool valid);
  double       apply_context(const NodeId &vehicle, VehicleView &v, const ContextVector &ctx,
                             double now_s);

  NodeId                                  id_;
  Point                                   position_;
  double                                  range_m_;
  const KeyRegistry                      &registry_;
  SecretLookup                            secrets_;
  trust::TrustParams                      trust_params_;
  ProtocolParams                          params_;
  ReplayCache                             cache_;
  CoLocationMonitor                       colocation_;
  crypto::NonceStream                     challenge_stream_;
  std::map<NodeId, VehicleView>           views_;
  std::map<NodeId, PendingChallenge>      pending_;
  std::map<NodeId, SessionRecord>         sessions_;
};

}  // namespace ztmaf::protocol
