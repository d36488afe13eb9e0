#include "ztmaf/errors.hpp"
#include "ztmaf/protocol.hpp"

#include <gtest/gtest.h>

using namespace ztmaf;
using namespace ztmaf::protocol;

namespace {

std::array<std::uint8_t, 32> seed(std::uint8_t b)
{
  std::array<std::uint8_t, 32> s{};
  s.fill(b);
  return s;
}

struct Fixture : ::testing::Test
{
  NodeId              car = NodeId::vehicle(1);
  NodeId              fog = NodeId::fog(0);
  KeyPair             key = KeyPair::from_seed(seed(1));
  KeyPair             rogue = KeyPair::from_seed(seed(9));
  KeyRegistry         registry;
  crypto::NonceStream nonces{1, 1};
  SharedSecret        shared{};
  ProtocolParams      params;
  trust::TrustParams  tp;

  Fixture()
  {
    registry.add(car.label(), key.public_key());
    shared.bytes.fill(0x42);
  }

  FogAuthority authority(std::optional<double> ttl = 30.0)
  {
    params.replay_ttl_s       = ttl;
    params.expected_speed_mps = 10.0;
    return FogAuthority(fog, {0, 0}, 400, registry, [this](const NodeId &) { return shared; }, tp, params, 77);
  }

  AuthRequest request(double t, double claimed = 0.5, Point where = {10, 0})
  {
    return build_request(car, {10.0, where, 1.0, t}, claimed, key, nonces, t);
  }
};

}  // namespace

TEST_F(Fixture, HonestRequestVerifies)
{
  ReplayCache cache;
  auto        req = request(1.0);
  EXPECT_EQ(verify_request(req, registry, cache, 1.0), VerifyStatus::Verified);
  EXPECT_EQ(req.claimed_trust, 0.5);
}

TEST_F(Fixture, ResentNonceIsReplay)
{
  ReplayCache cache(30.0);
  auto        req = request(1.0);
  ASSERT_EQ(verify_request(req, registry, cache, 1.0), VerifyStatus::Verified);
  EXPECT_EQ(verify_request(req, registry, cache, 2.0), VerifyStatus::ReplayDetected);
  EXPECT_EQ(verify_request(req, registry, cache, 30.9), VerifyStatus::ReplayDetected);
  EXPECT_EQ(verify_request(req, registry, cache, 31.5), VerifyStatus::Verified);
}

TEST_F(Fixture, InfiniteCacheNeverForgets)
{
  ReplayCache cache(std::nullopt);
  auto        req = request(1.0);
  ASSERT_EQ(verify_request(req, registry, cache, 1.0), VerifyStatus::Verified);
  EXPECT_EQ(verify_request(req, registry, cache, 1e6), VerifyStatus::ReplayDetected);
}

TEST_F(Fixture, ForeignKeyIsSpoofOrUnknown)
{
  ReplayCache cache;
  auto        forged = build_request(car, {10, {0, 0}, 1, 0}, 0.5, rogue, nonces, 0);
  EXPECT_EQ(verify_request(forged, registry, cache, 0), VerifyStatus::SpoofSuspected);
  auto ghost = build_request(NodeId::vehicle(99), {10, {0, 0}, 1, 0}, 0.5, rogue, nonces, 0);
  EXPECT_EQ(verify_request(ghost, registry, cache, 0), VerifyStatus::UnknownIdentity);
}

TEST_F(Fixture, TamperedContextIsSpoof)
{
  ReplayCache cache;
  auto        req = request(1.0);
  req.ctx.speed_mps += 5;
  EXPECT_EQ(verify_request(req, registry, cache, 1.0), VerifyStatus::SpoofSuspected);
}

TEST(Protocol, DecideIsInclusive)
{
  EXPECT_EQ(decide(0.65, 0.65), Decision::Accept);
  EXPECT_EQ(decide(0.649, 0.65), Decision::Fallback);
  EXPECT_EQ(decide(1.0, 0.65), Decision::Accept);
}

TEST_F(Fixture, SessionKeysAgree)
{
  auto req = request(1.0);
  auto rec = establish_session(req, fog, shared, 1.0, 120, 0.8, false);
  auto vk  = crypto::derive_session_key(shared, req.nonce);
  EXPECT_EQ(rec.key.bytes, vk.bytes);
  auto token = make_ack_token(rec.key, req.request_digest);
  EXPECT_TRUE(check_ack_token(token, vk, req.request_digest));
  token[0] ^= 1;
  EXPECT_FALSE(check_ack_token(token, vk, req.request_digest));
}

TEST_F(Fixture, SessionAbortsWhenVehicleGone)
{
  auto req = request(1.0);
  EXPECT_THROW(establish_session(req, fog, shared, 1.0, 120, 0.8, false, false), SessionAborted);
}

TEST_F(Fixture, DifferentFogsGiveDifferentKeys)
{
  std::array<std::uint8_t, 32> master{};
  auto req = request(1.0);
  auto s0  = crypto::provision_shared_secret(master, car.label(), "f00");
  auto s1  = crypto::provision_shared_secret(master, car.label(), "f01");
  EXPECT_NE(establish_session(req, NodeId::fog(0), s0, 1, 120, .8, false).key.bytes,
            establish_session(req, NodeId::fog(1), s1, 1, 120, .8, false).key.bytes);
}

TEST_F(Fixture, FallbackJudging)
{
  Challenge ch{car, fog, {}, 1.0};
  ch.value[3] = 7;
  auto resp   = answer_challenge(ch, key);
  EXPECT_EQ(judge_fallback(resp, ch, registry, 1.05, 0.1), FallbackVerdict::Accept);
  EXPECT_EQ(judge_fallback(resp, ch, registry, 1.2, 0.1), FallbackVerdict::Reject);
  EXPECT_EQ(judge_fallback(answer_challenge(ch, rogue), ch, registry, 1.05, 0.1), FallbackVerdict::Reject);
  Challenge newer = ch;
  newer.value[3]  = 8;
  EXPECT_EQ(judge_fallback(resp, newer, registry, 1.05, 0.1), FallbackVerdict::Reject);
  EXPECT_EQ(judge_fallback(resp, std::nullopt, registry, 1.05, 0.1), FallbackVerdict::Reject);
}

TEST_F(Fixture, LowTrustTakesFallbackThenAccepts)
{
  auto fa  = authority();
  auto req = request(1.0);
  auto out = fa.handle_request(req, 1.0);
  ASSERT_EQ(out.status, VerifyStatus::Verified);
  ASSERT_EQ(*out.decision, Decision::Fallback);
  ASSERT_TRUE(out.challenge);
  EXPECT_FALSE(out.session);
  EXPECT_EQ(out.ops, (std::vector<sim::OpKind>{sim::OpKind::SigVerify, sim::OpKind::TrustUpdate}));

  auto resp = answer_challenge(*out.challenge, key);
  auto fb   = fa.handle_challenge_response(resp, 1.05);
  ASSERT_EQ(fb.verdict, FallbackVerdict::Accept);
  ASSERT_TRUE(fb.session);
  EXPECT_TRUE(fb.session->via_fallback);
  EXPECT_TRUE(check_ack_token(*fb.token, crypto::derive_session_key(shared, req.nonce), req.request_digest));

  // replaying the same response after use is stale
  auto again = fa.handle_challenge_response(resp, 1.06);
  EXPECT_TRUE(again.stale);
  EXPECT_EQ(again.verdict, FallbackVerdict::Reject);
}

TEST_F(Fixture, AttackerCannotAnswerChallenge)
{
  auto fa  = authority();
  auto out = fa.handle_request(request(1.0), 1.0);
  ASSERT_TRUE(out.challenge);
  auto fb = fa.handle_challenge_response(answer_challenge(*out.challenge, rogue), 1.05);
  EXPECT_EQ(fb.verdict, FallbackVerdict::Reject);
  EXPECT_FALSE(fb.session);
}

TEST_F(Fixture, BeaconsRaiseTrustUntilDirectAccept)
{
  auto fa = authority();
  for (int t = 0; t < 60; ++t)
  {
    auto b = make_beacon(car, {10, {10.0 * t, 0}, 1, double(t)}, t + 1, shared);
    fa.observe_beacon(b, t);
  }
  EXPECT_GT(fa.trust_of(car), tp.theta);
  auto out = fa.handle_request(request(60.0, fa.trust_of(car), {600, 0}), 60.0);
  ASSERT_EQ(out.status, VerifyStatus::Verified);
  EXPECT_EQ(*out.decision, Decision::Accept);
  ASSERT_TRUE(out.session);
  EXPECT_GE(out.session->trust_at_grant, tp.theta);
  EXPECT_EQ(out.ops, (std::vector<sim::OpKind>{sim::OpKind::SigVerify, sim::OpKind::TrustUpdate, sim::OpKind::Hmac}));
  EXPECT_NE(fa.session_for(car), nullptr);
}

TEST_F(Fixture, ForgedBeaconIgnored)
{
  auto fa   = authority();
  auto b    = make_beacon(car, {10, {0, 0}, 1, 1.0}, 1, shared);
  b.ctx.speed_mps = 30;
  EXPECT_FALSE(check_beacon_mac(b, shared));
  double before = fa.trust_of(car);
  fa.observe_beacon(b, 1.0);
  EXPECT_EQ(fa.trust_of(car), before);
}

TEST_F(Fixture, AcceptWithVehicleGoneIsAborted)
{
  tp.theta = 0.0;
  auto fa  = authority();
  auto out = fa.handle_request(request(1.0), 1.0, false);
  EXPECT_TRUE(out.aborted);
  EXPECT_FALSE(out.session);
  EXPECT_EQ(fa.session_count(), 0u);
}

TEST(Protocol, CoLocationFlagsClusteredIdentities)
{
  CoLocationMonitor mon(5.0, 0.01);
  mon.report("v900", {10, {0, 0}, 1, 5.0}, 5.0);
  auto flagged = mon.report("v901", {10, {3, 0}, 1, 5.0}, 5.0);
  EXPECT_EQ(mon.flagged(), (std::set<std::string>{"v900", "v901"}));
  EXPECT_FALSE(flagged.empty());
  CoLocationMonitor apart(5.0, 0.01);
  apart.report("a", {10, {0, 0}, 1, 5.0}, 5.0);
  apart.report("b", {10, {30, 0}, 1, 5.0}, 5.0);
  EXPECT_TRUE(apart.flagged().empty());
}
