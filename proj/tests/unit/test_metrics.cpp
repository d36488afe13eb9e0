#include "ztmaf/errors.hpp"
#include "ztmaf/metrics.hpp"

#include <gtest/gtest.h>

#include "json.hpp"

#include <sstream>

using namespace ztmaf;
using namespace ztmaf::metrics;
using threats::AttackKind;

namespace {

AttemptRecord rec(Outcome o, bool malicious = false, AttackKind kind = AttackKind::None,
                  std::optional<double> lat = std::nullopt)
{
  AttemptRecord r;
  r.vehicle     = "v001";
  r.fog         = "f00";
  r.outcome     = o;
  r.malicious   = malicious;
  r.attack_kind = kind;
  r.latency_ms  = lat;
  r.detected    = scored_detected(o, malicious);
  return r;
}

}  // namespace

TEST(Metrics, LatencyAndDelay)
{
  EXPECT_NEAR(auth_latency(10.000, 10.148), 0.148, 1e-12);
  EXPECT_THROW(auth_latency(10.0, 9.0), InvariantViolation);
  EXPECT_NEAR(end_to_end_delay(0.150, 0.010), 0.160, 1e-15);
  EXPECT_DOUBLE_EQ(end_to_end_delay(0.2, 0.0), 0.2);
  EXPECT_DOUBLE_EQ(end_to_end_delay(0.0, 0.0), 0.0);
}

TEST(Metrics, SuccessRate)
{
  std::vector<AttemptRecord> rs;
  for (int i = 0; i < 97; ++i) rs.push_back(rec(Outcome::Granted));
  for (int i = 0; i < 3; ++i) rs.push_back(rec(Outcome::Aborted));
  for (int i = 0; i < 10; ++i) rs.push_back(rec(Outcome::RejectedSpoof, true, AttackKind::Spoof));
  EXPECT_DOUBLE_EQ(*session_success_rate(rs, true), 0.97);
  EXPECT_DOUBLE_EQ(*session_success_rate(rs, false), 97.0 / 110.0);
  EXPECT_FALSE(session_success_rate({}, true));
}

TEST(Metrics, SecurityIndex)
{
  EXPECT_NEAR(security_index(0.8, 0.1, 0.9, 0.2), 0.36, 1e-15);
  EXPECT_DOUBLE_EQ(security_index(0.8, 0.3, 0.9, 0.2), 0.0);
  EXPECT_DOUBLE_EQ(security_index(1, 0, 1, 0.2), 1.0);
}

TEST(Metrics, DetectionRate)
{
  std::vector<AttemptRecord> rs;
  for (int i = 0; i < 97; ++i) rs.push_back(rec(Outcome::RejectedReplay, true, AttackKind::Replay));
  for (int i = 0; i < 3; ++i) rs.push_back(rec(Outcome::Granted, true, AttackKind::Replay));
  EXPECT_DOUBLE_EQ(*detection_rate(rs, AttackKind::Replay), 0.97);
  EXPECT_FALSE(detection_rate(rs, AttackKind::Spoof));
  EXPECT_FALSE(detection_rate({rec(Outcome::Granted)}, std::nullopt));
}

TEST(Metrics, ScoredDetection)
{
  EXPECT_TRUE(scored_detected(Outcome::RejectedTrust, true));
  EXPECT_TRUE(scored_detected(Outcome::GrantedFallback, true));
  EXPECT_FALSE(scored_detected(Outcome::Granted, true));
  EXPECT_FALSE(scored_detected(Outcome::Aborted, true));
  EXPECT_FALSE(scored_detected(Outcome::RejectedTrust, false));
  EXPECT_TRUE(scored_detected(Outcome::RejectedSpoof, false));
}

TEST(Metrics, ConvergenceReport)
{
  TrustHistory h;
  double       t = 0.5;
  for (int k = 0; k <= 200; ++k)
  {
    h.emplace_back(k, t);
    t = 0.92 * t + 0.08 * 1.0;
  }
  // terminal estimate sits a hair under 1, so the band edge can move by one step
  auto c = convergence_report(h, 0.01);
  ASSERT_TRUE(c.converged);
  EXPECT_NEAR(c.time_s, 47.0, 1.0);

  TrustHistory flat{{3, 0.8}, {4, 0.8}, {5, 0.8}};
  EXPECT_DOUBLE_EQ(convergence_report(flat, 0.01).time_s, 0.0);

  TrustHistory osc;
  for (int k = 0; k < 40; ++k) osc.emplace_back(k, k % 2 ? 0.9 : 0.6);
  EXPECT_FALSE(convergence_report(osc, 0.01).converged);
}

TEST(Metrics, Percentile)
{
  std::vector<double> v{5, 1, 4, 2, 3};
  EXPECT_DOUBLE_EQ(percentile(v, 0.95), 5);
  EXPECT_DOUBLE_EQ(percentile(v, 0.2), 1);
  EXPECT_DOUBLE_EQ(percentile(v, 0.5), 3);
}

TEST(Metrics, OutcomeNamesRoundTrip)
{
  for (std::size_t i = 0; i < kOutcomeCount; ++i)
  {
    auto o = static_cast<Outcome>(i);
    EXPECT_EQ(parse_outcome(to_string(o)), o);
  }
}

TEST(Metrics, SummaryOmitsEmptyFields)
{
  auto s = summarize(10, {}, {}, 0, {});
  auto j = nlohmann::json::parse(summary_json(s));
  EXPECT_FALSE(j.contains("s_rate"));
  EXPECT_FALSE(j.contains("detection"));
  EXPECT_FALSE(j.contains("mean_latency_ms"));
  EXPECT_EQ(j["attempts_total"], 0);
}

TEST(Metrics, SummaryPartitionsOutcomes)
{
  std::vector<AttemptRecord> rs{rec(Outcome::Granted, false, AttackKind::None, 140.0),
                                rec(Outcome::GrantedFallback, false, AttackKind::None, 260.0),
                                rec(Outcome::Aborted), rec(Outcome::RejectedSpoof, true, AttackKind::Spoof)};
  auto s = summarize(4, rs, {}, 0, {});
  std::size_t sum = 0;
  for (const auto &[k, n] : s.outcomes) sum += n;
  EXPECT_EQ(sum, s.attempts_total);
  EXPECT_DOUBLE_EQ(*s.mean_latency_ms, 200.0);
  EXPECT_DOUBLE_EQ(*s.s_rate, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.detection.at("spoof"), 1.0);
  EXPECT_DOUBLE_EQ(s.detection.at("combined"), 1.0);
}

TEST(Metrics, AttemptsCsvLayout)
{
  std::ostringstream out;
  auto               r = rec(Outcome::Granted, false, AttackKind::None, 137.5);
  r.t_s                = 12.25;
  r.cycles             = 19500;
  r.trust_before       = 0.7;
  r.trust_after        = 0.71;
  write_attempts_csv(out, {r, rec(Outcome::Aborted)});
  std::istringstream in(out.str());
  std::string        header, row, row2;
  std::getline(in, header);
  std::getline(in, row);
  std::getline(in, row2);
  EXPECT_EQ(header, kAttemptsHeader);
  EXPECT_EQ(row, "12.250000,v001,f00,granted,137.500000,0.000000,19500,0.700000,0.710000,0,0,none");
  EXPECT_EQ(row2, "0.000000,v001,f00,aborted,,0.000000,0,0.000000,0.000000,0,0,none");
}
