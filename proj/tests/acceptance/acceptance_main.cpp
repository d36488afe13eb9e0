// One PASS/FAIL line per acceptance criterion. Exit status 1 if any fails.
#include "ztmaf/errors.hpp"
#include "ztmaf/scenario/runner.hpp"
#include "ztmaf/trust.hpp"

#include <fmt/core.h>

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>

using namespace ztmaf;
using namespace ztmaf::scenario;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(const std::string &id, bool ok, const std::string &detail)
{
  fmt::print("{} {}: {}\n", ok ? "PASS" : "FAIL", id, detail);
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(Clock::time_point t0)
{
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double opt(const std::optional<double> &v) { return v.value_or(std::nan("")); }

double det(const RunResult &r, const char *kind)
{
  auto it = r.summary.detection.find(kind);
  return it == r.summary.detection.end() ? std::nan("") : it->second;
}

void criterion_trust()
{
  auto        t0 = Clock::now();
  const double alpha = 0.92, psi_star = 1.0, eps = 0.01;
  double       t     = 0.5;
  std::size_t  steps = 0;
  while (std::abs(t - psi_star) > eps)
  {
    t = trust::filter_step(t, psi_star, alpha);
    ++steps;
  }
  auto   closed  = trust::convergence_time(0.5, psi_star, alpha, eps);
  double elapsed = seconds_since(t0);
  bool   ok = std::llabs(static_cast<long long>(steps) - 47) <= 1 && closed == steps && elapsed < 1.0;
  report("1 trust-convergence", ok,
         fmt::format("iterated={} closed_form={} elapsed={:.6f}s", steps, closed, elapsed));
}

void criterion_sweep(const std::vector<RunResult> &runs, double elapsed)
{
  const RunResult *r400 = nullptr;
  for (const auto &r : runs)
    if (r.fleet == 400) r400 = &r;
  double lat = r400 ? opt(r400->summary.mean_latency_ms) : std::nan("");
  report("2 latency", lat < 200.0 && elapsed < 120.0,
         fmt::format("fleet400 mean_latency={:.3f}ms sweep_wall={:.2f}s", lat, elapsed));

  bool        all_s = true;
  std::size_t violations = 0;
  std::string s_list, l_list;
  for (std::size_t i = 0; i < runs.size(); ++i)
  {
    double s = opt(runs[i].summary.s_rate);
    all_s    = all_s && s >= 0.95;
    s_list += fmt::format("{}{}:{:.4f}", i ? " " : "", runs[i].fleet, s);
    l_list += fmt::format("{}{:.2f}", i ? "," : "", opt(runs[i].summary.mean_latency_ms));
    if (i > 0 && !(opt(runs[i].summary.mean_latency_ms) >= opt(runs[i - 1].summary.mean_latency_ms)))
      ++violations;
  }
  report("7 scalability", all_s && violations <= 1 && runs.size() == 5,
         fmt::format("s_rate[{}] latency[{}] monotonicity_violations={}", s_list, l_list, violations));
}

void criterion_success_rate()
{
  ScenarioConfig c;
  c.tier  = MobilityTier::High;
  auto r  = run_fleet(c, 300);
  double s = opt(r.summary.s_rate);
  report("3 success-rate", s >= 0.95, fmt::format("high tier fleet300 s_rate={:.4f}", s));
}

void criterion_cycles(const RunResult &r)
{
  double      mean = opt(r.summary.mean_cycles);
  std::size_t direct = 0, off = 0;
  for (const auto &a : r.attempts)
  {
    if (a.malicious || a.outcome != metrics::Outcome::Granted) continue;
    ++direct;
    if (a.cycles != 19500) ++off;
  }
  report("4 cycles", mean < 25000 && direct > 0 && off == 0,
         fmt::format("fleet300 mean_cycles={:.1f} direct_grants={} not_19500={}", mean, direct, off));
}

void criterion_detection()
{
  ScenarioConfig c;
  c.spoof_rate_hz  = 0.5;
  c.replay_rate_hz = 0.5;
  c.replay_ttl_s   = std::nullopt;
  auto inf         = run_fleet(c, 300);
  report("5a detection-infinite-ttl", det(inf, "spoof") == 1.0 && det(inf, "replay") == 1.0,
         fmt::format("spoof={:.4f} replay={:.4f}", det(inf, "spoof"), det(inf, "replay")));

  c.replay_ttl_s = 30.0;
  auto   ttl     = run_fleet(c, 300);
  double comb    = det(ttl, "combined");
  report("5b detection-ttl30", comb >= 0.95 && comb <= 0.99,
         fmt::format("combined={:.4f} spoof={:.4f} replay={:.4f}", comb, det(ttl, "spoof"),
                     det(ttl, "replay")));
}

void criterion_ratios(const ScenarioConfig &c, const RunResult &r)
{
  auto rows = compare_rows(c, r, {"ztmaf", "blockchain", "pki"});
  double z = rows[0].mean_latency_ms, b = rows[1].mean_latency_ms, p = rows[2].mean_latency_ms;
  double rb = z / b, rp = z / p;

  auto        costs = model_costs(c, r, {threats::BaselineKind::Ztmaf, threats::BaselineKind::Pki,
                                         threats::BaselineKind::Blockchain});
  std::size_t worse = 0;
  for (std::size_t i = 0; i < costs[0].per_attempt.size(); ++i)
  {
    double zl = costs[0].per_attempt[i].latency_s;
    if (zl > costs[1].per_attempt[i].latency_s || zl > costs[2].per_attempt[i].latency_s) ++worse;
  }
  bool ok = std::abs(rb - 0.79) <= 0.05 && std::abs(rp - 0.65) <= 0.05 && worse == 0;
  report("6 baseline-ratios", ok,
         fmt::format("ztmaf/blockchain={:.4f} ztmaf/pki={:.4f} attempts={} ztmaf_slower={}", rb, rp,
                     costs[0].per_attempt.size(), worse));
}

void criterion_properties()
{
  struct Suite
  {
    const char *name;
    const char *filter;
  };
  const Suite suites[] = {
      {"8a trust-filter-properties", "TrustProperty.*:Trust.Convergence*"},
      {"8b encoding-injectivity", "CryptoProperty.EncodingInjective"},
      {"8c sign-verify", "CryptoProperty.SignVerifyAgainstOracle"},
      {"8d hmac-vectors", "Crypto.HmacConformanceVectors"},
      {"8e packet-conservation-causality", "WorldProperty.PacketConservationAndCausality"},
      {"8f bitwise-determinism", "WorldProperty.BitwiseDeterminism"},
      {"8g summary-recount", "WorldProperty.SummaryMatchesIndependentRecount"},
  };
  for (const auto &s : suites)
  {
    std::string cmd = fmt::format("{} --gtest_filter='{}' --gtest_brief=1 >/dev/null 2>&1",
                                  ZTMAF_UNIT_TESTS, s.filter);
    int rc = std::system(cmd.c_str());
    bool ok = WIFEXITED(rc) && WEXITSTATUS(rc) == 0;
    report(s.name, ok, fmt::format("filter={} exit={}", s.filter, WIFEXITED(rc) ? WEXITSTATUS(rc) : -1));
  }
}

}  // namespace

int main()
{
  try
  {
    criterion_trust();

    ScenarioConfig c;
    auto           t0   = Clock::now();
    auto           runs = run_fleets(c, c.fleet_sizes, 1);
    double         wall = seconds_since(t0);
    criterion_sweep(runs, wall);

    criterion_success_rate();

    const RunResult *r300 = nullptr;
    for (const auto &r : runs)
      if (r.fleet == 300) r300 = &r;
    if (!r300) throw InvariantViolation("default sweep lacks fleet 300");
    criterion_cycles(*r300);
    criterion_detection();
    criterion_ratios(c, *r300);
    criterion_properties();
  }
  catch (const std::exception &e)
  {
    report("harness", false, e.what());
  }
  fmt::print("{} criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
