#include "ztmaf/metrics.hpp"

#include "ztmaf/errors.hpp"

#include "json.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>

namespace ztmaf::metrics {

namespace {

constexpr std::array<std::string_view, kOutcomeCount> kOutcomeNames{
    "granted", "granted_fallback", "rejected_spoof", "rejected_replay",
    "rejected_unknown", "rejected_trust", "aborted"};

double round6(double x)
{
  return std::round(x * 1e6) / 1e6;
}

template <class F>
std::optional<double> mean_of(const std::vector<AttemptRecord> &records, F value)
{
  double      sum = 0.0;
  std::size_t n   = 0;
  for (const auto &r : records)
  {
    if (auto v = value(r))
    {
      sum += *v;
      ++n;
    }
  }
  if (n == 0)
  {
    return std::nullopt;
  }
  return sum / static_cast<double>(n);
}

}  // namespace

std::string_view to_string(Outcome o)
{
  return kOutcomeNames[static_cast<std::size_t>(o)];
}

Outcome parse_outcome(std::string_view name)
{
  for (std::size_t i = 0; i < kOutcomeNames.size(); ++i)
  {
    if (kOutcomeNames[i] == name)
    {
      return static_cast<Outcome>(i);
    }
  }
  throw InvariantViolation("unknown outcome '" + std::string(name) + "'");
}

bool is_granted(Outcome o)
{
  return o == Outcome::Granted || o == Outcome::GrantedFallback;
}

bool scored_detected(Outcome o, bool malicious)
{
  if (malicious)
  {
    return o != Outcome::Granted && o != Outcome::Aborted;
  }
  return o == Outcome::RejectedSpoof || o == Outcome::RejectedReplay || o == Outcome::RejectedUnknown;
}

AttemptRecord quantized(AttemptRecord r)
{
  r.t_s = round6(r.t_s);
  if (r.latency_ms)
  {
    r.latency_ms = round6(*r.latency_ms);
  }
  r.comm_ms      = round6(r.comm_ms);
  r.trust_before = round6(r.trust_before);
  r.trust_after  = round6(r.trust_after);
  return r;
}

double auth_latency(double emitted_s, double ack_s)
{
  if (!(ack_s >= emitted_s))
  {
    throw InvariantViolation("acknowledgment precedes emission");
  }
  return ack_s - emitted_s;
}

double end_to_end_delay(double latency_s, double comm_delay_s)
{
  if (!(latency_s >= 0.0) || !(comm_delay_s >= 0.0))
  {
    throw InvariantViolation("delays must be non-negative");
  }
  return latency_s + comm_delay_s;
}

std::optional<double> session_success_rate(const std::vector<AttemptRecord> &records,
                                           bool exclude_malicious)
{
  std::size_t total = 0, valid = 0;
  for (const auto &r : records)
  {
    if (exclude_malicious && r.malicious)
    {
      continue;
    }
    ++total;
    valid += is_granted(r.outcome) ? 1 : 0;
  }
  if (total == 0)
  {
    return std::nullopt;
  }
  return static_cast<double>(valid) / static_cast<double>(total);
}

double security_index(double trust, double delta_s, double behavior, double delta_max_s)
{
  if (!(delta_max_s > 0.0))
  {
    throw InvariantViolation("delta_max must be positive");
  }
  return trust * std::clamp(1.0 - delta_s / delta_max_s, 0.0, 1.0) * behavior;
}

std::optional<double> detection_rate(const std::vector<AttemptRecord> &records,
                                     std::optional<threats::AttackKind> kind)
{
  std::size_t total = 0, caught = 0;
  for (const auto &r : records)
  {
    if (!r.malicious || (kind && r.attack_kind != *kind))
    {
      continue;
    }
    ++total;
    caught += r.detected ? 1 : 0;
  }
  if (total == 0)
  {
    return std::nullopt;
  }
  return static_cast<double>(caught) / static_cast<double>(total);
}

std::optional<double> false_positive_rate(const std::vector<AttemptRecord> &records)
{
  std::size_t honest = 0, flagged = 0;
  for (const auto &r : records)
  {
    if (r.malicious)
    {
      continue;
    }
    ++honest;
    flagged += scored_detected(r.outcome, false) ? 1 : 0;
  }
  if (honest == 0)
  {
    return std::nullopt;
  }
  return static_cast<double>(flagged) / static_cast<double>(honest);
}

Convergence convergence_report(const TrustHistory &history, double eps)
{
  if (history.empty())
  {
    throw InvariantViolation("empty trust history");
  }
  if (!(eps > 0.0))
  {
    throw InvariantViolation("eps must be positive");
  }
  const std::size_t n    = history.size();
  const std::size_t tail = std::min<std::size_t>(10, n);
  double            sum  = 0.0;
  for (std::size_t i = n - tail; i < n; ++i)
  {
    sum += history[i].second;
  }
  Convergence c;
  c.terminal = sum / static_cast<double>(tail);
  auto inside = [&](std::size_t i) { return std::abs(history[i].second - c.terminal) <= eps; };
  c.converged = true;
  for (std::size_t i = n - tail; i < n; ++i)
  {
    c.converged = c.converged && inside(i);
  }
  if (!c.converged)
  {
    return c;
  }
  std::size_t first = n;
  while (first > 0 && inside(first - 1))
  {
    --first;
  }
  c.time_s = history[first].first - history.front().first;
  return c;
}

double percentile(std::vector<double> values, double q)
{
  if (values.empty() || !(q > 0.0 && q <= 1.0))
  {
    throw InvariantViolation("percentile needs values and q in (0,1]");
  }
  std::sort(values.begin(), values.end());
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size())));
  return values[std::max<std::size_t>(rank, 1) - 1];
}

RunSummary summarize(std::size_t fleet, const std::vector<AttemptRecord> &records,
                     const std::map<std::string, TrustHistory> &trust, std::size_t sybil_flags,
                     const SummaryOptions &opts)
{
  RunSummary s;
  s.fleet          = fleet;
  s.attempts_total = records.size();
  for (auto name : kOutcomeNames)
  {
    s.outcomes[std::string(name)] = 0;
  }
  std::vector<double> latencies;
  for (const auto &r : records)
  {
    (r.malicious ? s.attempts_malicious : s.attempts_honest)++;
    s.outcomes[std::string(to_string(r.outcome))]++;
    if (!r.malicious && r.latency_ms)
    {
      latencies.push_back(*r.latency_ms);
    }
  }
  auto honest_latency = [](const AttemptRecord &r) -> std::optional<double> {
    return r.malicious ? std::nullopt : r.latency_ms;
  };
  s.mean_latency_ms = mean_of(records, honest_latency);
  if (!latencies.empty())
  {
    s.p95_latency_ms = percentile(latencies, 0.95);
  }
  s.mean_comm_ms = mean_of(records, [](const AttemptRecord &r) -> std::optional<double> {
    if (r.malicious || !r.latency_ms) return std::nullopt;
    return r.comm_ms;
  });
  s.mean_delay_ms = mean_of(records, [](const AttemptRecord &r) -> std::optional<double> {
    if (r.malicious || !r.latency_ms) return std::nullopt;
    return *r.latency_ms + r.comm_ms;
  });
  s.s_rate      = session_success_rate(records, opts.exclude_malicious);
  s.mean_cycles = mean_of(records, [](const AttemptRecord &r) -> std::optional<double> {
    if (r.malicious) return std::nullopt;
    return static_cast<double>(r.cycles);
  });
  s.p_accept = mean_of(records, [&](const AttemptRecord &r) -> std::optional<double> {
    if (r.malicious) return std::nullopt;
    return r.trust_after >= opts.theta ? 1.0 : 0.0;
  });
  for (auto kind : {threats::AttackKind::Spoof, threats::AttackKind::Replay, threats::AttackKind::Sybil,
                    threats::AttackKind::Context})
  {
    if (auto d = detection_rate(records, kind))
    {
      s.detection[std::string(threats::to_string(kind))] = *d;
    }
  }
  if (auto d = detection_rate(records, std::nullopt))
  {
    s.detection["combined"] = *d;
  }
  s.false_positive_rate = false_positive_rate(records);
  s.mean_security_index = mean_of(records, [&](const AttemptRecord &r) -> std::optional<double> {
    if (r.malicious || !r.latency_ms) return std::nullopt;
    double delta = end_to_end_delay(*r.latency_ms, r.comm_ms) / 1000.0;
    return security_index(r.trust_after, delta, r.behavior, opts.delta_max_s);
  });
  s.sybil_flags = sybil_flags;

  double      conv_sum = 0.0;
  std::size_t conv_n   = 0;
  for (const auto &[vehicle, history] : trust)
  {
    if (history.empty())
    {
      continue;
    }
    auto c = convergence_report(history, opts.convergence_eps);
    if (c.converged)
    {
      s.trust_convergence_s[vehicle] = c.time_s;
      conv_sum += c.time_s;
      ++conv_n;
    }
    else
    {
      s.trust_convergence_s[vehicle] = std::nullopt;
    }
  }
  if (conv_n > 0)
  {
    s.mean_convergence_s = conv_sum / static_cast<double>(conv_n);
  }
  return s;
}

void write_attempts_csv(std::ostream &out, const std::vector<AttemptRecord> &records)
{
  out << kAttemptsHeader << '\n';
  for (const auto &r : records)
  {
    out << fmt::format("{:.6f},{},{},{},{},{:.6f},{},{:.6f},{:.6f},{},{},{}\n", r.t_s, r.vehicle, r.fog,
                       to_string(r.outcome), r.latency_ms ? fmt::format("{:.6f}", *r.latency_ms) : "",
                       r.comm_ms, r.cycles, r.trust_before, r.trust_after, r.malicious ? 1 : 0,
                       r.detected ? 1 : 0, threats::to_string(r.attack_kind));
  }
}

void write_trust_csv(std::ostream &out, const std::vector<std::tuple<double, std::string, double>> &rows)
{
  out << kTrustHeader << '\n';
  for (const auto &[t, vehicle, trust] : rows)
  {
    out << fmt::format("{:.6f},{},{:.6f}\n", t, vehicle, trust);
  }
}

std::string summary_json(const RunSummary &s)
{
  nlohmann::ordered_json j;
  auto put = [&j](const char *key, const std::optional<double> &v) {
    if (v)
    {
      j[key] = *v;
    }
  };
  j["fleet"]              = s.fleet;
  j["attempts_total"]     = s.attempts_total;
  j["attempts_honest"]    = s.attempts_honest;
  j["attempts_malicious"] = s.attempts_malicious;
  j["outcomes"]           = s.outcomes;
  put("mean_latency_ms", s.mean_latency_ms);
  put("p95_latency_ms", s.p95_latency_ms);
  put("mean_comm_ms", s.mean_comm_ms);
  put("mean_delay_ms", s.mean_delay_ms);
  put("s_rate", s.s_rate);
  put("mean_cycles", s.mean_cycles);
  put("p_accept", s.p_accept);
  if (!s.detection.empty())
  {
    j["detection"] = s.detection;
  }
  put("false_positive_rate", s.false_positive_rate);
  put("mean_security_index", s.mean_security_index);
  j["sybil_flags"] = s.sybil_flags;
  put("mean_convergence_s", s.mean_convergence_s);
  nlohmann::ordered_json conv = nlohmann::ordered_json::object();
  for (const auto &[vehicle, t] : s.trust_convergence_s)
  {
    conv[vehicle] = t ? nlohmann::ordered_json(*t) : nlohmann::ordered_json(nullptr);
  }
  j["trust_convergence_s"] = conv;
  return j.dump(2) + "\n";
}

}  // namespace ztmaf::metrics
