#pragma once

#include "ztmaf/threats.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

namespace ztmaf::metrics {

enum class Outcome
{
  Granted,
  GrantedFallback,
  RejectedSpoof,
  RejectedReplay,
  RejectedUnknown,
  RejectedTrust,
  Aborted,
};

inline constexpr std::size_t kOutcomeCount = 7;

std::string_view to_string(Outcome o);
/// Throws InvariantViolation for unknown names.
Outcome parse_outcome(std::string_view name);
bool    is_granted(Outcome o);

struct AttemptRecord
{
  double                t_s{0.0};  // attempt initiation
  std::string           vehicle;
  std::string           fog;
  Outcome               outcome{Outcome::Aborted};
  std::optional<double> latency_ms;  // empty unless the requester received an ACK
  double                comm_ms{0.0};
  std::uint64_t         cycles{0};
  double                trust_before{0.0};
  double                trust_after{0.0};
  bool                  malicious{false};
  bool                  detected{false};
  threats::AttackKind   attack_kind{threats::AttackKind::None};
  double                behavior{1.0};  // fog's estimate at decision; not serialized

  bool operator==(const AttemptRecord &) const = default;
};

/// detected for a finished attempt: an attacker is caught by any outcome other
/// than a plain grant or an abort; an honest attempt is flagged when rejected
/// as an attack.
bool scored_detected(Outcome o, bool malicious);

/// Rounds a record's real fields to the precision written to attempts.csv so
/// aggregates over the file and over memory agree exactly.
AttemptRecord quantized(AttemptRecord r);

double auth_latency(double emitted_s, double ack_s);
double end_to_end_delay(double latency_s, double comm_delay_s);
/// Granted / total over honest attempts (all attempts when exclude_malicious
/// is false). Empty when the denominator is zero.
std::optional<double> session_success_rate(const std::vector<AttemptRecord> &records,
                                           bool exclude_malicious = true);
double security_index(double trust, double delta_s, double behavior, double delta_max_s);
/// Detected share of malicious attempts of the given kind, or of all
/// malicious attempts when kind is empty.
std::optional<double> detection_rate(const std::vector<AttemptRecord> &records,
                                     std::optional<threats::AttackKind> kind);
/// Honest attempts rejected as spoof, replay or unknown identity, over honest attempts.
std::optional<double> false_positive_rate(const std::vector<AttemptRecord> &records);

using TrustHistory = std::vector<std::pair<double, double>>;  // (t_s, trust)

struct Convergence
{
  bool   converged{false};
  double time_s{0.0};    // from the first sample
  double terminal{0.0};  // mean of the last min(10, n) samples
};

/// Throws InvariantViolation on an empty history or eps <= 0.
Convergence convergence_report(const TrustHistory &history, double eps);

/// Nearest-rank percentile on a copy of values; q in (0, 1].
double percentile(std::vector<double> values, double q);

struct RunSummary
{
  std::size_t                           fleet{0};
  std::size_t                           attempts_total{0};
  std::size_t                           attempts_honest{0};
  std::size_t                           attempts_malicious{0};
  std::map<std::string, std::size_t>    outcomes;
  std::optional<double>                 mean_latency_ms;
  std::optional<double>                 p95_latency_ms;
  std::optional<double>                 mean_comm_ms;
  std::optional<double>                 mean_delay_ms;
  std::optional<double>                 s_rate;
  std::optional<double>                 mean_cycles;
  std::optional<double>                 p_accept;
  std::map<std::string, double>         detection;  // per kind plus "combined"
  std::optional<double>                 false_positive_rate;
  std::optional<double>                 mean_security_index;
  std::size_t                           sybil_flags{0};
  std::map<std::string, std::optional<double>> trust_convergence_s;
  std::optional<double>                 mean_convergence_s;
};

struct SummaryOptions
{
  double theta{0.65};
  double delta_max_s{0.2};
  double convergence_eps{0.01};
  bool   exclude_malicious{true};
};

/// Pure post-pass over finished attempts and per-vehicle trust histories.
RunSummary summarize(std::size_t fleet, const std::vector<AttemptRecord> &records,
                     const std::map<std::string, TrustHistory> &trust, std::size_t sybil_flags,
                     const SummaryOptions &opts);

inline constexpr std::string_view kAttemptsHeader =
    "t_s,vehicle,fog,outcome,latency_ms,comm_ms,cycles,trust_before,trust_after,malicious,detected,"
    "attack_kind";
inline constexpr std::string_view kTrustHeader = "t_s,vehicle,trust";

void        write_attempts_csv(std::ostream &out, const std::vector<AttemptRecord> &records);
void        write_trust_csv(std::ostream &out,
                            const std::vector<std::tuple<double, std::string, double>> &rows);
std::string summary_json(const RunSummary &summary);

}  // namespace ztmaf::metrics
