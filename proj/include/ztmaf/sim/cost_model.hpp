#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string_view>

namespace ztmaf::sim {

enum class OpKind : std::uint8_t
{
  Hash,
  Hmac,
  Sign,
  SigVerify,
  TrustUpdate,
  CertVerify,
  ConsensusOverhead,
};

inline constexpr std::size_t kOpKindCount = 7;

/// Throws CostModelError for names outside the table.
OpKind           parse_op_kind(std::string_view name);
std::string_view to_string(OpKind kind);

/// Declared CPU cycles per operation. A model, not a measurement.
struct CostTable
{
  std::array<std::uint64_t, kOpKindCount> cycles{2000, 3000, 6000, 8000, 500, 12000, 15000};

  std::uint64_t  at(OpKind k) const { return cycles[static_cast<std::size_t>(k)]; }
  std::uint64_t &at(OpKind k) { return cycles[static_cast<std::size_t>(k)]; }

  static CostTable zero() { return CostTable{{}}; }
};

/// Wall-clock service time per operation on the simulated devices, in seconds.
struct ProcessingTimes
{
  std::array<double, kOpKindCount> seconds{0.5e-3, 1.0e-3, 52e-3, 65e-3, 1.0e-3, 20e-3, 0.0};

  double  at(OpKind k) const { return seconds[static_cast<std::size_t>(k)]; }
  double &at(OpKind k) { return seconds[static_cast<std::size_t>(k)]; }

  static ProcessingTimes zero() { return ProcessingTimes{{}}; }
};

/// Accumulates charged cycles per in-flight authentication attempt.
class CycleLedger
{
public:
  std::uint64_t charge(OpKind kind, const CostTable &table, std::uint64_t attempt);
  std::uint64_t total(std::uint64_t attempt) const;
  std::uint64_t grand_total() const { return grand_total_; }

private:
  std::map<std::uint64_t, std::uint64_t> per_attempt_;
  std::uint64_t                          grand_total_{0};
};

/// Charges by operation name; returns the attempt's accumulated cycles.
std::uint64_t charge(std::string_view kind, const CostTable &table, CycleLedger &ledger,
                     std::uint64_t attempt);

}  // namespace ztmaf::sim
