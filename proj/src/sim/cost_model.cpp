#include "ztmaf/sim/cost_model.hpp"

#include "ztmaf/errors.hpp"

#include <string>

namespace ztmaf::sim {

namespace {

constexpr std::array<std::string_view, kOpKindCount> kNames{
    "hash", "hmac", "sign", "sig_verify", "trust_update", "cert_verify", "consensus_overhead"};

}  // namespace

OpKind parse_op_kind(std::string_view name)
{
  for (std::size_t i = 0; i < kNames.size(); ++i)
  {
    if (kNames[i] == name)
    {
      return static_cast<OpKind>(i);
    }
  }
  throw CostModelError("unknown operation kind '" + std::string(name) + "'");
}

std::string_view to_string(OpKind kind)
{
  return kNames[static_cast<std::size_t>(kind)];
}

std::uint64_t CycleLedger::charge(OpKind kind, const CostTable &table, std::uint64_t attempt)
{
  std::uint64_t c = table.at(kind);
  grand_total_ += c;
  return per_attempt_[attempt] += c;
}

std::uint64_t CycleLedger::total(std::uint64_t attempt) const
{
  auto it = per_attempt_.find(attempt);
  return it == per_attempt_.end() ? 0 : it->second;
}

std::uint64_t charge(std::string_view kind, const CostTable &table, CycleLedger &ledger,
                     std::uint64_t attempt)
{
  return ledger.charge(parse_op_kind(kind), table, attempt);
}

}  // namespace ztmaf::sim
