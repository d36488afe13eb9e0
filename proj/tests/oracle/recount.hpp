#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace oracle {

// Aggregates rebuilt from attempts.csv alone, one pass, no library code.
struct Recount
{
  std::size_t                        total{0};
  std::size_t                        honest{0};
  std::size_t                        malicious{0};
  std::map<std::string, std::size_t> outcomes;
  std::optional<double>              mean_latency_ms;
  std::optional<double>              p95_latency_ms;
  std::optional<double>              mean_comm_ms;
  std::optional<double>              mean_delay_ms;
  std::optional<double>              s_rate;
  std::optional<double>              mean_cycles;
  std::optional<double>              p_accept;
  std::map<std::string, double>      detection;
  std::optional<double>              false_positive_rate;
};

Recount recount_attempts(const std::filesystem::path &attempts_csv, double theta, bool exclude_malicious = true);

}  // namespace oracle
