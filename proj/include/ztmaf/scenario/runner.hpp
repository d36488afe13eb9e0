#pragma once

#include "ztmaf/scenario/config.hpp"
#include "ztmaf/scenario/world.hpp"
#include "ztmaf/threats.hpp"

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace ztmaf::scenario {

/// Per-fleet stream seed, derived from the master seed and the fleet size only.
std::uint64_t run_seed_for(std::uint64_t master_seed, std::size_t fleet);

RunResult run_fleet(const ScenarioConfig &cfg, std::size_t fleet, const SimOptions &opts = {});

/// Runs every fleet with up to `parallel` worker threads. Results keep input order.
std::vector<RunResult> run_fleets(const ScenarioConfig &cfg, const std::vector<std::size_t> &fleets,
                                  std::size_t parallel, const SimOptions &opts = {});

/// attempts.csv, trust.csv, summary.json, config.echo (+ events.csv when tracing).
void write_run_dir(const RunResult &result, const ScenarioConfig &cfg, const std::filesystem::path &dir);

void write_event_trace(std::ostream &out, const std::vector<sim::TraceRow> &rows);

inline constexpr std::string_view kSweepHeader =
    "fleet,mean_latency_ms,p95_latency_ms,s_rate,mean_cycles,detection_rate";
inline constexpr std::string_view kCompareHeader = "model,fleet,mean_latency_ms,mean_cycles";

struct SweepRow
{
  std::size_t           fleet{0};
  std::optional<double> mean_latency_ms;
  std::optional<double> p95_latency_ms;
  std::optional<double> s_rate;
  std::optional<double> mean_cycles;
  std::optional<double> detection_rate;
};

SweepRow sweep_row(const RunResult &result);
void     write_sweep_csv(std::ostream &out, const std::vector<SweepRow> &rows);

/// Runs every configured fleet size, one directory per size plus sweep.csv.
std::vector<SweepRow> sweep(const ScenarioConfig &cfg, const std::filesystem::path &out_dir,
                            std::size_t parallel);

struct CompareRow
{
  std::string model;
  std::size_t fleet{0};
  double      mean_latency_ms{0.0};
  double      mean_cycles{0.0};
};

/// Per-attempt costs of one model over the honest granted attempts of a run.
struct ModelCosts
{
  threats::BaselineKind               kind{threats::BaselineKind::Ztmaf};
  std::vector<threats::AttemptCost>   per_attempt;
};

std::vector<ModelCosts> model_costs(const ScenarioConfig &cfg, const RunResult &result,
                                    const std::vector<threats::BaselineKind> &models);

/// Throws InvariantViolation if ztmaf is slower than a baseline on any attempt.
std::vector<CompareRow> compare_rows(const ScenarioConfig &cfg, const RunResult &result,
                                     const std::vector<std::string> &models);

std::vector<CompareRow> compare(const ScenarioConfig &cfg, const std::vector<std::string> &models,
                                const std::filesystem::path &out_dir, std::size_t parallel);
void write_compare_csv(std::ostream &out, const std::vector<CompareRow> &rows);

}  // namespace ztmaf::scenario
