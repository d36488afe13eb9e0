#include "ztmaf/scenario/runner.hpp"

#include "ztmaf/errors.hpp"
#include "ztmaf/sim/random.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

namespace ztmaf::scenario {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path &path)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
  {
    throw IoError("cannot write " + path.string());
  }
  return out;
}

std::string cell(const std::optional<double> &v)
{
  return v ? fmt::format("{:.6f}", *v) : std::string();
}

}  // namespace

std::uint64_t run_seed_for(std::uint64_t master_seed, std::size_t fleet)
{
  return sim::derive_seed(master_seed, "fleet", fleet);
}

RunResult run_fleet(const ScenarioConfig &cfg, std::size_t fleet, const SimOptions &opts)
{
  return simulate(cfg, fleet, run_seed_for(cfg.seed, fleet), opts);
}

std::vector<RunResult> run_fleets(const ScenarioConfig &cfg, const std::vector<std::size_t> &fleets,
                                  std::size_t parallel, const SimOptions &opts)
{
  std::vector<RunResult>          results(fleets.size());
  std::vector<std::exception_ptr> errors(fleets.size());
  std::atomic<std::size_t>        next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < fleets.size(); i = next++)
    {
      try
      {
        results[i] = run_fleet(cfg, fleets[i], opts);
      }
      catch (...)
      {
        errors[i] = std::current_exception();
      }
    }
  };
  std::size_t n = std::clamp<std::size_t>(parallel, 1, std::max<std::size_t>(fleets.size(), 1));
  if (n == 1)
  {
    worker();
  }
  else
  {
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < n; ++k)
    {
      pool.emplace_back(worker);
    }
    for (auto &t : pool)
    {
      t.join();
    }
  }
  for (auto &e : errors)
  {
    if (e)
    {
      std::rethrow_exception(e);
    }
  }
  return results;
}

void write_event_trace(std::ostream &out, const std::vector<sim::TraceRow> &rows)
{
  out << sim::Scheduler::kTraceHeader << '\n';
  for (const auto &r : rows)
  {
    out << fmt::format("{:.6f},{},{},{},{},{}\n", r.t_s, r.seq, r.kind, r.from, r.to, r.detail);
  }
}

void write_run_dir(const RunResult &result, const ScenarioConfig &cfg, const fs::path &dir)
{
  fs::create_directories(dir);
  {
    auto out = open_out(dir / "attempts.csv");
    metrics::write_attempts_csv(out, result.attempts);
  }
  {
    auto out = open_out(dir / "trust.csv");
    metrics::write_trust_csv(out, result.trust_rows);
  }
  {
    auto out = open_out(dir / "summary.json");
    out << metrics::summary_json(result.summary);
  }
  {
    ScenarioConfig echo = cfg;
    echo.fleet_sizes    = {result.fleet};
    auto out            = open_out(dir / "config.echo");
    out << echo_config(echo);
  }
  if (!result.trace.empty())
  {
    auto out = open_out(dir / "events.csv");
    write_event_trace(out, result.trace);
  }
}

SweepRow sweep_row(const RunResult &result)
{
  const auto &s = result.summary;
  SweepRow    row{result.fleet, s.mean_latency_ms, s.p95_latency_ms, s.s_rate, s.mean_cycles, std::nullopt};
  if (auto it = s.detection.find("combined"); it != s.detection.end())
  {
    row.detection_rate = it->second;
  }
  return row;
}

void write_sweep_csv(std::ostream &out, const std::vector<SweepRow> &rows)
{
  out << kSweepHeader << '\n';
  for (const auto &r : rows)
  {
    out << fmt::format("{},{},{},{},{},{}\n", r.fleet, cell(r.mean_latency_ms), cell(r.p95_latency_ms),
                       cell(r.s_rate), cell(r.mean_cycles), cell(r.detection_rate));
  }
}

std::vector<SweepRow> sweep(const ScenarioConfig &cfg, const fs::path &out_dir, std::size_t parallel)
{
  if (cfg.fleet_sizes.empty())
  {
    throw ConfigError("fleet.sizes", "no fleet sizes to sweep");
  }
  auto                  results = run_fleets(cfg, cfg.fleet_sizes, parallel);
  std::vector<SweepRow> rows;
  for (const auto &r : results)
  {
    write_run_dir(r, cfg, out_dir / fmt::format("fleet_{}", r.fleet));
    rows.push_back(sweep_row(r));
  }
  auto out = open_out(out_dir / "sweep.csv");
  write_sweep_csv(out, rows);
  return rows;
}

std::vector<ModelCosts> model_costs(const ScenarioConfig &cfg, const RunResult &result,
                                    const std::vector<threats::BaselineKind> &models)
{
  std::vector<ModelCosts> out;
  for (auto kind : models)
  {
    ModelCosts mc{kind, {}};
    auto       model = cfg.baseline(kind);
    for (std::size_t i = 0; i < result.attempts.size(); ++i)
    {
      const auto &a = result.attempts[i];
      if (a.malicious || !a.latency_ms)
      {
        continue;
      }
      threats::AttemptCost base{*a.latency_ms / 1000.0, a.cycles};
      sim::Rng             rng(result.run_seed, "block-inclusion", i);
      mc.per_attempt.push_back(threats::baseline_authenticate(model, base, cfg.cycles, rng));
    }
    out.push_back(std::move(mc));
  }
  return out;
}

std::vector<CompareRow> compare_rows(const ScenarioConfig &cfg, const RunResult &result,
                                     const std::vector<std::string> &models)
{
  std::vector<threats::BaselineKind> kinds;
  for (const auto &m : models)
  {
    kinds.push_back(threats::parse_baseline_kind(m));
  }
  auto costs = model_costs(cfg, result, {threats::BaselineKind::Ztmaf});
  auto ours  = costs.front().per_attempt;
  auto all   = model_costs(cfg, result, kinds);

  std::vector<CompareRow> rows;
  for (std::size_t m = 0; m < kinds.size(); ++m)
  {
    const auto &pa = all[m].per_attempt;
    CompareRow  row{std::string(threats::to_string(kinds[m])), result.fleet, 0.0, 0.0};
    for (std::size_t i = 0; i < pa.size(); ++i)
    {
      if (ours[i].latency_s > pa[i].latency_s)
      {
        throw InvariantViolation(fmt::format("ztmaf slower than {} on attempt {}", row.model, i));
      }
      row.mean_latency_ms += pa[i].latency_s * 1000.0;
      row.mean_cycles += static_cast<double>(pa[i].cycles);
    }
    if (!pa.empty())
    {
      row.mean_latency_ms /= static_cast<double>(pa.size());
      row.mean_cycles /= static_cast<double>(pa.size());
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<CompareRow> compare(const ScenarioConfig &cfg, const std::vector<std::string> &models,
                                const fs::path &out_dir, std::size_t parallel)
{
  for (const auto &m : models)
  {
    threats::parse_baseline_kind(m);
  }
  auto                    results = run_fleets(cfg, cfg.fleet_sizes, parallel);
  std::vector<CompareRow> rows;
  for (const auto &r : results)
  {
    auto part = compare_rows(cfg, r, models);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  fs::create_directories(out_dir);
  auto out = open_out(out_dir / "compare.csv");
  write_compare_csv(out, rows);
  return rows;
}

void write_compare_csv(std::ostream &out, const std::vector<CompareRow> &rows)
{
  out << kCompareHeader << '\n';
  for (const auto &r : rows)
  {
    out << fmt::format("{},{},{:.6f},{:.6f}\n", r.model, r.fleet, r.mean_latency_ms, r.mean_cycles);
  }
}

}  // namespace ztmaf::scenario
