#include "ztmaf/errors.hpp"
#include "ztmaf/metrics.hpp"
#include "ztmaf/mobility.hpp"
#include "ztmaf/scenario/runner.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <fmt/format.h>

#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace ztmaf;

namespace {

struct Common
{
  std::string                  config;
  std::optional<std::uint64_t> seed;
  std::string                  out{"out"};
  std::size_t                  parallel{1};
};

void add_common(CLI::App *cmd, Common &c, bool with_out = true)
{
  cmd->add_option("--config", c.config, "scenario config (JSON); defaults apply when omitted");
  cmd->add_option("--seed", c.seed, "override the master seed");
  if (with_out)
  {
    cmd->add_option("--out", c.out, "output directory");
    cmd->add_option("--parallel", c.parallel, "worker threads across fleet sizes")->check(CLI::PositiveNumber);
  }
}

scenario::ScenarioConfig resolve(const Common &c)
{
  scenario::ScenarioConfig cfg = c.config.empty() ? scenario::ScenarioConfig{} : scenario::load_config(c.config);
  if (c.seed)
  {
    cfg.seed = *c.seed;
  }
  cfg.validate();
  return cfg;
}

std::string schema_json()
{
  nlohmann::ordered_json j;
  auto cols = [](std::string_view header) {
    std::vector<std::string> out;
    std::string              h(header);
    std::size_t              start = 0;
    while (true)
    {
      auto comma = h.find(',', start);
      out.push_back(h.substr(start, comma - start));
      if (comma == std::string::npos)
      {
        break;
      }
      start = comma + 1;
    }
    return out;
  };
  j["mobility_trace"] = cols(mobility::kTraceHeader);
  j["event_trace"]    = cols(sim::Scheduler::kTraceHeader);
  j["attempts"]       = cols(metrics::kAttemptsHeader);
  j["trust"]          = cols(metrics::kTrustHeader);
  j["sweep"]          = cols(scenario::kSweepHeader);
  j["compare"]        = cols(scenario::kCompareHeader);
  return j.dump(2);
}

}  // namespace

int main(int argc, char **argv)
{
  CLI::App app{"ztmaf: context-aware zero-trust authentication simulator"};
  app.require_subcommand(1);

  Common run_opts, sweep_opts, cmp_opts, val_opts;
  std::optional<std::size_t> fleet;
  bool                       events = false;
  std::vector<std::string>   models{"ztmaf", "pki", "blockchain"};

  auto *run = app.add_subcommand("run", "simulate one fleet size into a run directory");
  add_common(run, run_opts);
  run->add_option("--fleet", fleet, "fleet size (default: first of fleet.sizes)");
  run->add_flag("--events", events, "also write the event trace");

  auto *sw = app.add_subcommand("sweep", "simulate every fleet size");
  add_common(sw, sweep_opts);

  auto *cmp = app.add_subcommand("compare", "ztmaf against baseline models");
  add_common(cmp, cmp_opts);
  cmp->add_option("--models", models, "models to compare");

  auto *val = app.add_subcommand("validate-config", "parse, validate and echo a config");
  add_common(val, val_opts, false);

  app.add_subcommand("dump-trace-schema", "print the column layout of every CSV output");

  CLI11_PARSE(app, argc, argv);

  try
  {
    if (*run)
    {
      auto cfg = resolve(run_opts);
      if (events)
      {
        cfg.dump_events = true;
      }
      std::size_t n = fleet ? *fleet : cfg.fleet_sizes.front();
      auto        r = scenario::run_fleet(cfg, n);
      scenario::write_run_dir(r, cfg, run_opts.out);
      std::cout << metrics::summary_json(r.summary);
    }
    else if (*sw)
    {
      auto cfg  = resolve(sweep_opts);
      auto rows = scenario::sweep(cfg, sweep_opts.out, sweep_opts.parallel);
      scenario::write_sweep_csv(std::cout, rows);
    }
    else if (*cmp)
    {
      auto cfg  = resolve(cmp_opts);
      auto rows = scenario::compare(cfg, models, cmp_opts.out, cmp_opts.parallel);
      scenario::write_compare_csv(std::cout, rows);
    }
    else if (*val)
    {
      std::cout << scenario::echo_config(resolve(val_opts));
    }
    else
    {
      std::cout << schema_json() << '\n';
    }
  }
  catch (const ConfigError &e)
  {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }
  catch (const InvariantViolation &e)
  {
    std::cerr << "invariant violation: " << e.what() << '\n';
    return 3;
  }
  catch (const std::exception &e)
  {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
