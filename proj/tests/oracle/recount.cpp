#include "recount.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace oracle {

namespace {

std::vector<std::string> split(const std::string &line)
{
  std::vector<std::string> out;
  std::string              cell;
  std::istringstream       in(line);
  while (std::getline(in, cell, ','))
  {
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',')
  {
    out.emplace_back();
  }
  return out;
}

struct Acc
{
  double      sum{0.0};
  std::size_t n{0};
  void        add(double v) { sum += v, ++n; }
  std::optional<double> mean() const { return n ? std::optional<double>(sum / static_cast<double>(n)) : std::nullopt; }
};

}  // namespace

Recount recount_attempts(const std::filesystem::path &attempts_csv, double theta, bool exclude_malicious)
{
  std::ifstream in(attempts_csv);
  if (!in)
  {
    throw std::runtime_error("cannot open " + attempts_csv.string());
  }
  std::string header;
  std::getline(in, header);
  auto cols = split(header);
  auto col  = [&](const std::string &name) {
    auto it = std::find(cols.begin(), cols.end(), name);
    if (it == cols.end()) throw std::runtime_error("missing column " + name);
    return static_cast<std::size_t>(it - cols.begin());
  };
  const auto c_outcome = col("outcome"), c_lat = col("latency_ms"), c_comm = col("comm_ms"), c_cyc = col("cycles"),
             c_after = col("trust_after"), c_mal = col("malicious"), c_det = col("detected"),
             c_kind = col("attack_kind");

  Recount             r;
  Acc                 lat, comm, delay, cycles, accept;
  std::size_t         denom = 0, granted = 0, fp_honest = 0, fp_flagged = 0;
  std::map<std::string, std::pair<std::size_t, std::size_t>> det;  // kind -> (caught, total)
  std::pair<std::size_t, std::size_t> all{0, 0};
  std::vector<double> lats;
  for (const char *o : {"granted", "granted_fallback", "rejected_spoof", "rejected_replay", "rejected_unknown",
                        "rejected_trust", "aborted"})
  {
    r.outcomes[o] = 0;
  }

  std::string line;
  while (std::getline(in, line))
  {
    if (line.empty()) continue;
    auto f = split(line);
    if (f.size() != cols.size()) throw std::runtime_error("ragged row: " + line);
    const std::string &outcome = f[c_outcome];
    const bool         mal     = f[c_mal] == "1";
    const bool         ok      = outcome == "granted" || outcome == "granted_fallback";
    ++r.total;
    ++(mal ? r.malicious : r.honest);
    ++r.outcomes.at(outcome);
    if (!(exclude_malicious && mal))
    {
      ++denom;
      granted += ok ? 1 : 0;
    }
    if (mal)
    {
      auto &d = det[f[c_kind]];
      ++d.second;
      ++all.second;
      if (f[c_det] == "1") ++d.first, ++all.first;
      continue;
    }
    cycles.add(std::stod(f[c_cyc]));
    accept.add(std::stod(f[c_after]) >= theta ? 1.0 : 0.0);
    ++fp_honest;
    fp_flagged += (outcome == "rejected_spoof" || outcome == "rejected_replay" || outcome == "rejected_unknown") ? 1 : 0;
    if (!f[c_lat].empty())
    {
      double l = std::stod(f[c_lat]), c = std::stod(f[c_comm]);
      lat.add(l);
      comm.add(c);
      delay.add(l + c);
      lats.push_back(l);
    }
  }
  r.mean_latency_ms = lat.mean();
  r.mean_comm_ms    = comm.mean();
  r.mean_delay_ms   = delay.mean();
  r.mean_cycles     = cycles.mean();
  r.p_accept        = accept.mean();
  if (!lats.empty())
  {
    std::sort(lats.begin(), lats.end());
    auto k = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(lats.size())));
    r.p95_latency_ms = lats[std::max<std::size_t>(k, 1) - 1];
  }
  if (denom) r.s_rate = static_cast<double>(granted) / static_cast<double>(denom);
  if (fp_honest) r.false_positive_rate = static_cast<double>(fp_flagged) / static_cast<double>(fp_honest);
  for (const auto &[kind, d] : det)
  {
    r.detection[kind] = static_cast<double>(d.first) / static_cast<double>(d.second);
  }
  if (all.second) r.detection["combined"] = static_cast<double>(all.first) / static_cast<double>(all.second);
  return r;
}

}  // namespace oracle
