#include "ztmaf/scenario/config.hpp"

#include "ztmaf/errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace ztmaf::scenario {

using json = nlohmann::json;

std::string_view to_string(MobilityTier t)
{
  switch (t)
  {
  case MobilityTier::Low: return "low";
  case MobilityTier::Normal: return "normal";
  case MobilityTier::High: return "high";
  }
  return "normal";
}

double tier_factor(MobilityTier t)
{
  switch (t)
  {
  case MobilityTier::Low: return 0.5;
  case MobilityTier::Normal: return 1.0;
  case MobilityTier::High: return 2.0;
  }
  return 1.0;
}

namespace {

struct Field
{
  std::string                                               key;
  std::function<void(ScenarioConfig &, const json &)>       set;
  std::function<json(const ScenarioConfig &)>               get;
};

template <class Acc>
Field real(std::string key, Acc acc)
{
  return {key,
          [acc, key](ScenarioConfig &c, const json &j) {
            if (!j.is_number())
            {
              throw ConfigError(key, "expected a number");
            }
            acc(c) = j.get<double>();
          },
          [acc](const ScenarioConfig &c) { return json(acc(c)); }};
}

std::uint64_t as_unsigned(const json &j, const std::string &key)
{
  if (j.is_number_unsigned())
  {
    return j.get<std::uint64_t>();
  }
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0)
  {
    return static_cast<std::uint64_t>(j.get<std::int64_t>());
  }
  if (j.is_number_float())
  {
    double v = j.get<double>();
    if (v >= 0.0 && std::floor(v) == v && v < 1.8e19)
    {
      return static_cast<std::uint64_t>(v);
    }
  }
  throw ConfigError(key, "expected a non-negative integer");
}

template <class Acc>
Field whole(std::string key, Acc acc)
{
  return {key,
          [acc, key](ScenarioConfig &c, const json &j) {
            using T = std::remove_reference_t<decltype(acc(c))>;
            auto v  = as_unsigned(j, key);
            if (v > std::numeric_limits<T>::max())
            {
              throw ConfigError(key, "value out of range");
            }
            acc(c) = static_cast<T>(v);
          },
          [acc](const ScenarioConfig &c) { return json(acc(c)); }};
}

template <class Acc>
Field boolean(std::string key, Acc acc)
{
  return {key,
          [acc, key](ScenarioConfig &c, const json &j) {
            if (!j.is_boolean())
            {
              throw ConfigError(key, "expected true or false");
            }
            acc(c) = j.get<bool>();
          },
          [acc](const ScenarioConfig &c) { return json(acc(c)); }};
}

template <class Acc>
Field text(std::string key, Acc acc)
{
  return {key,
          [acc, key](ScenarioConfig &c, const json &j) {
            if (!j.is_string())
            {
              throw ConfigError(key, "expected a string");
            }
            acc(c) = j.get<std::string>();
          },
          [acc](const ScenarioConfig &c) { return json(acc(c)); }};
}

template <class Acc>
Field index_list(std::string key, Acc acc)
{
  return {key,
          [acc, key](ScenarioConfig &c, const json &j) {
            if (!j.is_array())
            {
              throw ConfigError(key, "expected a list of integers");
            }
            using T = typename std::remove_reference_t<decltype(acc(c))>::value_type;
            acc(c).clear();
            for (const auto &e : j)
            {
              acc(c).push_back(static_cast<T>(as_unsigned(e, key)));
            }
          },
          [acc](const ScenarioConfig &c) { return json(acc(c)); }};
}

const std::vector<Field> &fields()
{
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back(whole("seed", [](auto &c) -> auto & { return c.seed; }));
    f.push_back(real("sim.duration_s", [](auto &c) -> auto & { return c.duration_s; }));
    f.push_back(real("sim.tick_s", [](auto &c) -> auto & { return c.tick_s; }));
    f.push_back(real("sim.join_window_s", [](auto &c) -> auto & { return c.join_window_s; }));
    f.push_back(index_list("fleet.sizes", [](auto &c) -> auto & { return c.fleet_sizes; }));
    f.push_back(whole("fog.count", [](auto &c) -> auto & { return c.fog_count; }));
    f.push_back(whole("fog.grid_rows", [](auto &c) -> auto & { return c.fog_rows; }));
    f.push_back(whole("fog.grid_cols", [](auto &c) -> auto & { return c.fog_cols; }));
    f.push_back(real("fog.range_m", [](auto &c) -> auto & { return c.fog_range_m; }));
    f.push_back(real("trust.alpha", [](auto &c) -> auto & { return c.trust.alpha; }));
    f.push_back(real("trust.theta", [](auto &c) -> auto & { return c.trust.theta; }));
    f.push_back(real("trust.w_speed", [](auto &c) -> auto & { return c.trust.w_speed; }));
    f.push_back(real("trust.w_loc", [](auto &c) -> auto & { return c.trust.w_loc; }));
    f.push_back(real("trust.w_behavior", [](auto &c) -> auto & { return c.trust.w_behavior; }));
    f.push_back(real("trust.speed_tol_mps", [](auto &c) -> auto & { return c.trust.speed_tol_mps; }));
    f.push_back(real("trust.loc_tol_m", [](auto &c) -> auto & { return c.trust.loc_tol_m; }));
    f.push_back(real("trust.initial", [](auto &c) -> auto & { return c.initial_trust; }));
    f.push_back(real("trust.claim_tolerance", [](auto &c) -> auto & { return c.claim_tolerance; }));
    f.push_back(real("net.bandwidth_mbps", [](auto &c) -> auto & { return c.bandwidth_mbps; }));
    f.push_back(whole("net.packet_bytes", [](auto &c) -> auto & { return c.packet_bytes; }));
    f.push_back(real("net.propagation_ms", [](auto &c) -> auto & { return c.propagation_ms; }));
    f.push_back(real("net.loss_prob", [](auto &c) -> auto & { return c.loss_prob; }));
    f.push_back({"replay.ttl_s",
                 [](ScenarioConfig &c, const json &j) {
                   if (j.is_string() && j.get<std::string>() == "inf")
                   {
                     c.replay_ttl_s.reset();
                   }
                   else if (j.is_number())
                   {
                     c.replay_ttl_s = j.get<double>();
                   }
                   else
                   {
                     throw ConfigError("replay.ttl_s", "expected a number or \"inf\"");
                   }
                 },
                 [](const ScenarioConfig &c) { return c.replay_ttl_s ? json(*c.replay_ttl_s) : json("inf"); }});
    f.push_back(real("session.lifetime_s", [](auto &c) -> auto & { return c.session_lifetime_s; }));
    f.push_back(real("session.challenge_timeout_ms", [](auto &c) -> auto & { return c.challenge_timeout_ms; }));
    f.push_back(real("session.attempt_timeout_s", [](auto &c) -> auto & { return c.attempt_timeout_s; }));
    f.push_back(real("session.retry_backoff_s", [](auto &c) -> auto & { return c.retry_backoff_s; }));
    f.push_back(real("session.retry_backoff_max_s", [](auto &c) -> auto & { return c.retry_backoff_max_s; }));
    f.push_back(text("mobility.mode", [](auto &c) -> auto & { return c.mobility_mode; }));
    f.push_back(text("mobility.trace_path", [](auto &c) -> auto & { return c.trace_path; }));
    f.push_back({"mobility.tier",
                 [](ScenarioConfig &c, const json &j) {
                   std::string v = j.is_string() ? j.get<std::string>() : "";
                   if (v == "low") c.tier = MobilityTier::Low;
                   else if (v == "normal") c.tier = MobilityTier::Normal;
                   else if (v == "high") c.tier = MobilityTier::High;
                   else throw ConfigError("mobility.tier", "expected low, normal or high");
                 },
                 [](const ScenarioConfig &c) { return json(std::string(to_string(c.tier))); }});
    f.push_back(real("mobility.v_max_mps", [](auto &c) -> auto & { return c.krauss.v_max_mps; }));
    f.push_back(real("mobility.accel_mps2", [](auto &c) -> auto & { return c.krauss.accel_mps2; }));
    f.push_back(real("mobility.decel_mps2", [](auto &c) -> auto & { return c.krauss.decel_mps2; }));
    f.push_back(real("mobility.tau_s", [](auto &c) -> auto & { return c.krauss.tau_s; }));
    f.push_back(real("mobility.sigma", [](auto &c) -> auto & { return c.krauss.sigma; }));
    f.push_back(real("mobility.dt_s", [](auto &c) -> auto & { return c.krauss.dt_s; }));
    f.push_back(real("mobility.loop_width_m", [](auto &c) -> auto & { return c.road.width_m; }));
    f.push_back(real("mobility.loop_height_m", [](auto &c) -> auto & { return c.road.height_m; }));
    f.push_back(whole("mobility.lanes", [](auto &c) -> auto & { return c.road.lanes; }));
    f.push_back(real("mobility.lane_width_m", [](auto &c) -> auto & { return c.road.lane_width_m; }));
    f.push_back(real("mobility.vehicle_length_m", [](auto &c) -> auto & { return c.road.vehicle_length_m; }));
    f.push_back(real("mobility.min_gap_m", [](auto &c) -> auto & { return c.road.min_gap_m; }));
    f.push_back(real("attack.spoof_rate_hz", [](auto &c) -> auto & { return c.spoof_rate_hz; }));
    f.push_back(real("attack.replay_rate_hz", [](auto &c) -> auto & { return c.replay_rate_hz; }));
    f.push_back(whole("attack.sybil_count", [](auto &c) -> auto & { return c.sybil_count; }));
    f.push_back(real("attack.sybil_rate_hz", [](auto &c) -> auto & { return c.sybil_rate_hz; }));
    f.push_back(real("attack.start_s", [](auto &c) -> auto & { return c.attack_start_s; }));
    f.push_back(real("attack.stop_s", [](auto &c) -> auto & { return c.attack_stop_s; }));
    f.push_back(real("attack.replay_delay_min_s", [](auto &c) -> auto & { return c.replay_delay_min_s; }));
    f.push_back(real("attack.replay_delay_max_s", [](auto &c) -> auto & { return c.replay_delay_max_s; }));
    f.push_back({"attack.spoof_mode",
                 [](ScenarioConfig &c, const json &j) {
                   c.spoof_mode = threats::parse_spoof_mode(j.is_string() ? j.get<std::string>() : "");
                 },
                 [](const ScenarioConfig &c) { return json(std::string(threats::to_string(c.spoof_mode))); }});
    f.push_back(whole("attack.context_liars", [](auto &c) -> auto & { return c.context_liars; }));
    f.push_back(index_list("attack.targets", [](auto &c) -> auto & { return c.attack_targets; }));
    f.push_back(whole("baselines.pki_chain_depth", [](auto &c) -> auto & { return c.pki_chain_depth; }));
    f.push_back(real("baselines.pki_cert_verify_ms", [](auto &c) -> auto & { return c.pki_cert_verify_ms; }));
    f.push_back(real("baselines.pki_revocation_rtt_ms", [](auto &c) -> auto & { return c.pki_revocation_rtt_ms; }));
    f.push_back(real("baselines.block_interval_ms", [](auto &c) -> auto & { return c.block_interval_ms; }));
    for (std::size_t i = 0; i < sim::kOpKindCount; ++i)
    {
      std::string name(sim::to_string(static_cast<sim::OpKind>(i)));
      f.push_back(whole("cost.cycles." + name, [i](auto &c) -> auto & { return c.cycles.cycles[i]; }));
      f.push_back(real("cost.time_ms." + name, [i](auto &c) -> auto & { return c.time_ms[i]; }));
    }
    f.push_back(real("metrics.delta_max_ms", [](auto &c) -> auto & { return c.delta_max_ms; }));
    f.push_back(real("metrics.convergence_eps", [](auto &c) -> auto & { return c.convergence_eps; }));
    f.push_back(boolean("metrics.exclude_malicious", [](auto &c) -> auto & { return c.exclude_malicious; }));
    f.push_back(boolean("trace.dump_events", [](auto &c) -> auto & { return c.dump_events; }));
    std::sort(f.begin(), f.end(), [](const Field &a, const Field &b) { return a.key < b.key; });
    return f;
  }();
  return table;
}

void flatten(const json &node, const std::string &prefix, std::vector<std::pair<std::string, json>> &out)
{
  for (const auto &[k, v] : node.items())
  {
    std::string key = prefix.empty() ? k : prefix + "." + k;
    if (v.is_object())
    {
      flatten(v, key, out);
    }
    else
    {
      out.emplace_back(key, v);
    }
  }
}

void require(bool ok, const char *key, const char *what)
{
  if (!ok)
  {
    throw ConfigError(key, what);
  }
}

bool finite_positive(double v)
{
  return std::isfinite(v) && v > 0.0;
}

bool finite_non_negative(double v)
{
  return std::isfinite(v) && v >= 0.0;
}

}  // namespace

void ScenarioConfig::validate() const
{
  require(finite_positive(duration_s), "sim.duration_s", "must be positive");
  require(finite_positive(tick_s), "sim.tick_s", "must be positive");
  require(finite_non_negative(join_window_s) && join_window_s < duration_s, "sim.join_window_s",
          "must be non-negative and shorter than the run");

  require(!fleet_sizes.empty(), "fleet.sizes", "needs at least one size");
  std::set<std::size_t> uniq(fleet_sizes.begin(), fleet_sizes.end());
  require(uniq.size() == fleet_sizes.size(), "fleet.sizes", "duplicate fleet size");
  require(*uniq.begin() >= 1, "fleet.sizes", "sizes must be at least 1");

  require(fog_count >= 1, "fog.count", "need at least one fog node");
  require(fog_rows * fog_cols == fog_count, "fog.count", "must equal grid_rows * grid_cols");
  require(finite_positive(fog_range_m), "fog.range_m", "must be positive");

  trust.validate();
  require(initial_trust >= 0.0 && initial_trust <= 1.0, "trust.initial", "must lie in [0,1]");
  require(finite_non_negative(claim_tolerance), "trust.claim_tolerance", "must be non-negative");

  require(finite_positive(bandwidth_mbps), "net.bandwidth_mbps", "must be positive");
  require(packet_bytes > 0, "net.packet_bytes", "must be positive");
  require(finite_non_negative(propagation_ms), "net.propagation_ms", "must be non-negative");
  require(loss_prob >= 0.0 && loss_prob <= 1.0, "net.loss_prob", "must lie in [0,1]");

  require(!replay_ttl_s || finite_positive(*replay_ttl_s), "replay.ttl_s", "must be positive or \"inf\"");

  require(finite_positive(session_lifetime_s), "session.lifetime_s", "must be positive");
  require(finite_positive(challenge_timeout_ms), "session.challenge_timeout_ms", "must be positive");
  require(finite_positive(attempt_timeout_s), "session.attempt_timeout_s", "must be positive");
  require(finite_non_negative(retry_backoff_s), "session.retry_backoff_s", "must be non-negative");
  require(finite_non_negative(retry_backoff_max_s) && retry_backoff_max_s >= retry_backoff_s,
          "session.retry_backoff_max_s", "must be at least session.retry_backoff_s");

  require(mobility_mode == "synthetic" || mobility_mode == "trace", "mobility.mode",
          "expected synthetic or trace");
  require(mobility_mode != "trace" || !trace_path.empty(), "mobility.trace_path",
          "required in trace mode");
  krauss.validate();
  require(finite_positive(road.width_m), "mobility.loop_width_m", "must be positive");
  require(finite_positive(road.height_m), "mobility.loop_height_m", "must be positive");
  require(road.lanes >= 1, "mobility.lanes", "need at least one lane");
  require(finite_positive(road.lane_width_m), "mobility.lane_width_m", "must be positive");
  double inner = 2.0 * static_cast<double>(road.lanes - 1) * road.lane_width_m;
  require(inner < road.width_m && inner < road.height_m, "mobility.lanes", "lanes do not fit inside the loop");
  require(finite_positive(road.vehicle_length_m), "mobility.vehicle_length_m", "must be positive");
  require(finite_non_negative(road.min_gap_m), "mobility.min_gap_m", "must be non-negative");

  require(finite_non_negative(spoof_rate_hz), "attack.spoof_rate_hz", "must be non-negative");
  require(finite_non_negative(replay_rate_hz), "attack.replay_rate_hz", "must be non-negative");
  require(finite_non_negative(sybil_rate_hz), "attack.sybil_rate_hz", "must be non-negative");
  require(sybil_count == 0 || sybil_count >= 2, "attack.sybil_count", "a Sybil attack needs at least 2 identities");
  require(sybil_rate_hz == 0.0 || sybil_count >= 2, "attack.sybil_count",
          "a Sybil rate needs at least 2 identities");
  require(finite_non_negative(attack_start_s), "attack.start_s", "must be non-negative");
  require(std::isfinite(attack_stop_s) && attack_stop_s >= attack_start_s, "attack.stop_s",
          "must not precede attack.start_s");
  require(finite_non_negative(replay_delay_min_s), "attack.replay_delay_min_s", "must be non-negative");
  require(std::isfinite(replay_delay_max_s) && replay_delay_max_s >= replay_delay_min_s,
          "attack.replay_delay_max_s", "must not be below attack.replay_delay_min_s");
  require(context_liars <= *uniq.begin(), "attack.context_liars", "exceeds the smallest fleet size");
  for (auto t : attack_targets)
  {
    require(t < fog_count, "attack.targets", "fog index out of range");
  }

  require(finite_non_negative(pki_cert_verify_ms), "baselines.pki_cert_verify_ms", "must be non-negative");
  require(finite_non_negative(pki_revocation_rtt_ms), "baselines.pki_revocation_rtt_ms", "must be non-negative");
  require(finite_non_negative(block_interval_ms), "baselines.block_interval_ms", "must be non-negative");

  for (std::size_t i = 0; i < sim::kOpKindCount; ++i)
  {
    if (!finite_non_negative(time_ms[i]))
    {
      throw ConfigError("cost.time_ms." + std::string(sim::to_string(static_cast<sim::OpKind>(i))),
                        "must be non-negative");
    }
  }

  require(finite_positive(delta_max_ms), "metrics.delta_max_ms", "must be positive");
  require(finite_positive(convergence_eps), "metrics.convergence_eps", "must be positive");
}

sim::ProcessingTimes ScenarioConfig::processing_times() const
{
  sim::ProcessingTimes t;
  for (std::size_t i = 0; i < sim::kOpKindCount; ++i)
  {
    t.seconds[i] = time_ms[i] / 1000.0;
  }
  return t;
}

sim::ChannelParams ScenarioConfig::channel() const
{
  return {bandwidth_mbps * 1e6, packet_bytes, propagation_ms / 1000.0, loss_prob};
}

protocol::ProtocolParams ScenarioConfig::protocol(double expected_speed_mps) const
{
  protocol::ProtocolParams p;
  p.session_lifetime_s  = session_lifetime_s;
  p.challenge_timeout_s = challenge_timeout_ms / 1000.0;
  p.claim_tolerance     = claim_tolerance;
  p.initial_trust       = initial_trust;
  p.expected_speed_mps  = expected_speed_mps;
  p.replay_ttl_s        = replay_ttl_s;
  return p;
}

threats::BaselineModel ScenarioConfig::baseline(threats::BaselineKind kind) const
{
  threats::BaselineModel m;
  m.kind             = kind;
  m.chain_depth      = pki_chain_depth;
  m.cert_verify_s    = pki_cert_verify_ms / 1000.0;
  m.revocation_rtt_s = pki_revocation_rtt_ms / 1000.0;
  m.block_interval_s = block_interval_ms / 1000.0;
  return m;
}

std::vector<threats::AttackPlan> ScenarioConfig::attack_plans() const
{
  std::vector<NodeId> targets;
  if (attack_targets.empty())
  {
    for (std::size_t i = 0; i < fog_count; ++i)
    {
      targets.push_back(NodeId::fog(static_cast<std::uint32_t>(i)));
    }
  }
  else
  {
    for (auto t : attack_targets)
    {
      targets.push_back(NodeId::fog(t));
    }
  }
  std::vector<threats::AttackPlan> plans;
  auto add = [&](threats::AttackKind kind, double rate) {
    if (rate <= 0.0)
    {
      return;
    }
    threats::AttackPlan p;
    p.kind               = kind;
    p.rate_hz            = rate;
    p.targets            = targets;
    p.start_s            = attack_start_s;
    p.stop_s             = attack_stop_s;
    p.replay_delay_min_s = replay_delay_min_s;
    p.replay_delay_max_s = replay_delay_max_s;
    p.sybil_count        = sybil_count;
    p.spoof_mode         = spoof_mode;
    p.validate();
    plans.push_back(p);
  };
  add(threats::AttackKind::Spoof, spoof_rate_hz);
  add(threats::AttackKind::Replay, replay_rate_hz);
  add(threats::AttackKind::Sybil, sybil_rate_hz);
  return plans;
}

mobility::KraussParams ScenarioConfig::tiered_krauss() const
{
  auto p = krauss;
  p.v_max_mps *= tier_factor(tier);
  return p;
}

ScenarioConfig parse_config(const std::string &json_text)
{
  json root;
  try
  {
    root = json::parse(json_text);
  }
  catch (const json::parse_error &e)
  {
    throw ConfigError("<document>", std::string("malformed JSON: ") + e.what());
  }
  if (!root.is_object())
  {
    throw ConfigError("<document>", "top level must be an object");
  }
  std::vector<std::pair<std::string, json>> flat;
  flatten(root, "", flat);

  ScenarioConfig cfg;
  const auto    &table = fields();
  for (const auto &[key, value] : flat)
  {
    auto it = std::lower_bound(table.begin(), table.end(), key,
                               [](const Field &f, const std::string &k) { return f.key < k; });
    if (it == table.end() || it->key != key)
    {
      throw ConfigError(key, "unknown key");
    }
    try
    {
      it->set(cfg, value);
    }
    catch (const json::exception &)
    {
      throw ConfigError(key, "wrong value type");
    }
  }
  cfg.validate();
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path &path)
{
  std::ifstream in(path);
  if (!in)
  {
    throw ConfigError("<document>", "cannot open " + path.string());
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string echo_config(const ScenarioConfig &cfg)
{
  json out = json::object();
  for (const auto &f : fields())
  {
    out[f.key] = f.get(cfg);
  }
  return out.dump(2) + "\n";
}

std::vector<std::string> config_keys()
{
  std::vector<std::string> keys;
  for (const auto &f : fields())
  {
    keys.push_back(f.key);
  }
  return keys;
}

}  // namespace ztmaf::scenario
