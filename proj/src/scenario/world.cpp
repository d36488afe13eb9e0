#include "ztmaf/scenario/world.hpp"

#include "ztmaf/errors.hpp"
#include "ztmaf/protocol.hpp"
#include "ztmaf/sim/random.hpp"
#include "ztmaf/threats.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <memory>
#include <numbers>
#include <set>

namespace ztmaf::scenario {

Positions fog_positions(const ScenarioConfig &cfg)
{
  Positions out;
  const double cell_w = cfg.road.width_m / static_cast<double>(cfg.fog_cols);
  const double cell_h = cfg.road.height_m / static_cast<double>(cfg.fog_rows);
  for (std::size_t r = 0; r < cfg.fog_rows; ++r)
  {
    for (std::size_t c = 0; c < cfg.fog_cols; ++c)
    {
      auto id = NodeId::fog(static_cast<std::uint32_t>(r * cfg.fog_cols + c));
      out[id] = {(static_cast<double>(c) + 0.5) * cell_w, (static_cast<double>(r) + 0.5) * cell_h};
    }
  }
  return out;
}

namespace {

using metrics::Outcome;
using protocol::AckToken;
using protocol::AuthRequest;
using protocol::ChallengeResponse;
using protocol::ContextBeacon;
using protocol::FogAuthority;
using sim::OpKind;
using threats::AttackKind;

std::array<std::uint8_t, 32> seed32(std::uint64_t master, std::string_view purpose, std::uint64_t index)
{
  std::uint64_t              s = sim::derive_seed(master, purpose, index);
  std::array<std::uint8_t, 8> le{};
  for (std::size_t i = 0; i < 8; ++i)
  {
    le[i] = static_cast<std::uint8_t>(s >> (8 * i));
  }
  return crypto::sha256(le);
}

constexpr double kAttackerOffsetM = 25.0;
constexpr double kSybilRadiusM    = 2.0;

class World
{
public:
  World(const ScenarioConfig &cfg, std::size_t fleet, std::uint64_t seed, const SimOptions &opts);

  RunResult run();

private:
  struct Completion
  {
    double                service_s{0.0};
    std::function<void()> done;
  };
  using Job = std::function<Completion()>;

  struct FogNode
  {
    NodeId                        id;
    Point                         position;
    NodeId                        attacker;
    std::unique_ptr<FogAuthority> auth;
    std::deque<Job>               queue;
    std::deque<Job>               urgent;  // handshakes already under way
    bool                          busy{false};
    std::deque<double>            armed_replays;  // delays waiting for the next request heard here
  };

  struct Vehicle
  {
    NodeId                    id;
    std::string               label;
    const mobility::Trajectory *traj{nullptr};
    crypto::KeyPair           key;
    crypto::NonceStream       nonces;
    double                    join_s{0.0};
    bool                      liar{false};
    std::uint64_t             beacon_seq{0};
    std::optional<std::size_t> session_fog;
    double                    session_expires_s{0.0};
    std::uint64_t             in_flight{0};
    double                    next_allowed_s{0.0};
    double                    last_granted_trust{0.5};
    std::optional<std::size_t> serving_fog;
    std::uint32_t             failures{0};
    sim::Rng                  backoff_rng;
  };

  struct Attempt
  {
    metrics::AttemptRecord         rec;
    bool                           finished{false};
    NodeId                         requester;  // physical endpoint
    std::size_t                    fog{0};
    std::optional<std::size_t>     vehicle;    // honest-keyed vehicles only
    double                         initiated_s{0.0};
    AuthRequest                    request;
    std::optional<protocol::ChallengeValue> challenge;
    bool                           response_arrived{false};
  };

  // setup
  void build_fogs();
  void build_vehicles();
  void schedule_topology(double at);
  void rebuild_topology();

  // vehicles
  ContextVector context_of(const Vehicle &v, double now) const;
  void          vehicle_tick(std::size_t vi);
  void          send_beacons(std::size_t vi, const ContextVector &ctx);
  void          start_attempt(std::size_t vi, std::size_t fi, const ContextVector &ctx);
  void          on_ack(std::uint64_t id, const AckToken &token, const protocol::SessionRecord &session,
                       bool via_fallback);
  void          on_challenge(std::uint64_t id, const protocol::Challenge &ch);
  void          on_timeout(std::uint64_t id);

  // fogs
  void       enqueue(std::size_t fi, Job job, bool urgent = false);
  void       start_next(std::size_t fi);
  Completion request_job(std::size_t fi, std::uint64_t id);
  Completion response_job(std::size_t fi, std::uint64_t id, ChallengeResponse resp, double arrived_s);
  Completion beacon_job(std::size_t fi, ContextBeacon beacon);
  void       send_ack(std::size_t fi, std::uint64_t id, const protocol::SessionRecord &session,
                      const AckToken &token, bool via_fallback);
  void       trust_row(std::size_t fi, const NodeId &vehicle, double t);

  // adversaries
  void schedule_attack(std::size_t plan_index, double after);
  void attack(std::size_t plan_index);
  void inject(std::size_t fi, AuthRequest req, AttackKind kind);
  void capture(std::size_t fi, const AuthRequest &req);

  // bookkeeping
  std::uint64_t new_attempt(const std::string &vehicle, std::size_t fi, const NodeId &requester,
                            bool malicious, AttackKind kind);
  void          finish(std::uint64_t id, Outcome outcome);
  double        service_time(const std::vector<OpKind> &ops) const;
  void          charge(std::uint64_t id, const std::vector<OpKind> &ops);
  bool          linked(const NodeId &node, std::size_t fi) const { return graph_.has_link(node, fogs_[fi].id); }
  const protocol::SharedSecret &secret(const NodeId &vehicle, std::size_t fi) const;

  const ScenarioConfig &cfg_;
  std::size_t           fleet_;
  std::uint64_t         seed_;
  SimOptions            opts_;
  double                drain_end_s_;
  double                expected_speed_;
  double                verify_s_{0.0};

  sim::Scheduler       sched_;
  sim::Channel         channel_;
  sim::ProcessingTimes times_;
  sim::CycleLedger     ledger_;

  std::vector<mobility::Trajectory> trajectories_;
  protocol::KeyRegistry             registry_;
  std::array<std::uint8_t, 32>      master_secret_{};
  std::vector<protocol::SharedSecret> secrets_;  // vehicle-major
  protocol::SharedSecret              no_secret_{};
  std::vector<FogNode>              fogs_;
  std::map<NodeId, std::size_t>     fog_index_;
  std::vector<Vehicle>              vehicles_;
  Positions                         fog_pos_;
  Positions                         node_pos_;
  TopologyGraph                     graph_;

  crypto::KeyPair                   attacker_key_;
  std::vector<threats::AttackPlan>  plans_;
  std::vector<sim::Rng>             attack_rngs_;
  std::vector<NodeId>               sybil_ids_;
  std::vector<crypto::NonceStream>  sybil_nonces_;

  std::vector<Attempt>                                 attempts_;  // id - 1
  std::vector<std::tuple<double, std::string, double>> trust_rows_;
};

World::World(const ScenarioConfig &cfg, std::size_t fleet, std::uint64_t seed, const SimOptions &opts)
  : cfg_(cfg),
    fleet_(fleet),
    seed_(seed),
    opts_(opts),
    drain_end_s_(cfg.duration_s + cfg.attempt_timeout_s + 1.0),
    expected_speed_(cfg.tiered_krauss().v_max_mps),
    channel_(cfg.channel(), sim::Rng(seed, "channel-loss")),
    times_(cfg.processing_times()),
    attacker_key_(crypto::KeyPair::from_seed(seed32(seed, "attacker-key", 0)))
{
  if (fleet == 0)
  {
    throw ConfigError("fleet.sizes", "fleet size must be at least 1");
  }
  master_secret_ = seed32(seed, "master-secret", 0);
  verify_s_      = service_time({OpKind::SigVerify, OpKind::TrustUpdate, OpKind::Hmac});
  sched_.enable_trace(cfg.dump_events || opts.trace_events);
  channel_.enable_log(opts.log_deliveries);

  if (opts.trajectories)
  {
    trajectories_ = *opts.trajectories;
  }
  else if (cfg.mobility_mode == "trace")
  {
    trajectories_ = mobility::load_trace(cfg.trace_path);
  }
  else
  {
    trajectories_ = mobility::synth_fleet(fleet, cfg.road, cfg.tiered_krauss(), drain_end_s_,
                                          sim::derive_seed(seed, "mobility"));
  }
  if (trajectories_.size() < fleet)
  {
    throw ConfigError("fleet.sizes",
                      fmt::format("fleet {} exceeds the {} available trajectories", fleet, trajectories_.size()));
  }
  trajectories_.resize(fleet);
  for (const auto &t : trajectories_)
  {
    if (t.samples.empty())
    {
      throw InvalidPosition("trajectory without samples: " + t.vehicle);
    }
  }

  build_fogs();
  build_vehicles();

  plans_ = cfg.attack_plans();
  for (std::size_t i = 0; i < plans_.size(); ++i)
  {
    attack_rngs_.emplace_back(seed, fmt::format("attack-{}", threats::to_string(plans_[i].kind)));
    if (plans_[i].kind == AttackKind::Sybil && sybil_ids_.empty())
    {
      sybil_ids_ = threats::sybil_spawn(plans_[i].sybil_count);
      for (std::size_t k = 0; k < sybil_ids_.size(); ++k)
      {
        sybil_nonces_.emplace_back(seed, static_cast<std::uint32_t>(k), "sybil-nonce");
      }
    }
  }
}

void World::build_fogs()
{
  fog_pos_       = fog_positions(cfg_);
  auto trust     = cfg_.trust;
  auto params    = cfg_.protocol(expected_speed_);
  auto lookup    = [this](const NodeId &v) { return secret(v, 0); };
  (void)lookup;
  for (const auto &[id, pos] : fog_pos_)
  {
    FogNode f;
    f.id       = id;
    f.position = pos;
    f.attacker = threats::attacker_for(id);
    std::size_t fi = fogs_.size();
    f.auth = std::make_unique<FogAuthority>(
        id, pos, cfg_.fog_range_m, registry_, [this, fi](const NodeId &v) { return secret(v, fi); }, trust,
        params, sim::derive_seed(seed_, "fog-authority", id.index));
    fog_index_[id] = fi;
    node_pos_[f.attacker] = {pos.x + kAttackerOffsetM, pos.y};
    fogs_.push_back(std::move(f));
  }
}

void World::build_vehicles()
{
  vehicles_.reserve(fleet_);
  secrets_.reserve(fleet_ * fogs_.size());
  for (std::size_t i = 0; i < fleet_; ++i)
  {
    auto id = NodeId::vehicle(static_cast<std::uint32_t>(i));
    Vehicle v{id,
              id.label(),
              &trajectories_[i],
              crypto::KeyPair::from_seed(seed32(seed_, "vehicle-key", i)),
              crypto::NonceStream(seed_, static_cast<std::uint32_t>(i)),
              sim::Rng(seed_, "join", i).uniform(0.0, cfg_.join_window_s),
              false,
              0,
              std::nullopt,
              0.0,
              0,
              0.0,
              0.5,
              std::nullopt,
              0,
              sim::Rng(seed_, "retry-backoff", i)};
    v.liar               = i < cfg_.context_liars;
    v.last_granted_trust = cfg_.initial_trust;
    registry_.add(v.label, v.key.public_key());
    for (const auto &f : fogs_)
    {
      secrets_.push_back(crypto::provision_shared_secret(master_secret_, v.label, f.id.label()));
    }
    vehicles_.push_back(std::move(v));
  }
}

const protocol::SharedSecret &World::secret(const NodeId &vehicle, std::size_t fi) const
{
  if (vehicle.kind != NodeKind::Vehicle || vehicle.index >= fleet_)
  {
    return no_secret_;
  }
  return secrets_[vehicle.index * fogs_.size() + fi];
}

RunResult World::run()
{
  schedule_topology(0.0);
  for (std::size_t i = 0; i < vehicles_.size(); ++i)
  {
    sched_.schedule(vehicles_[i].join_s, {"VEHICLE_TICK", vehicles_[i].id, std::nullopt, 0},
                    [this, i] { vehicle_tick(i); });
  }
  for (std::size_t p = 0; p < plans_.size(); ++p)
  {
    schedule_attack(p, plans_[p].start_s);
  }
  sched_.run_until(drain_end_s_);

  for (std::uint64_t id = 1; id <= attempts_.size(); ++id)
  {
    finish(id, Outcome::Aborted);
  }

  RunResult r;
  r.fleet    = fleet_;
  r.run_seed = seed_;
  r.attempts.reserve(attempts_.size());
  for (std::size_t i = 0; i < attempts_.size(); ++i)
  {
    auto rec   = attempts_[i].rec;
    rec.cycles = ledger_.total(i + 1);
    r.attempts.push_back(metrics::quantized(rec));
  }
  for (auto &row : trust_rows_)
  {
    std::get<0>(row) = std::round(std::get<0>(row) * 1e6) / 1e6;
    std::get<2>(row) = std::round(std::get<2>(row) * 1e6) / 1e6;
    r.trust_histories[std::get<1>(row)].emplace_back(std::get<0>(row), std::get<2>(row));
  }
  r.trust_rows = std::move(trust_rows_);
  std::set<std::string> flagged;
  for (const auto &f : fogs_)
  {
    flagged.insert(f.auth->sybil_flags().begin(), f.auth->sybil_flags().end());
  }
  r.sybil_flagged.assign(flagged.begin(), flagged.end());
  for (const auto &label : flagged)
  {
    r.honest_sybil_flags += registry_.contains(label) ? 1 : 0;
  }
  r.channel        = channel_.stats();
  r.deliveries     = channel_.log();
  r.trace          = sched_.trace();
  r.events_fired   = sched_.fired();
  r.events_pending = sched_.pending();
  for (const auto &v : vehicles_)
  {
    r.honest_nonces += v.nonces.issued();
  }
  metrics::SummaryOptions so;
  so.theta             = cfg_.trust.theta;
  so.delta_max_s       = cfg_.delta_max_ms / 1000.0;
  so.convergence_eps   = cfg_.convergence_eps;
  so.exclude_malicious = cfg_.exclude_malicious;
  r.summary = metrics::summarize(fleet_, r.attempts, r.trust_histories, r.sybil_flagged.size(), so);
  return r;
}

// ---------------------------------------------------------------- topology

void World::schedule_topology(double at)
{
  sched_.schedule(at, {"TOPOLOGY", std::nullopt, std::nullopt, 0}, [this] {
    rebuild_topology();
    double next = sched_.now() + cfg_.tick_s;
    if (next <= drain_end_s_)
    {
      schedule_topology(next);
    }
  });
}

void World::rebuild_topology()
{
  const double now = sched_.now();
  for (const auto &v : vehicles_)
  {
    node_pos_[v.id] = mobility::sample(*v.traj, now).position;
  }
  graph_ = rebuild_links(node_pos_, fog_pos_, cfg_.fog_range_m);
}

// ---------------------------------------------------------------- vehicles

ContextVector World::context_of(const Vehicle &v, double now) const
{
  auto          k = mobility::sample(*v.traj, now);
  ContextVector ctx{k.speed_mps, k.position, 1.0, now};
  if (v.liar)
  {
    ctx.location.x += 300.0;
    ctx.speed_mps += 10.0;
  }
  return ctx;
}

void World::vehicle_tick(std::size_t vi)
{
  Vehicle     &v   = vehicles_[vi];
  const double now = sched_.now();
  if (now + cfg_.tick_s <= cfg_.duration_s)
  {
    sched_.schedule(now + cfg_.tick_s, {"VEHICLE_TICK", v.id, std::nullopt, 0}, [this, vi] { vehicle_tick(vi); });
  }
  ContextVector ctx = context_of(v, now);
  send_beacons(vi, ctx);

  if (v.in_flight != 0 || now < v.next_allowed_s)
  {
    return;
  }
  bool need = !v.session_fog || now >= v.session_expires_s || !linked(v.id, *v.session_fog);
  if (!need)
  {
    return;
  }
  auto target = nearest_fog(v.id, graph_, node_pos_, fog_pos_);
  if (!target)
  {
    return;
  }
  v.session_fog.reset();
  start_attempt(vi, fog_index_.at(*target), ctx);
}

void World::send_beacons(std::size_t vi, const ContextVector &ctx)
{
  Vehicle &v = vehicles_[vi];
  for (const auto &fog : graph_.fogs_of(v.id))
  {
    std::size_t fi     = fog_index_.at(fog);
    auto        beacon = protocol::make_beacon(v.id, ctx, ++v.beacon_seq, secret(v.id, fi));
    NodeId      vid    = v.id;
    channel_.transmit(
        sched_, vid, fog, true, {"CONTEXT_BEACON", vid, fog, 0},
        [this, fi, beacon] { enqueue(fi, [this, fi, beacon] { return beacon_job(fi, beacon); }); },
        [this, vid, fi] { return linked(vid, fi); });
  }
}

void World::start_attempt(std::size_t vi, std::size_t fi, const ContextVector &ctx)
{
  Vehicle     &v   = vehicles_[vi];
  const double now = sched_.now();
  auto id = new_attempt(v.label, fi, v.id, v.liar, v.liar ? AttackKind::Context : AttackKind::None);
  attempts_[id - 1].vehicle = vi;
  v.in_flight               = id;
  v.serving_fog             = fi;

  ledger_.charge(OpKind::Hash, cfg_.cycles, id);
  ledger_.charge(OpKind::Sign, cfg_.cycles, id);
  AuthRequest req = protocol::build_request(v.id, ctx, v.last_granted_trust, v.key, v.nonces, now);
  double      send_at = now + times_.at(OpKind::Hash) + times_.at(OpKind::Sign);
  req.sent_at_s       = send_at;
  attempts_[id - 1].request = req;

  sched_.schedule(send_at, {"VEHICLE_SEND", v.id, fogs_[fi].id, id}, [this, id, fi] {
    const Attempt &a   = attempts_[id - 1];
    NodeId         src = a.requester;
    channel_.transmit(
        sched_, src, fogs_[fi].id, linked(src, fi), {"AUTH_REQ", src, fogs_[fi].id, id},
        [this, id, fi] {
          capture(fi, attempts_[id - 1].request);
          enqueue(fi, [this, fi, id] { return request_job(fi, id); });
        },
        [this, src, fi] { return linked(src, fi); });
  });
  sched_.schedule(now + cfg_.attempt_timeout_s, {"ATTEMPT_TIMEOUT", v.id, std::nullopt, id},
                  [this, id] { on_timeout(id); });
}

void World::on_challenge(std::uint64_t id, const protocol::Challenge &ch)
{
  Attempt &a = attempts_[id - 1];
  if (!a.vehicle || a.finished)
  {
    return;  // adversaries hold no key to answer with
  }
  Vehicle &v = vehicles_[*a.vehicle];
  if (v.in_flight != id)
  {
    return;
  }
  ledger_.charge(OpKind::Sign, cfg_.cycles, id);
  auto        resp = protocol::answer_challenge(ch, v.key);
  std::size_t fi   = a.fog;
  NodeId      src  = v.id;
  sched_.schedule_in(times_.at(OpKind::Sign), {"VEHICLE_SEND", src, fogs_[fi].id, id}, [this, id, fi, src, resp] {
    channel_.transmit(
        sched_, src, fogs_[fi].id, linked(src, fi), {"CHALLENGE_RESP", src, fogs_[fi].id, id},
        [this, id, fi, resp] {
          Attempt &att = attempts_[id - 1];
          if (att.finished || !att.challenge || att.response_arrived)
          {
            return;
          }
          att.response_arrived = true;
          double arrived       = sched_.now();
          enqueue(fi, [this, fi, id, resp, arrived] { return response_job(fi, id, resp, arrived); }, true);
        },
        [this, src, fi] { return linked(src, fi); });
  });
}

void World::on_ack(std::uint64_t id, const AckToken &token, const protocol::SessionRecord &session,
                   bool via_fallback)
{
  Attempt &a = attempts_[id - 1];
  if (a.finished)
  {
    return;
  }
  if (a.vehicle)
  {
    Vehicle &v = vehicles_[*a.vehicle];
    if (v.in_flight != id)
    {
      return;
    }
    auto key = crypto::derive_session_key(secret(v.id, a.fog), a.request.nonce);
    if (key.bytes != session.key.bytes || !protocol::check_ack_token(token, key, a.request.request_digest))
    {
      throw InvariantViolation(fmt::format("key agreement failed for {} at {}", v.label, a.rec.fog));
    }
    if (!via_fallback && session.trust_at_grant < cfg_.trust.theta)
    {
      throw InvariantViolation("session granted below threshold without fallback");
    }
    const double now  = sched_.now();
    a.rec.latency_ms  = metrics::auth_latency(a.initiated_s, now) * 1000.0;
    v.in_flight       = 0;
    v.failures        = 0;
    v.session_fog     = a.fog;
    v.session_expires_s  = session.key.expires_at();
    v.last_granted_trust = session.trust_at_grant;
  }
  finish(id, via_fallback ? Outcome::GrantedFallback : Outcome::Granted);
}

void World::on_timeout(std::uint64_t id)
{
  Attempt &a = attempts_[id - 1];
  if (a.vehicle)
  {
    Vehicle &v = vehicles_[*a.vehicle];
    if (v.in_flight == id)
    {
      v.in_flight      = 0;
      double wait = std::min(cfg_.retry_backoff_max_s, cfg_.retry_backoff_s * std::ldexp(1.0, static_cast<int>(v.failures)));
      v.next_allowed_s = sched_.now() + wait * v.backoff_rng.uniform(0.5, 1.0);
      v.failures       = std::min<std::uint32_t>(v.failures + 1, 30);
    }
  }
  finish(id, Outcome::Aborted);
}

// ---------------------------------------------------------------- fogs

void World::enqueue(std::size_t fi, Job job, bool urgent)
{
  (urgent ? fogs_[fi].urgent : fogs_[fi].queue).push_back(std::move(job));
  if (!fogs_[fi].busy)
  {
    start_next(fi);
  }
}

void World::start_next(std::size_t fi)
{
  FogNode &f = fogs_[fi];
  auto &q = f.urgent.empty() ? f.queue : f.urgent;
  if (q.empty())
  {
    f.busy = false;
    return;
  }
  f.busy  = true;
  Job job = std::move(q.front());
  q.pop_front();
  Completion c = job();
  sched_.schedule_in(c.service_s, {"FOG_JOB_DONE", f.id, std::nullopt, 0}, [this, fi, done = std::move(c.done)] {
    if (done)
    {
      done();
    }
    start_next(fi);
  });
}

double World::service_time(const std::vector<OpKind> &ops) const
{
  double t = 0.0;
  for (auto op : ops)
  {
    t += times_.at(op);
  }
  return t;
}

void World::charge(std::uint64_t id, const std::vector<OpKind> &ops)
{
  for (auto op : ops)
  {
    ledger_.charge(op, cfg_.cycles, id);
  }
}

void World::trust_row(std::size_t fi, const NodeId &vehicle, double t)
{
  if (vehicle.kind != NodeKind::Vehicle || vehicle.index >= fleet_)
  {
    return;
  }
  const Vehicle &v = vehicles_[vehicle.index];
  if (v.serving_fog != fi)
  {
    return;
  }
  double value = fogs_[fi].auth->trust_of(vehicle);
  if (!trust_rows_.empty() && std::get<1>(trust_rows_.back()) == v.label && std::get<0>(trust_rows_.back()) == t)
  {
    std::get<2>(trust_rows_.back()) = value;
    return;
  }
  trust_rows_.emplace_back(t, v.label, value);
}

World::Completion World::beacon_job(std::size_t fi, ContextBeacon beacon)
{
  auto ops = fogs_[fi].auth->observe_beacon(beacon, sched_.now());
  trust_row(fi, beacon.vehicle_id, sched_.now());
  return {service_time(ops), {}};
}

World::Completion World::request_job(std::size_t fi, std::uint64_t id)
{
  const Attempt &pending = attempts_[id - 1];
  if (pending.finished || sched_.now() + verify_s_ >= pending.initiated_s + cfg_.attempt_timeout_s)
  {
    return {};  // cannot answer before the requester gives up
  }
  FogNode     &f   = fogs_[fi];
  const double now = sched_.now();
  AuthRequest  req = attempts_[id - 1].request;
  NodeId       src = attempts_[id - 1].requester;
  auto         out = f.auth->handle_request(req, now, linked(src, fi));
  charge(id, out.ops);
  Attempt &a = attempts_[id - 1];
  if (!a.finished && out.status != protocol::VerifyStatus::UnknownIdentity)
  {
    a.rec.trust_before = out.trust_before;
    a.rec.trust_after  = out.trust_after;
    a.rec.behavior     = out.behavior;
  }
  if (out.status == protocol::VerifyStatus::Verified)
  {
    trust_row(fi, req.vehicle_id, now);
  }

  std::function<void()> done;
  switch (out.status)
  {
  case protocol::VerifyStatus::UnknownIdentity:
    done = [this, id] { finish(id, Outcome::RejectedUnknown); };
    break;
  case protocol::VerifyStatus::SpoofSuspected:
    done = [this, id] { finish(id, Outcome::RejectedSpoof); };
    break;
  case protocol::VerifyStatus::ReplayDetected:
    done = [this, id] { finish(id, Outcome::RejectedReplay); };
    break;
  case protocol::VerifyStatus::Verified:
    if (out.aborted)
    {
      done = [this, id] { finish(id, Outcome::Aborted); };
    }
    else if (out.session)
    {
      done = [this, fi, id, session = *out.session, token = *out.token] {
        send_ack(fi, id, session, token, false);
      };
    }
    else
    {
      done = [this, fi, id, src, ch = *out.challenge] {
        FogNode &fog = fogs_[fi];
        fog.auth->mark_challenge_sent(ch.vehicle_id, sched_.now());
        attempts_[id - 1].challenge = ch.value;
        channel_.transmit(
            sched_, fog.id, src, linked(src, fi), {"CHALLENGE", fog.id, src, id},
            [this, id, ch] { on_challenge(id, ch); }, [this, src, fi] { return linked(src, fi); });
        double timeout = cfg_.challenge_timeout_ms / 1000.0;
        sched_.schedule_in(timeout, {"CHALLENGE_EXPIRY", fog.id, src, id}, [this, fi, id, ch] {
          Attempt &att = attempts_[id - 1];
          if (att.response_arrived)
          {
            return;
          }
          fogs_[fi].auth->expire_challenge(ch.vehicle_id, ch.value);
          finish(id, Outcome::RejectedTrust);
        });
      };
    }
    break;
  }
  return {service_time(out.ops), std::move(done)};
}

World::Completion World::response_job(std::size_t fi, std::uint64_t id, ChallengeResponse resp, double arrived_s)
{
  if (attempts_[id - 1].finished)
  {
    return {};
  }
  NodeId src = attempts_[id - 1].requester;
  auto   out = fogs_[fi].auth->handle_challenge_response(resp, arrived_s, linked(src, fi));
  charge(id, out.ops);
  std::function<void()> done;
  if (out.session)
  {
    done = [this, fi, id, session = *out.session, token = *out.token] { send_ack(fi, id, session, token, true); };
  }
  else
  {
    Outcome o = out.aborted ? Outcome::Aborted : Outcome::RejectedTrust;
    done      = [this, id, o] { finish(id, o); };
  }
  return {service_time(out.ops), std::move(done)};
}

void World::send_ack(std::size_t fi, std::uint64_t id, const protocol::SessionRecord &session,
                     const AckToken &token, bool via_fallback)
{
  FogNode &f   = fogs_[fi];
  NodeId   src = attempts_[id - 1].requester;
  NodeId   who = session.vehicle_id;
  auto     res = channel_.transmit(
      sched_, f.id, src, linked(src, fi), {"AUTH_ACK", f.id, src, id},
      [this, id, token, session, via_fallback] { on_ack(id, token, session, via_fallback); },
      [this, src, fi] { return linked(src, fi); },
      [this, fi, id, who] {
        fogs_[fi].auth->drop_session(who);
        finish(id, Outcome::Aborted);
      });
  if (res.status == sim::TransmitStatus::Scheduled)
  {
    attempts_[id - 1].rec.comm_ms = channel_.estimate_delay(f.id, sched_.now()) * 1000.0;
  }
  else
  {
    f.auth->drop_session(who);
    finish(id, Outcome::Aborted);
  }
}

// ---------------------------------------------------------------- adversaries

void World::schedule_attack(std::size_t p, double after)
{
  const auto &plan = plans_[p];
  double      at   = after + attack_rngs_[p].exponential(plan.rate_hz);
  if (at > plan.stop_s || at > cfg_.duration_s)
  {
    return;
  }
  sched_.schedule(at, {"ATTACK", std::nullopt, std::nullopt, 0}, [this, p] {
    attack(p);
    schedule_attack(p, sched_.now());
  });
}

void World::attack(std::size_t p)
{
  const auto  &plan = plans_[p];
  sim::Rng    &rng  = attack_rngs_[p];
  const double now  = sched_.now();
  std::size_t  fi   = fog_index_.at(plan.targets[rng.below(plan.targets.size())]);

  switch (plan.kind)
  {
  case AttackKind::Spoof:
  {
    std::vector<std::size_t> joined;
    for (std::size_t i = 0; i < vehicles_.size(); ++i)
    {
      if (vehicles_[i].join_s <= now)
      {
        joined.push_back(i);
      }
    }
    if (joined.empty())
    {
      return;
    }
    const Vehicle &victim = vehicles_[joined[rng.below(joined.size())]];
    ContextVector  ctx    = context_of(victim, now);
    auto req = threats::spoof_attempt(victim.id, ctx, cfg_.initial_trust, attacker_key_, plan.spoof_mode, rng, now);
    inject(fi, std::move(req), AttackKind::Spoof);
    break;
  }
  case AttackKind::Replay:
  {
    fogs_[fi].armed_replays.push_back(threats::sample_replay_delay(plan, rng));
    break;
  }
  case AttackKind::Sybil:
  {
    Point base = node_pos_.at(fogs_[fi].attacker);
    for (std::size_t k = 0; k < sybil_ids_.size(); ++k)
    {
      double        angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(sybil_ids_.size());
      ContextVector ctx{10.0, {base.x + kSybilRadiusM * std::cos(angle), base.y + kSybilRadiusM * std::sin(angle)},
                        1.0, now};
      inject(fi, threats::sybil_request(sybil_ids_[k], ctx, attacker_key_, sybil_nonces_[k], now), AttackKind::Sybil);
    }
    break;
  }
  default:
    break;
  }
}

void World::capture(std::size_t fi, const AuthRequest &req)
{
  auto &armed = fogs_[fi].armed_replays;
  if (armed.empty())
  {
    return;
  }
  double at = sched_.now() + armed.front();
  armed.pop_front();
  if (at > cfg_.duration_s)
  {
    return;
  }
  sched_.schedule(at, {"REPLAY", fogs_[fi].attacker, fogs_[fi].id, 0},
                  [this, fi, copy = threats::replay_attempt(req)] { inject(fi, copy, AttackKind::Replay); });
}

void World::inject(std::size_t fi, AuthRequest req, AttackKind kind)
{
  FogNode &f  = fogs_[fi];
  auto     id = new_attempt(req.vehicle_id.label(), fi, f.attacker, true, kind);
  attempts_[id - 1].request = std::move(req);
  NodeId src                = f.attacker;
  channel_.transmit(
      sched_, src, f.id, linked(src, fi), {"AUTH_REQ", src, f.id, id},
      [this, fi, id] { enqueue(fi, [this, fi, id] { return request_job(fi, id); }); },
      [this, src, fi] { return linked(src, fi); });
  sched_.schedule_in(cfg_.attempt_timeout_s, {"ATTEMPT_TIMEOUT", src, std::nullopt, id}, [this, id] { on_timeout(id); });
}

// ---------------------------------------------------------------- bookkeeping

std::uint64_t World::new_attempt(const std::string &vehicle, std::size_t fi, const NodeId &requester, bool malicious,
                                 AttackKind kind)
{
  Attempt a;
  a.rec.t_s         = sched_.now();
  a.rec.vehicle     = vehicle;
  a.rec.fog         = fogs_[fi].id.label();
  a.rec.malicious   = malicious;
  a.rec.attack_kind = kind;
  auto vid          = NodeId::parse(vehicle);
  double t          = vid ? fogs_[fi].auth->trust_of(*vid) : cfg_.initial_trust;
  a.rec.trust_before = t;
  a.rec.trust_after  = t;
  a.rec.behavior     = vid ? fogs_[fi].auth->behavior_of(*vid) : 1.0;
  a.requester        = requester;
  a.fog              = fi;
  a.initiated_s      = sched_.now();
  attempts_.push_back(std::move(a));
  return attempts_.size();
}

void World::finish(std::uint64_t id, Outcome outcome)
{
  Attempt &a = attempts_[id - 1];
  if (a.finished)
  {
    return;
  }
  a.finished      = true;
  a.rec.outcome   = outcome;
  a.rec.detected  = metrics::scored_detected(outcome, a.rec.malicious);
  if (!metrics::is_granted(outcome) || !a.vehicle)
  {
    a.rec.latency_ms.reset();
    a.rec.comm_ms = 0.0;
  }
}

}  // namespace

RunResult simulate(const ScenarioConfig &cfg, std::size_t fleet, std::uint64_t run_seed, const SimOptions &opts)
{
  cfg.validate();
  World world(cfg, fleet, run_seed, opts);
  return world.run();
}

}  // namespace ztmaf::scenario
