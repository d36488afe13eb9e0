#include "ztmaf/errors.hpp"
#include "ztmaf/scenario/config.hpp"

#include <gtest/gtest.h>

#include "json.hpp"

using namespace ztmaf;
using namespace ztmaf::scenario;

namespace {

std::string config_error_key(const std::string &json)
{
  try
  {
    parse_config(json);
  }
  catch (const ConfigError &e)
  {
    return e.key();
  }
  return "";
}

}  // namespace

TEST(Config, DefaultsFollowTableOne)
{
  ScenarioConfig c;
  EXPECT_EQ(c.duration_s, 600.0);
  EXPECT_EQ(c.fleet_sizes, (std::vector<std::size_t>{100, 200, 300, 400, 500}));
  EXPECT_EQ(c.fog_count, 10u);
  EXPECT_EQ(c.trust.theta, 0.65);
  EXPECT_EQ(c.bandwidth_mbps, 10.0);
  EXPECT_EQ(c.packet_bytes, 512u);
  EXPECT_EQ(c.propagation_ms, 1.0);
  EXPECT_EQ(c.loss_prob, 0.0);
  EXPECT_EQ(c.replay_ttl_s, 30.0);
  EXPECT_EQ(c.session_lifetime_s, 120.0);
  EXPECT_EQ(c.delta_max_ms, 200.0);
  EXPECT_NO_THROW(c.validate());
  EXPECT_NEAR(c.channel().min_delay_s(), 1.4096e-3, 1e-15);
}

TEST(Config, NestedAndDottedKeysAgree)
{
  auto a = parse_config(R"({"trust": {"theta": 0.7}, "fleet": {"sizes": [50]}})");
  auto b = parse_config(R"({"trust.theta": 0.7, "fleet.sizes": [50]})");
  EXPECT_EQ(echo_config(a), echo_config(b));
  EXPECT_EQ(a.trust.theta, 0.7);
  EXPECT_EQ(a.fleet_sizes, std::vector<std::size_t>{50});
}

TEST(Config, ErrorsNameTheKey)
{
  EXPECT_EQ(config_error_key(R"({"trust": {"theta": 1.5}})"), "trust.theta");
  EXPECT_EQ(config_error_key(R"({"trust": {"thetaa": 0.5}})"), "trust.thetaa");
  EXPECT_EQ(config_error_key(R"({"fleet.sizes": [100, 100]})"), "fleet.sizes");
  EXPECT_EQ(config_error_key(R"({"fleet.sizes": []})"), "fleet.sizes");
  EXPECT_EQ(config_error_key(R"({"net.loss_prob": 2})"), "net.loss_prob");
  EXPECT_EQ(config_error_key(R"({"sim.duration_s": "long"})"), "sim.duration_s");
  EXPECT_EQ(config_error_key(R"({"fog.count": 7})"), "fog.count");
  EXPECT_EQ(config_error_key(R"({"mobility.mode": "teleport"})"), "mobility.mode");
  EXPECT_EQ(config_error_key(R"({"cost.cycles.quantum_sign": 5})"), "cost.cycles.quantum_sign");
  EXPECT_EQ(config_error_key("{not json"), "<document>");
}

TEST(Config, InfiniteTtl)
{
  auto c = parse_config(R"({"replay": {"ttl_s": "inf"}})");
  EXPECT_FALSE(c.replay_ttl_s.has_value());
  auto back = parse_config(echo_config(c));
  EXPECT_FALSE(back.replay_ttl_s.has_value());
}

TEST(Config, EchoIsAFixedPoint)
{
  auto c = parse_config(R"({"seed": 9, "trust.alpha": 0.9, "attack.spoof_rate_hz": 0.25,
                            "attack.targets": [1, 3], "mobility.tier": "high",
                            "cost.time_ms.sig_verify": 40, "cost.cycles.hash": 1000})");
  auto e1 = echo_config(c);
  auto e2 = echo_config(parse_config(e1));
  EXPECT_EQ(e1, e2);
  auto keys = config_keys();
  auto j    = nlohmann::json::parse(e1);
  EXPECT_EQ(j.size(), keys.size());
  for (const auto &k : keys) EXPECT_TRUE(j.contains(k)) << k;
}

TEST(Config, TierScalesSpeed)
{
  auto c = parse_config(R"({"mobility.tier": "high"})");
  EXPECT_DOUBLE_EQ(c.tiered_krauss().v_max_mps, 2 * c.krauss.v_max_mps);
  auto l = parse_config(R"({"mobility.tier": "low"})");
  EXPECT_DOUBLE_EQ(l.tiered_krauss().v_max_mps, 0.5 * l.krauss.v_max_mps);
}

TEST(Config, AttackPlansFollowRates)
{
  ScenarioConfig c;
  EXPECT_TRUE(c.attack_plans().empty());
  c.spoof_rate_hz  = 0.5;
  c.replay_rate_hz = 0.5;
  c.attack_targets = {2};
  auto plans       = c.attack_plans();
  ASSERT_EQ(plans.size(), 2u);
  EXPECT_EQ(plans[0].targets, std::vector<NodeId>{NodeId::fog(2)});
}

TEST(Config, ProcessingTimesInSeconds)
{
  ScenarioConfig c;
  auto           t = c.processing_times();
  EXPECT_DOUBLE_EQ(t.at(sim::OpKind::SigVerify), c.time_ms[3] / 1000.0);
}
