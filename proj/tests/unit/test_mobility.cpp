#include "ztmaf/errors.hpp"
#include "ztmaf/mobility.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

using namespace ztmaf;
using namespace ztmaf::mobility;

namespace {

std::vector<Trajectory> parse(const std::string &text)
{
  std::istringstream in(text);
  return parse_trace(in);
}

const std::string kHeader = std::string(kTraceHeader) + "\n";

}  // namespace

TEST(Mobility, ParseGroupsRows)
{
  auto t = parse(kHeader + "0,a,0,0,1\n1,a,1,0,1\n2,a,2,0,1\n");
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t[0].vehicle, "a");
  EXPECT_EQ(t[0].samples.size(), 3u);
}

TEST(Mobility, OutOfOrderRejected)
{
  EXPECT_THROW(parse(kHeader + "5,a,0,0,1\n4,a,1,0,1\n"), TraceOrderError);
}

TEST(Mobility, HeaderOnlyIsEmpty)
{
  EXPECT_TRUE(parse(kHeader).empty());
}

TEST(Mobility, MalformedRowsNameTheLine)
{
  try
  {
    parse(kHeader + "0,a,0,0,1\n1,a,zz,0,1\n");
    FAIL();
  }
  catch (const TraceParseError &e)
  {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(parse(kHeader + "0,a,0,0\n"), TraceParseError);
  EXPECT_THROW(parse(kHeader + "0,a,0,0,-1\n"), TraceParseError);
  EXPECT_THROW(parse("time,id,x,y,v\n"), TraceParseError);
}

TEST(Mobility, FixtureTraceLoads)
{
  auto t = load_trace(std::string(ZTMAF_FIXTURES) + "/sample_trace.csv");
  ASSERT_EQ(t.size(), 3u);
  EXPECT_EQ(t[0].vehicle, "car_a");
  EXPECT_EQ(t[0].samples.size(), 3u);
  EXPECT_EQ(t[2].samples.size(), 1u);
}

TEST(Mobility, SaveLoadRoundTrip)
{
  auto              fleet = synth_fleet(4, RoadLoop{}, KraussParams{}, 30, 5);
  std::stringstream buf;
  save_trace(fleet, buf);
  EXPECT_EQ(parse_trace(buf), fleet);
}

TEST(Mobility, SampleInterpolatesAndClamps)
{
  Trajectory t{"a", {{0, 0, 0, 10}, {10, 100, 0, 10}}};
  EXPECT_DOUBLE_EQ(sample(t, 5).position.x, 50.0);
  EXPECT_DOUBLE_EQ(sample(t, -3).position.x, 0.0);
  EXPECT_DOUBLE_EQ(sample(t, 99).position.x, 100.0);
  EXPECT_DOUBLE_EQ(sample(t, 10).position.x, 100.0);
  EXPECT_DOUBLE_EQ(sample(t, 0).speed_mps, 10.0);
}

TEST(Mobility, KraussFreeRoadAccelerates)
{
  KraussParams p;
  p.sigma = 0;
  sim::Rng rng(1);
  EXPECT_DOUBLE_EQ(krauss_step(5.0, 1e9, 0.0, p, rng), 5.0 + p.accel_mps2 * p.dt_s);
  EXPECT_DOUBLE_EQ(krauss_step(13.0, 1e9, 0.0, p, rng), p.v_max_mps);
}

TEST(Mobility, KraussSafeSpeedFormula)
{
  KraussParams p;
  p.decel_mps2 = 4.5;
  p.tau_s      = 1.0;
  // 10 + (20 - 10) / ((10 + 10) / (2 * 4.5) + 1)
  EXPECT_NEAR(krauss_safe_speed(10, 20, 10, p), 13.10344827586207, 1e-12);
}

TEST(Mobility, KraussDeterministicWithoutNoise)
{
  KraussParams p;
  p.sigma = 0;
  sim::Rng a(1), b(2);
  double   va = 3, vb = 3;
  for (int i = 0; i < 20; ++i)
  {
    va = krauss_step(va, 15, 8, p, a);
    vb = krauss_step(vb, 15, 8, p, b);
    ASSERT_EQ(va, vb);
  }
}

TEST(Mobility, SingleCarReachesVmax)
{
  KraussParams p;
  p.sigma = 0;
  auto t  = synth_fleet(1, RoadLoop{}, p, 60, 1);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_DOUBLE_EQ(t[0].samples.back().speed_mps, p.v_max_mps);
}

TEST(Mobility, FleetDeterministicAndSeedSensitive)
{
  auto a = synth_fleet(20, RoadLoop{}, KraussParams{}, 50, 9);
  EXPECT_EQ(a, synth_fleet(20, RoadLoop{}, KraussParams{}, 50, 9));
  EXPECT_NE(a, synth_fleet(20, RoadLoop{}, KraussParams{}, 50, 10));
  EXPECT_EQ(a[3].vehicle, "v003");
}

TEST(Mobility, OverCapacityRejected)
{
  RoadLoop small;
  small.width_m  = 50;
  small.height_m = 50;
  EXPECT_THROW(synth_fleet(100, small, KraussParams{}, 10, 1), PlacementError);
}

TEST(Mobility, CarsStayOnTheLoop)
{
  RoadLoop road;
  auto     fleet = synth_fleet(50, road, KraussParams{}, 100, 4);
  for (const auto &t : fleet)
  {
    for (const auto &s : t.samples)
    {
      bool on_edge = std::abs(s.x_m) < 1e-6 || std::abs(s.y_m) < 1e-6 || std::abs(s.x_m - road.width_m) < 1e-6 ||
                     std::abs(s.y_m - road.height_m) < 1e-6;
      ASSERT_TRUE(on_edge) << t.vehicle << " at " << s.t_s;
      ASSERT_GE(s.speed_mps, 0.0);
    }
  }
}

TEST(Mobility, BadParamsRejected)
{
  KraussParams p;
  p.sigma = 2;
  EXPECT_THROW(p.validate(), ConfigError);
}
