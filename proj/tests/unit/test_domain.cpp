#include "ztmaf/domain.hpp"
#include "ztmaf/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace ztmaf;

namespace {

TopologyGraph one_vehicle(Point v, Positions fogs, double range)
{
  return rebuild_links({{NodeId::vehicle(0), v}}, fogs, range);
}

}  // namespace

TEST(Domain, LinkWithinRange)
{
  auto g = one_vehicle({0, 0}, {{NodeId::fog(0), {0, 100}}}, 300);
  EXPECT_TRUE(g.has_link(NodeId::vehicle(0), NodeId::fog(0)));
  EXPECT_EQ(g.link_count(), 1u);
}

TEST(Domain, NoLinkBeyondRange)
{
  auto g = one_vehicle({0, 0}, {{NodeId::fog(0), {400, 0}}}, 300);
  EXPECT_FALSE(g.has_link(NodeId::vehicle(0), NodeId::fog(0)));
  EXPECT_TRUE(g.fogs_of(NodeId::vehicle(0)).empty());
}

TEST(Domain, BoundaryIsInclusive)
{
  auto g = one_vehicle({300, 0}, {{NodeId::fog(0), {0, 0}}}, 300);
  EXPECT_TRUE(g.has_link(NodeId::vehicle(0), NodeId::fog(0)));
}

TEST(Domain, NearestFogSingleLink)
{
  Positions v{{NodeId::vehicle(0), {0, 0}}};
  Positions f{{NodeId::fog(3), {10, 0}}, {NodeId::fog(4), {900, 0}}};
  auto      g = rebuild_links(v, f, 300);
  EXPECT_EQ(nearest_fog(NodeId::vehicle(0), g, v, f), NodeId::fog(3));
}

TEST(Domain, NearestFogTieBreaksOnLowerIndex)
{
  Positions v{{NodeId::vehicle(0), {0, 0}}};
  Positions f{{NodeId::fog(5), {0, 50}}, {NodeId::fog(2), {0, -50}}};
  auto      g = rebuild_links(v, f, 300);
  EXPECT_EQ(nearest_fog(NodeId::vehicle(0), g, v, f), NodeId::fog(2));
}

TEST(Domain, NearestFogNoneWithoutLinks)
{
  Positions v{{NodeId::vehicle(0), {0, 0}}};
  Positions f{{NodeId::fog(0), {1000, 0}}};
  auto      g = rebuild_links(v, f, 300);
  EXPECT_FALSE(nearest_fog(NodeId::vehicle(0), g, v, f).has_value());
}

TEST(Domain, NearestIsAlwaysLinked)
{
  Positions f;
  for (std::uint32_t i = 0; i < 6; ++i)
  {
    f[NodeId::fog(i)] = {200.0 * i, 100.0 * (i % 2)};
  }
  for (int k = 0; k < 200; ++k)
  {
    Positions v{{NodeId::vehicle(0), {7.3 * k - 100, 3.1 * k - 200}}};
    auto      g = rebuild_links(v, f, 250);
    if (auto n = nearest_fog(NodeId::vehicle(0), g, v, f))
    {
      EXPECT_TRUE(g.has_link(NodeId::vehicle(0), *n));
    }
  }
}

TEST(Domain, NonFinitePositionRejected)
{
  Positions v{{NodeId::vehicle(0), {std::numeric_limits<double>::quiet_NaN(), 0}}};
  EXPECT_THROW(rebuild_links(v, {{NodeId::fog(0), {0, 0}}}, 300), InvalidPosition);
}

TEST(Domain, LabelsRoundTrip)
{
  for (auto id : {NodeId::vehicle(0), NodeId::vehicle(42), NodeId::vehicle(1234), NodeId::fog(7)})
  {
    auto parsed = NodeId::parse(id.label());
    ASSERT_TRUE(parsed);
    EXPECT_EQ(*parsed, id);
  }
  EXPECT_EQ(NodeId::vehicle(1).label(), "v001");
  EXPECT_EQ(NodeId::fog(3).label(), "f03");
  EXPECT_FALSE(NodeId::parse("x12"));
  EXPECT_FALSE(NodeId::parse("v"));
}

TEST(Domain, ContextValidation)
{
  ContextVector ok{10, {0, 0}, 1, 0};
  EXPECT_NO_THROW(ok.validate());
  ContextVector neg = ok;
  neg.speed_mps     = -1;
  EXPECT_THROW(neg.validate(), InvalidContext);
  ContextVector beh = ok;
  beh.behavior      = 1.5;
  EXPECT_THROW(beh.validate(), InvalidContext);
}

TEST(Domain, TrustStateHistoryIsBounded)
{
  TrustState s(0.5, 0.0, 3);
  for (int i = 1; i <= 5; ++i)
  {
    s.set(0.5 + 0.05 * i, i);
  }
  EXPECT_DOUBLE_EQ(s.value(), 0.75);
  EXPECT_EQ(s.history().size(), 3u);
  EXPECT_DOUBLE_EQ(s.history().back().t_s, 5.0);
}

TEST(Domain, TrustStateRejectsOutOfRange)
{
  TrustState s;
  EXPECT_THROW(s.set(1.2, 1.0), InvariantViolation);
  EXPECT_THROW(s.set(0.6, -1.0), InvariantViolation);
}
