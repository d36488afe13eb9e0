#include "ztmaf/domain.hpp"

#include "ztmaf/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

namespace ztmaf {

std::string NodeId::label() const
{
  return kind == NodeKind::Vehicle ? fmt::format("v{:03}", index) : fmt::format("f{:02}", index);
}

std::optional<NodeId> NodeId::parse(const std::string &label)
{
  if (label.size() < 2)
  {
    return std::nullopt;
  }
  NodeKind kind;
  if (label[0] == 'v')
  {
    kind = NodeKind::Vehicle;
  }
  else if (label[0] == 'f')
  {
    kind = NodeKind::Fog;
  }
  else
  {
    return std::nullopt;
  }
  std::uint32_t index = 0;
  const char   *first = label.data() + 1;
  const char   *last  = label.data() + label.size();
  auto [ptr, ec]      = std::from_chars(first, last, index);
  if (ec != std::errc{} || ptr != last)
  {
    return std::nullopt;
  }
  NodeId id{kind, index};
  if (id.label() != label)
  {
    return std::nullopt;
  }
  return id;
}

double distance(Point a, Point b)
{
  return std::hypot(a.x - b.x, a.y - b.y);
}

bool is_finite(Point p)
{
  return std::isfinite(p.x) && std::isfinite(p.y);
}

void ContextVector::validate() const
{
  if (!std::isfinite(speed_mps) || speed_mps < 0.0)
  {
    throw InvalidContext("speed must be finite and non-negative");
  }
  if (!is_finite(location))
  {
    throw InvalidContext("location must be finite");
  }
  if (!std::isfinite(behavior) || behavior < 0.0 || behavior > 1.0)
  {
    throw InvalidContext("behavior must lie in [0,1]");
  }
  if (!std::isfinite(timestamp_s))
  {
    throw InvalidContext("timestamp must be finite");
  }
}

bool TopologyGraph::has_link(const NodeId &vehicle, const NodeId &fog) const
{
  auto it = adjacency_.find(vehicle);
  if (it == adjacency_.end())
  {
    return false;
  }
  return std::binary_search(it->second.begin(), it->second.end(), fog);
}

const std::vector<NodeId> &TopologyGraph::fogs_of(const NodeId &vehicle) const
{
  static const std::vector<NodeId> kNone;
  auto                             it = adjacency_.find(vehicle);
  return it == adjacency_.end() ? kNone : it->second;
}

TopologyGraph rebuild_links(const Positions &vehicle_positions, const Positions &fog_positions,
                            double range_m)
{
  if (!(range_m > 0.0) || !std::isfinite(range_m))
  {
    throw InvalidPosition("communication range must be positive and finite");
  }
  TopologyGraph graph;
  graph.range_m_ = range_m;
  for (const auto &[fog, p] : fog_positions)
  {
    if (!fog.is_fog())
    {
      throw InvalidPosition(fog.label() + " is not a fog node");
    }
    if (!is_finite(p))
    {
      throw InvalidPosition("non-finite coordinate for " + fog.label());
    }
    graph.fogs_.insert(fog);
  }
  for (const auto &[vehicle, p] : vehicle_positions)
  {
    if (!vehicle.is_vehicle())
    {
      throw InvalidPosition(vehicle.label() + " is not a vehicle");
    }
    if (!is_finite(p))
    {
      throw InvalidPosition("non-finite coordinate for " + vehicle.label());
    }
    graph.vehicles_.insert(vehicle);
    auto &linked = graph.adjacency_[vehicle];
    for (const auto &[fog, q] : fog_positions)
    {
      if (distance(p, q) <= range_m)
      {
        linked.push_back(fog);  // fog_positions is ordered, so linked stays sorted
      }
    }
    graph.link_count_ += linked.size();
  }
  return graph;
}

std::optional<NodeId> nearest_fog(const NodeId &vehicle, const TopologyGraph &graph,
                                  const Positions &vehicle_positions,
                                  const Positions &fog_positions)
{
  if (!graph.vehicles().contains(vehicle))
  {
    throw UnknownNode(vehicle.label());
  }
  auto vp = vehicle_positions.find(vehicle);
  if (vp == vehicle_positions.end())
  {
    throw UnknownNode("no position for " + vehicle.label());
  }
  std::optional<NodeId> best;
  double                best_d = std::numeric_limits<double>::infinity();
  for (const auto &fog : graph.fogs_of(vehicle))
  {
    auto fp = fog_positions.find(fog);
    if (fp == fog_positions.end())
    {
      throw UnknownNode("no position for " + fog.label());
    }
    // fogs_of is ascending by index, so strict < keeps the smallest index on ties
    double d = distance(vp->second, fp->second);
    if (d < best_d)
    {
      best_d = d;
      best   = fog;
    }
  }
  return best;
}

TrustState::TrustState(double initial, double t_s, std::size_t history_capacity)
  : value_(initial), last_update_s_(t_s), capacity_(std::max<std::size_t>(history_capacity, 1))
{
  if (!(initial >= 0.0 && initial <= 1.0))
  {
    throw InvalidContext("initial trust must lie in [0,1]");
  }
  history_.push_back({t_s, initial});
}

void TrustState::set(double value, double t_s)
{
  if (!(value >= 0.0 && value <= 1.0))
  {
    throw InvariantViolation(fmt::format("trust value {} outside [0,1]", value));
  }
  if (t_s < last_update_s_)
  {
    throw InvariantViolation("trust updates must not go back in time");
  }
  if (!history_.empty() && history_.back().t_s == t_s)
  {
    history_.back().value = value;
  }
  else
  {
    history_.push_back({t_s, value});
    if (history_.size() > capacity_)
    {
      history_.pop_front();
    }
  }
  value_         = value;
  last_update_s_ = t_s;
}

}  // namespace ztmaf
