#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace ztmaf {

enum class NodeKind : std::uint8_t
{
  Vehicle,
  Fog,
};

/// Identity of a vehicle or fog node. The label ("v042", "f03") is a pure
/// function of (kind, index), which keeps the two bijective.
struct NodeId
{
  NodeKind      kind{NodeKind::Vehicle};
  std::uint32_t index{0};

  static NodeId vehicle(std::uint32_t index) { return {NodeKind::Vehicle, index}; }
  static NodeId fog(std::uint32_t index) { return {NodeKind::Fog, index}; }

  /// Inverse of label(); returns nullopt for anything label() cannot produce.
  static std::optional<NodeId> parse(const std::string &label);

  std::string label() const;
  bool        is_vehicle() const { return kind == NodeKind::Vehicle; }
  bool        is_fog() const { return kind == NodeKind::Fog; }

  auto operator<=>(const NodeId &) const = default;
};

struct Point
{
  double x{0.0};
  double y{0.0};

  bool operator==(const Point &) const = default;
};

double distance(Point a, Point b);
bool   is_finite(Point p);

/// c_i(t): speed, planar location and behavior score of one vehicle.
struct ContextVector
{
  double speed_mps{0.0};
  Point  location{};
  double behavior{1.0};
  double timestamp_s{0.0};

  /// Throws InvalidContext when a field is non-finite or out of range.
  void validate() const;

  bool operator==(const ContextVector &) const = default;
};

using Positions = std::map<NodeId, Point>;

/// Bipartite vehicle/fog reachability graph, valid as of its last rebuild.
class TopologyGraph
{
public:
  TopologyGraph() = default;

  const std::set<NodeId> &vehicles() const { return vehicles_; }
  const std::set<NodeId> &fog_nodes() const { return fogs_; }
  double                  comm_range_m() const { return range_m_; }

  bool                       has_link(const NodeId &vehicle, const NodeId &fog) const;
  const std::vector<NodeId> &fogs_of(const NodeId &vehicle) const;
  std::size_t                link_count() const { return link_count_; }

  bool operator==(const TopologyGraph &) const = default;

private:
  friend TopologyGraph rebuild_links(const Positions &, const Positions &, double);

  std::set<NodeId>                      vehicles_;
  std::set<NodeId>                      fogs_;
  std::map<NodeId, std::vector<NodeId>> adjacency_;  // vehicle -> sorted fogs
  std::size_t                           link_count_{0};
  double                                range_m_{0.0};
};

/// Links every vehicle to every fog within range_m (closed ball).
TopologyGraph rebuild_links(const Positions &vehicle_positions, const Positions &fog_positions,
                            double range_m);

/// Closest linked fog; ties go to the smaller fog index.
std::optional<NodeId> nearest_fog(const NodeId &vehicle, const TopologyGraph &graph,
                                  const Positions &vehicle_positions,
                                  const Positions &fog_positions);

/// T_i(t) with a bounded history for convergence analysis.
class TrustState
{
public:
  struct Sample
  {
    double t_s;
    double value;
  };

  explicit TrustState(double initial = 0.5, double t_s = 0.0, std::size_t history_capacity = 4096);

  double                     value() const { return value_; }
  double                     last_update_s() const { return last_update_s_; }
  const std::deque<Sample> &history() const { return history_; }

  /// Records a new value at time t_s. An update at the same instant as the
  /// previous one replaces it, so history times stay strictly increasing.
  void set(double value, double t_s);

private:
  double             value_;
  double             last_update_s_;
  std::size_t        capacity_;
  std::deque<Sample> history_;
};

}  // namespace ztmaf
