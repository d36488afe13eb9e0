#pragma once

#include "ztmaf/domain.hpp"
#include "ztmaf/sim/random.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace ztmaf::mobility {

struct TraceSample
{
  double t_s;
  double x_m;
  double y_m;
  double speed_mps;

  bool operator==(const TraceSample &) const = default;
};

struct Trajectory
{
  std::string              vehicle;
  std::vector<TraceSample> samples;  // strictly increasing t_s

  bool operator==(const Trajectory &) const = default;
};

struct KraussParams
{
  double v_max_mps{13.9};
  double accel_mps2{2.6};
  double decel_mps2{4.5};
  double tau_s{1.0};
  double sigma{0.5};
  double dt_s{1.0};

  void validate() const;
};

/// Rectangular loop circuit; lane k is inset k * lane_width_m from the outer edge.
struct RoadLoop
{
  double      width_m{2000.0};
  double      height_m{1000.0};
  std::size_t lanes{1};
  double      lane_width_m{3.5};
  double      vehicle_length_m{5.0};
  double      min_gap_m{2.5};

  double perimeter(std::size_t lane) const;
  /// Position at arc length s (wrapped) along lane k, counter-clockwise from (inset, inset).
  Point point_at(std::size_t lane, double s) const;
};

inline constexpr const char *kTraceHeader = "time_s,vehicle_id,x_m,y_m,speed_mps";

/// Reads the trace CSV. Trajectories come back sorted by vehicle id.
std::vector<Trajectory> load_trace(const std::filesystem::path &path);
std::vector<Trajectory> parse_trace(std::istream &in);
void                    save_trace(const std::vector<Trajectory> &trajectories, std::ostream &out);
void save_trace(const std::vector<Trajectory> &trajectories, const std::filesystem::path &path);

struct Kinematics
{
  Point  position;
  double speed_mps;
};

/// Linear interpolation between bracketing samples, clamped outside the span.
Kinematics sample(const Trajectory &traj, double t_s);

/// Krauss safe speed for a follower at speed v behind a leader at leader_v.
double krauss_safe_speed(double v, double gap_m, double leader_v, const KraussParams &p);

/// One Krauss update. gap_m is the free distance to the leader's rear.
double krauss_step(double v, double gap_m, double leader_v, const KraussParams &p, sim::Rng &rng);

/// Places n vehicles evenly on the loop (round-robin over lanes) and advances
/// them with krauss_step for duration_s. Throws PlacementError if the lanes
/// cannot hold n vehicles at length + min_gap spacing.
std::vector<Trajectory> synth_fleet(std::size_t n_vehicles, const RoadLoop &road,
                                    const KraussParams &p, double duration_s, std::uint64_t seed);

}  // namespace ztmaf::mobility
