#include "ztmaf/mobility.hpp"

#include "ztmaf/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace ztmaf::mobility {

void KraussParams::validate() const
{
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(v_max_mps)) throw ConfigError("mobility.v_max_mps", "must be positive");
  if (!positive(accel_mps2)) throw ConfigError("mobility.accel_mps2", "must be positive");
  if (!positive(decel_mps2)) throw ConfigError("mobility.decel_mps2", "must be positive");
  if (!positive(tau_s)) throw ConfigError("mobility.tau_s", "must be positive");
  if (!positive(dt_s)) throw ConfigError("mobility.dt_s", "must be positive");
  if (!(sigma >= 0.0 && sigma <= 1.0)) throw ConfigError("mobility.sigma", "must lie in [0,1]");
}

double RoadLoop::perimeter(std::size_t lane) const
{
  double inset = static_cast<double>(lane) * lane_width_m;
  return 2.0 * ((width_m - 2.0 * inset) + (height_m - 2.0 * inset));
}

Point RoadLoop::point_at(std::size_t lane, double s) const
{
  double inset = static_cast<double>(lane) * lane_width_m;
  double w     = width_m - 2.0 * inset;
  double h     = height_m - 2.0 * inset;
  double p     = 2.0 * (w + h);
  s            = std::fmod(s, p);
  if (s < 0.0)
  {
    s += p;
  }
  if (s <= w)
  {
    return {inset + s, inset};
  }
  s -= w;
  if (s <= h)
  {
    return {inset + w, inset + s};
  }
  s -= h;
  if (s <= w)
  {
    return {inset + w - s, inset + h};
  }
  s -= w;
  return {inset, inset + h - s};
}

namespace {

double parse_double(std::string_view field, std::size_t line, const char *name)
{
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(value))
  {
    throw TraceParseError(line, fmt::format("bad {} '{}'", name, field));
  }
  return value;
}

}  // namespace

std::vector<Trajectory> parse_trace(std::istream &in)
{
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader)
  {
    throw TraceParseError(1, fmt::format("expected header '{}'", kTraceHeader));
  }
  std::map<std::string, Trajectory> by_vehicle;
  std::size_t                       line_no = 1;
  while (std::getline(in, line))
  {
    ++line_no;
    if (line.empty())
    {
      continue;
    }
    std::vector<std::string_view> fields;
    std::string_view              rest = line;
    while (true)
    {
      auto comma = rest.find(',');
      fields.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos)
      {
        break;
      }
      rest.remove_prefix(comma + 1);
    }
    if (fields.size() != 5)
    {
      throw TraceParseError(line_no, fmt::format("expected 5 fields, got {}", fields.size()));
    }
    if (fields[1].empty())
    {
      throw TraceParseError(line_no, "empty vehicle_id");
    }
    TraceSample s{parse_double(fields[0], line_no, "time_s"), parse_double(fields[2], line_no, "x_m"),
                  parse_double(fields[3], line_no, "y_m"), parse_double(fields[4], line_no, "speed_mps")};
    if (s.speed_mps < 0.0)
    {
      throw TraceParseError(line_no, "negative speed");
    }
    auto &traj = by_vehicle[std::string(fields[1])];
    traj.vehicle = std::string(fields[1]);
    if (!traj.samples.empty() && s.t_s <= traj.samples.back().t_s)
    {
      throw TraceOrderError(fmt::format("line {}: time {} for {} does not follow {}", line_no, s.t_s,
                                        traj.vehicle, traj.samples.back().t_s));
    }
    traj.samples.push_back(s);
  }
  std::vector<Trajectory> out;
  out.reserve(by_vehicle.size());
  for (auto &[id, traj] : by_vehicle)
  {
    out.push_back(std::move(traj));
  }
  return out;
}

std::vector<Trajectory> load_trace(const std::filesystem::path &path)
{
  std::ifstream in(path);
  if (!in)
  {
    throw TraceParseError(0, "cannot open " + path.string());
  }
  return parse_trace(in);
}

void save_trace(const std::vector<Trajectory> &trajectories, std::ostream &out)
{
  out << kTraceHeader << '\n';
  for (const auto &traj : trajectories)
  {
    for (const auto &s : traj.samples)
    {
      out << fmt::format("{},{},{},{},{}\n", s.t_s, traj.vehicle, s.x_m, s.y_m, s.speed_mps);
    }
  }
}

void save_trace(const std::vector<Trajectory> &trajectories, const std::filesystem::path &path)
{
  std::ofstream out(path);
  save_trace(trajectories, out);
}

Kinematics sample(const Trajectory &traj, double t_s)
{
  const auto &s = traj.samples;
  if (s.empty())
  {
    throw InvalidPosition("empty trajectory for " + traj.vehicle);
  }
  if (t_s <= s.front().t_s)
  {
    return {{s.front().x_m, s.front().y_m}, s.front().speed_mps};
  }
  if (t_s >= s.back().t_s)
  {
    return {{s.back().x_m, s.back().y_m}, s.back().speed_mps};
  }
  auto hi = std::upper_bound(s.begin(), s.end(), t_s,
                             [](double t, const TraceSample &x) { return t < x.t_s; });
  auto lo = hi - 1;
  if (lo->t_s == t_s)
  {
    return {{lo->x_m, lo->y_m}, lo->speed_mps};
  }
  double f = (t_s - lo->t_s) / (hi->t_s - lo->t_s);
  auto   lerp = [f](double a, double b) { return a + (b - a) * f; };
  return {{lerp(lo->x_m, hi->x_m), lerp(lo->y_m, hi->y_m)}, lerp(lo->speed_mps, hi->speed_mps)};
}

double krauss_safe_speed(double v, double gap_m, double leader_v, const KraussParams &p)
{
  return leader_v + (gap_m - leader_v * p.tau_s) / ((v + leader_v) / (2.0 * p.decel_mps2) + p.tau_s);
}

double krauss_step(double v, double gap_m, double leader_v, const KraussParams &p, sim::Rng &rng)
{
  double v_safe = krauss_safe_speed(v, gap_m, leader_v, p);
  double v_des  = std::min({v + p.accel_mps2 * p.dt_s, p.v_max_mps, v_safe});
  double u      = rng.uniform01();
  return std::max(0.0, v_des - p.sigma * p.accel_mps2 * p.dt_s * u);
}

std::vector<Trajectory> synth_fleet(std::size_t n_vehicles, const RoadLoop &road, const KraussParams &p,
                                    double duration_s, std::uint64_t seed)
{
  if (n_vehicles == 0)
  {
    throw PlacementError("fleet must contain at least one vehicle");
  }
  p.validate();
  const std::size_t lanes = std::max<std::size_t>(road.lanes, 1);
  const double      slot  = road.vehicle_length_m + road.min_gap_m;

  struct Car
  {
    std::size_t index;
    double      s;  // unwrapped arc length
    double      v;
    sim::Rng    rng;
  };
  std::vector<std::vector<Car>> lane_cars(lanes);
  for (std::size_t i = 0; i < n_vehicles; ++i)
  {
    lane_cars[i % lanes].push_back(Car{i, 0.0, 0.0, sim::Rng(seed, "krauss", i)});
  }
  for (std::size_t lane = 0; lane < lanes; ++lane)
  {
    auto  &cars = lane_cars[lane];
    double per  = road.perimeter(lane);
    if (cars.empty())
    {
      continue;
    }
    if (static_cast<double>(cars.size()) * slot > per)
    {
      throw PlacementError(fmt::format("lane {} of {:.0f} m cannot hold {} vehicles at {:.1f} m spacing",
                                       lane, per, cars.size(), slot));
    }
    double spacing = per / static_cast<double>(cars.size());
    double v0      = cars.size() == 1 ? 0.0 : std::min(p.v_max_mps, (spacing - slot) / p.tau_s);
    for (std::size_t j = 0; j < cars.size(); ++j)
    {
      cars[j].s = spacing * static_cast<double>(j);
      cars[j].v = std::max(0.0, v0);
    }
  }

  std::vector<Trajectory> out(n_vehicles);
  auto record = [&](double t) {
    for (std::size_t lane = 0; lane < lanes; ++lane)
    {
      for (const auto &car : lane_cars[lane])
      {
        Point pt = road.point_at(lane, car.s);
        out[car.index].samples.push_back({t, pt.x, pt.y, car.v});
      }
    }
  };
  for (std::size_t i = 0; i < n_vehicles; ++i)
  {
    out[i].vehicle = NodeId::vehicle(static_cast<std::uint32_t>(i)).label();
  }

  const auto steps = static_cast<std::size_t>(std::floor(duration_s / p.dt_s + 1e-9));
  record(0.0);
  std::vector<double> next_v;
  for (std::size_t k = 1; k <= steps; ++k)
  {
    for (std::size_t lane = 0; lane < lanes; ++lane)
    {
      auto  &cars = lane_cars[lane];
      double per  = road.perimeter(lane);
      next_v.assign(cars.size(), 0.0);
      for (std::size_t j = 0; j < cars.size(); ++j)
      {
        double gap      = std::numeric_limits<double>::infinity();
        double leader_v = p.v_max_mps;
        if (cars.size() > 1)
        {
          const Car &leader = cars[(j + 1) % cars.size()];
          double     lead_s = leader.s + (j + 1 == cars.size() ? per : 0.0);
          gap               = std::max(0.0, lead_s - cars[j].s - slot);
          leader_v          = leader.v;
        }
        next_v[j] = krauss_step(cars[j].v, std::min(gap, 1e9), leader_v, p, cars[j].rng);
      }
      for (std::size_t j = 0; j < cars.size(); ++j)
      {
        cars[j].v = next_v[j];
        cars[j].s += next_v[j] * p.dt_s;
      }
    }
    record(static_cast<double>(k) * p.dt_s);
  }
  return out;
}

}  // namespace ztmaf::mobility
