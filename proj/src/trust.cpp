#include "ztmaf/trust.hpp"

#include "ztmaf/errors.hpp"

#include <algorithm>
#include <cmath>

namespace ztmaf::trust {

void TrustParams::validate() const
{
  if (!(alpha > 0.0 && alpha < 1.0))
  {
    throw ConfigError("trust.alpha", "must lie in (0,1)");
  }
  if (!(theta >= 0.0 && theta <= 1.0))
  {
    throw ConfigError("trust.theta", "must lie in [0,1]");
  }
  for (auto [key, w] : {std::pair{"trust.w_speed", w_speed}, std::pair{"trust.w_loc", w_loc},
                        std::pair{"trust.w_behavior", w_behavior}})
  {
    if (!(w >= 0.0) || !std::isfinite(w))
    {
      throw ConfigError(key, "must be a non-negative weight");
    }
  }
  if (std::abs(w_speed + w_loc + w_behavior - 1.0) > 1e-9)
  {
    throw ConfigError("trust.w_speed", "weights must sum to 1");
  }
  if (!(speed_tol_mps > 0.0) || !std::isfinite(speed_tol_mps))
  {
    throw ConfigError("trust.speed_tol_mps", "must be positive");
  }
  if (!(loc_tol_m > 0.0) || !std::isfinite(loc_tol_m))
  {
    throw ConfigError("trust.loc_tol_m", "must be positive");
  }
}

double plausibility(double error, double tolerance)
{
  return std::clamp(1.0 - std::max(0.0, error / tolerance - 1.0), 0.0, 1.0);
}

double psi(const ContextVector &ctx, double expected_speed_mps, Point estimated_location,
           const TrustParams &params)
{
  double g_speed = plausibility(std::abs(ctx.speed_mps - expected_speed_mps), params.speed_tol_mps);
  double g_loc   = plausibility(distance(ctx.location, estimated_location), params.loc_tol_m);
  double b       = std::clamp(ctx.behavior, 0.0, 1.0);
  double value   = params.w_speed * g_speed + params.w_loc * g_loc + params.w_behavior * b;
  return std::clamp(value, 0.0, 1.0);
}

double filter_step(double trust, double psi_value, double alpha)
{
  // The convex combination can drift one ulp past its endpoints.
  double lo = std::min(trust, psi_value);
  double hi = std::max(trust, psi_value);
  return std::clamp(alpha * trust + (1.0 - alpha) * psi_value, lo, hi);
}

TrustState update_trust(const TrustState &state, const ContextVector &ctx, double psi_value,
                        const TrustParams &params)
{
  if (!(psi_value >= 0.0 && psi_value <= 1.0))
  {
    throw InvalidContext("psi value must lie in [0,1]");
  }
  TrustState next = state;
  next.set(filter_step(state.value(), psi_value, params.alpha),
           std::max(ctx.timestamp_s, state.last_update_s()));
  return next;
}

std::uint64_t convergence_time(double t0, double psi_star, double alpha, double eps)
{
  double gap = std::abs(t0 - psi_star);
  if (gap <= eps)
  {
    return 0;
  }
  auto n = static_cast<std::uint64_t>(std::ceil(std::log(eps / gap) / std::log(alpha)));
  // Guard the closed form against rounding at exact band edges.
  while (n > 0 && std::pow(alpha, static_cast<double>(n - 1)) * gap <= eps)
  {
    --n;
  }
  while (std::pow(alpha, static_cast<double>(n)) * gap > eps)
  {
    ++n;
  }
  return n;
}

}  // namespace ztmaf::trust
