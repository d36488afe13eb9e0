#pragma once

#include "ztmaf/domain.hpp"

#include <cstdint>

namespace ztmaf::trust {

struct TrustParams
{
  double alpha{0.92};
  double theta{0.65};
  double w_speed{0.25};
  double w_loc{0.25};
  double w_behavior{0.5};
  double speed_tol_mps{5.0};
  double loc_tol_m{50.0};

  /// Throws ConfigError naming the offending trust.* key.
  void validate() const;
};

/// Trapezoidal plausibility: 1 within one tolerance, linear to 0 at two.
double plausibility(double error, double tolerance);

/// Context-to-trust mapping: weighted blend of speed plausibility, location
/// plausibility and the behavior score.
double psi(const ContextVector &ctx, double expected_speed_mps, Point estimated_location,
           const TrustParams &params);

/// Exponential filter step, result stored at ctx.timestamp_s.
TrustState update_trust(const TrustState &state, const ContextVector &ctx, double psi_value,
                        const TrustParams &params);

/// The same step on bare values.
double filter_step(double trust, double psi_value, double alpha);

/// Smallest n with alpha^n * |t0 - psi_star| <= eps.
std::uint64_t convergence_time(double t0, double psi_star, double alpha, double eps);

}  // namespace ztmaf::trust
