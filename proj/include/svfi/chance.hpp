#pragma once

#include <cstdint>
#include <string>

#include "svfi/primitives.hpp"
#include "svfi/types.hpp"

namespace svfi {

// Estimated plane with a 4x4 covariance over (normal, offset).
struct PlaneBelief {
  Plane plane;
  Mat4 covariance = Mat4::Zero();

  void validate() const;
};

struct ChanceParams {
  double alpha = 0.7;   // required satisfaction probability, in (0, 1)
  double eta = 1.0;     // approach-rate gain
  double d_safe = 0.0;  // clearance, meters
};

// Inverse standard normal CDF, computed by bisection on the erf-based CDF.
// Accurate to 1e-9 in the returned z. alpha must lie in (0, 1).
double std_normal_quantile(double alpha);

// Gradient of f(pi) = n^T (J_t qdot + eta t) - eta d with respect to the
// plane parameters pi = (n, d).
Vec4 chance_gradient(const MatX& j_t, const VecX& qdot_prev, const Vec3& t, double eta);

// sigma_f^2 = grad^T Sigma grad (clamped at zero against round-off).
double propagate_variance(const Vec4& grad, const Mat4& sigma);

// Deterministic surrogate of the chance-constrained plane VFI:
//   -n^T J_t qdot <= eta * (d_hat - d_safe) - b_alpha,
//   b_alpha = Phi^{-1}(alpha) * sigma_f,
// with sigma_f evaluated at the previous tick's command (zero-order hold).
// With zero covariance this degrades exactly to point_plane_vfi_row.
ConstraintRow surrogate_row(const PlaneBelief& belief, const Vec3& t, const MatX& j_t,
                            const VecX& qdot_prev, const ChanceParams& params,
                            const std::string& label);

struct ViolationRateResult {
  double fraction = 0.0;      // satisfaction rate, sampled normals renormalized
  double raw_fraction = 0.0;  // satisfaction rate without renormalization
  int samples = 0;
};

// Samples plane parameters from N(mean, sigma), renormalizes each sample to
// a geometrically valid plane (divides (n, d) by |n|), and evaluates the
// fraction of samples with f(pi) >= eta * d_safe. The raw rate (no
// renormalization) is reported alongside. Deterministic given the seed; the
// sample range is partitioned into fixed-size blocks with per-block seeds.
ViolationRateResult monte_carlo_violation_rate(const Plane& mean, const Mat4& sigma,
                                               const Vec3& t, const MatX& j_t,
                                               const VecX& qdot, const ChanceParams& params,
                                               int n_samples, std::uint64_t seed);

}  // namespace svfi
