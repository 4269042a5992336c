#include "svfi/chance.hpp"

#include <cmath>

#include "svfi/rng.hpp"

namespace svfi {

void PlaneBelief::validate() const {
  plane.validate();
  if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-9)
    throw std::invalid_argument("plane covariance must be symmetric");
  Eigen::SelfAdjointEigenSolver<Mat4> es(covariance);
  if (es.eigenvalues().minCoeff() < -1e-10)
    throw std::invalid_argument("plane covariance must be positive semidefinite");
}

namespace {

inline double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / M_SQRT2); }

}  // namespace

double std_normal_quantile(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("quantile argument must lie in (0, 1)");
  double lo = -40.0, hi = 40.0;
  // 60 halvings bring the bracket below 1e-16; well inside the 1e-9 budget.
  for (int i = 0; i < 60 && hi - lo > 1e-13; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (std_normal_cdf(mid) < alpha)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

Vec4 chance_gradient(const MatX& j_t, const VecX& qdot_prev, const Vec3& t, double eta) {
  if (j_t.rows() != 3) throw DimensionError("point Jacobian must have 3 rows");
  if (qdot_prev.size() != j_t.cols())
    throw DimensionError("qdot dimension does not match Jacobian");
  Vec4 g;
  g.head<3>() = j_t * qdot_prev + eta * t;
  g(3) = -eta;
  return g;
}

double propagate_variance(const Vec4& grad, const Mat4& sigma) {
  const double v = grad.dot(sigma * grad);
  if (v < -1e-10) throw std::invalid_argument("covariance is not positive semidefinite");
  return v < 0.0 ? 0.0 : v;
}

ConstraintRow surrogate_row(const PlaneBelief& belief, const Vec3& t, const MatX& j_t,
                            const VecX& qdot_prev, const ChanceParams& params,
                            const std::string& label) {
  ConstraintRow row =
      point_plane_vfi_row(t, j_t, belief.plane, params.d_safe, params.eta, label);
  const Vec4 grad = chance_gradient(j_t, qdot_prev, t, params.eta);
  const double sigma_f = std::sqrt(propagate_variance(grad, belief.covariance));
  row.bound -= std_normal_quantile(params.alpha) * sigma_f;
  row.kind = RowKind::ChanceSurrogate;
  return row;
}

ViolationRateResult monte_carlo_violation_rate(const Plane& mean, const Mat4& sigma,
                                               const Vec3& t, const MatX& j_t,
                                               const VecX& qdot, const ChanceParams& params,
                                               int n_samples, std::uint64_t seed) {
  if (n_samples < 10000) throw std::invalid_argument("need at least 1e4 samples");
  mean.validate();

  // Symmetric square root so that singular covariances sample correctly.
  Eigen::SelfAdjointEigenSolver<Mat4> es(sigma);
  if (es.eigenvalues().minCoeff() < -1e-10)
    throw std::invalid_argument("covariance is not positive semidefinite");
  const Mat4 root =
      es.eigenvectors() *
      es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
      es.eigenvectors().transpose();

  // f(pi) = c . pi with c = (J_t qdot + eta t, -eta).
  Vec4 c;
  c.head<3>() = j_t * qdot + params.eta * t;
  c(3) = -params.eta;
  Vec4 pi_mean;
  pi_mean << mean.normal, mean.offset;
  const double threshold = params.eta * params.d_safe;

  constexpr int kBlock = 4096;
  long satisfied = 0, satisfied_raw = 0;
  int drawn = 0;
  for (int block = 0; drawn < n_samples; ++block) {
    auto engine = make_engine(derive_seed(seed, "mc-plane", block));
    std::normal_distribution<double> gauss(0.0, 1.0);
    const int count = std::min(kBlock, n_samples - drawn);
    for (int i = 0; i < count; ++i) {
      Vec4 z;
      for (int k = 0; k < 4; ++k) z(k) = gauss(engine);
      const Vec4 pi = pi_mean + root * z;
      const double f_raw = c.dot(pi);
      if (f_raw >= threshold) ++satisfied_raw;
      const double norm = pi.head<3>().norm();
      if (norm > 1e-9 && f_raw / norm >= threshold) ++satisfied;
    }
    drawn += count;
  }

  ViolationRateResult r;
  r.fraction = static_cast<double>(satisfied) / n_samples;
  r.raw_fraction = static_cast<double>(satisfied_raw) / n_samples;
  r.samples = n_samples;
  return r;
}

}  // namespace svfi
