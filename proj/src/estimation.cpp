#include "svfi/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "svfi/rng.hpp"

namespace svfi {

namespace {

constexpr double kVarianceFloor = 1e-10;

void canonicalize(Vec3& n, double& d) {
  bool flip = false;
  if (d < 0.0) {
    flip = true;
  } else if (d == 0.0) {
    for (int i = 0; i < 3; ++i) {
      if (std::abs(n(i)) > 1e-12) {
        flip = n(i) < 0.0;
        break;
      }
    }
  }
  if (flip) {
    n = -n;
    d = -d;
  }
}

}  // namespace

void PlaneAccumulator::add(const PointSample& sample) {
  if (!(sample.noise_std > 0.0)) throw std::invalid_argument("noise std must be positive");
  const double w = 1.0 / (sample.noise_std * sample.noise_std);
  Vec4 a;
  a << sample.position, -1.0;
  moments += w * a * a.transpose();
  ++count;
}

PlaneBelief fit_plane(const PlaneAccumulator& acc, int min_points) {
  if (acc.count < min_points) throw std::invalid_argument("too few points for plane fit");

  const double w_sum = acc.moments(3, 3);
  const Vec3 centroid = -acc.moments.block<3, 1>(0, 3) / w_sum;
  const Mat3 scatter =
      acc.moments.block<3, 3>(0, 0) - w_sum * centroid * centroid.transpose();

  Eigen::SelfAdjointEigenSolver<Mat3> es(scatter);
  const Vec3 evals = es.eigenvalues();  // ascending
  if (evals(1) <= 1e-12 * std::max(evals(2), 1.0))
    throw RankDeficiencyError("points are collinear; plane normal undefined");

  Vec3 normal = es.eigenvectors().col(0).normalized();
  double offset = normal.dot(centroid);
  canonicalize(normal, offset);

  // Laplace approximation of E = sum w_i (n.p_i - d)^2 / 2 on the manifold
  // |n| = 1: Hessian in tangent coordinates (two in-plane directions for n,
  // one for d), inverted and scaled by the unit-weight residual variance.
  // Hessian and residual sum are both quadratic forms in (p, -1), so the
  // accumulated moments carry them exactly.
  Eigen::Matrix<double, 3, 2> basis;
  {
    const Vec3 ref = std::abs(normal.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    basis.col(0) = normal.cross(ref).normalized();
    basis.col(1) = normal.cross(basis.col(0)).normalized();
  }
  Eigen::Matrix<double, 4, 3> lift = Eigen::Matrix<double, 4, 3>::Zero();
  lift.block<3, 2>(0, 0) = basis;
  lift(3, 2) = 1.0;

  const Mat3 hess = lift.transpose() * acc.moments * lift;
  Vec4 plane_vec;
  plane_vec << normal, offset;
  const double rss = std::max(0.0, plane_vec.dot(acc.moments * plane_vec));
  const double residual_var = rss / std::max(1, acc.count - 3);
  Mat4 cov = lift * (residual_var * hess.inverse()) * lift.transpose();
  cov = 0.5 * (cov + cov.transpose()).eval();
  for (int i = 0; i < 4; ++i)
    if (cov(i, i) < kVarianceFloor) cov(i, i) = kVarianceFloor;

  PlaneBelief belief;
  belief.plane.normal = normal;
  belief.plane.offset = offset;
  belief.covariance = cov;
  return belief;
}

PlaneBelief fit_plane(std::span<const PointSample> points, int min_points) {
  if (static_cast<int>(points.size()) < min_points)
    throw std::invalid_argument("too few points for plane fit");
  PlaneAccumulator acc;
  for (const auto& s : points) acc.add(s);
  return fit_plane(acc, min_points);
}

PlaneBelief robust_fit_plane(std::span<const PointSample> points, double inlier_threshold,
                             int iterations, std::uint64_t seed, int min_points) {
  const int n_pts = static_cast<int>(points.size());
  if (n_pts < 3) throw std::invalid_argument("too few points for RANSAC");
  if (!(inlier_threshold > 0.0)) throw std::invalid_argument("inlier threshold must be positive");

  auto engine = make_engine(derive_seed(seed, "ransac"));
  std::uniform_int_distribution<int> pick(0, n_pts - 1);

  int best_count = -1;
  Vec3 best_n = Vec3::UnitZ();
  double best_d = 0.0;
  for (int it = 0; it < iterations; ++it) {
    int ia = pick(engine), ib = pick(engine), ic = pick(engine);
    if (ia == ib || ib == ic || ia == ic) continue;
    const Vec3& a = points[ia].position;
    const Vec3 ab = points[ib].position - a;
    const Vec3 ac = points[ic].position - a;
    Vec3 n = ab.cross(ac);
    const double norm = n.norm();
    if (norm < 1e-12) continue;
    n /= norm;
    const double d = n.dot(a);
    int count = 0;
    for (const auto& s : points)
      if (std::abs(n.dot(s.position) - d) <= inlier_threshold) ++count;
    if (count > best_count) {
      best_count = count;
      best_n = n;
      best_d = d;
    }
  }
  if (best_count < min_points)
    throw NoConsensusError("RANSAC consensus below the minimum point count");

  std::vector<PointSample> inliers;
  inliers.reserve(best_count);
  for (const auto& s : points)
    if (std::abs(best_n.dot(s.position) - best_d) <= inlier_threshold) inliers.push_back(s);
  return fit_plane(inliers, min_points);
}

}  // namespace svfi
