#pragma once

#include <cstdint>
#include <span>

#include "svfi/chance.hpp"
#include "svfi/types.hpp"

namespace svfi {

struct PointSample {
  Vec3 position = Vec3::Zero();
  double noise_std = 1.0;  // assumed isotropic measurement noise
};

// Running sufficient statistics for a weighted plane fit: with a = (p, -1)
// and w = 1/noise_std^2, `moments` is sum of w a a^T. Everything the fit
// needs (centroid, scatter, Hessian, residual) is linear in these, so
// points never have to be retained and the fit cost stays constant as the
// sample count grows.
struct PlaneAccumulator {
  Mat4 moments = Mat4::Zero();
  int count = 0;

  void add(const PointSample& sample);
};

// Least-squares plane fit. The normal is the smallest-eigenvalue direction
// of the weighted scatter matrix, the offset is n . centroid, and the sign
// is canonicalized so offset >= 0 (first nonzero normal component positive
// when the offset vanishes). The covariance is the Laplace approximation of
// the least-squares cost: the inverse Hessian restricted to the unit-normal
// manifold, scaled by the residual variance, with a 1e-10 floor on each
// diagonal entry. Throws when fewer than min_points samples are given or
// the points are degenerate (collinear).
PlaneBelief fit_plane(std::span<const PointSample> points, int min_points = 10);

// Same fit evaluated from running statistics instead of retained points.
PlaneBelief fit_plane(const PlaneAccumulator& acc, int min_points = 10);

// RANSAC wrapper: samples 3-point planes, keeps the largest consensus set,
// refits with fit_plane on the inliers. Deterministic given the seed.
// Throws NoConsensusError when the best consensus is below min_points.
PlaneBelief robust_fit_plane(std::span<const PointSample> points, double inlier_threshold,
                             int iterations, std::uint64_t seed, int min_points = 10);

}  // namespace svfi
