#pragma once

#include <string>

#include "svfi/types.hpp"

namespace svfi {

// Plane { x : normal . x = offset } with unit normal.
struct Plane {
  Vec3 normal = Vec3::UnitZ();
  double offset = 0.0;

  void validate() const {
    if (std::abs(normal.norm() - 1.0) > 1e-9)
      throw std::invalid_argument("plane normal must be a unit vector");
  }
};

// Infinite line with a tube radius (pipe axis).
struct Line {
  Vec3 point = Vec3::Zero();
  Vec3 direction = Vec3::UnitX();
  double radius = 0.0;

  void validate() const {
    if (std::abs(direction.norm() - 1.0) > 1e-9)
      throw std::invalid_argument("line direction must be a unit vector");
    if (radius < 0.0) throw std::invalid_argument("line radius must be non-negative");
  }
};

// Signed distance of a point to a plane, positive on the normal side.
double point_plane_distance(const Vec3& t, const Plane& plane);

// Velocity-damper row for a point/plane pair:
//   -n^T J_t qdot <= eta * (d - d_safe)
// which keeps the approach rate bounded so d >= d_safe is invariant.
ConstraintRow point_plane_vfi_row(const Vec3& t, const MatX& j_t, const Plane& plane,
                                  double d_safe, double eta, const std::string& label);

// Distance of a point to the line axis (not to the tube surface).
double point_line_distance(const Vec3& t, const Line& line);

// Velocity-damper row for a point/line pair; slack-eligible. Throws
// SingularDistanceError when the point lies on the axis (gradient undefined).
ConstraintRow point_line_vfi_row(const Vec3& t, const MatX& j_t, const Line& line,
                                 double d_safe, double eta, const std::string& label);

}  // namespace svfi
