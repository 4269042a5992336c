#include "svfi/primitives.hpp"

namespace svfi {

double point_plane_distance(const Vec3& t, const Plane& plane) {
  return plane.normal.dot(t) - plane.offset;
}

ConstraintRow point_plane_vfi_row(const Vec3& t, const MatX& j_t, const Plane& plane,
                                  double d_safe, double eta, const std::string& label) {
  if (j_t.rows() != 3) throw DimensionError("point Jacobian must have 3 rows");
  plane.validate();
  ConstraintRow row;
  row.coeffs = -(plane.normal.transpose() * j_t);
  row.bound = eta * (point_plane_distance(t, plane) - d_safe);
  row.kind = RowKind::HardInequality;
  row.label = label;
  return row;
}

double point_line_distance(const Vec3& t, const Line& line) {
  const Vec3 r = t - line.point;
  return (r - r.dot(line.direction) * line.direction).norm();
}

ConstraintRow point_line_vfi_row(const Vec3& t, const MatX& j_t, const Line& line,
                                 double d_safe, double eta, const std::string& label) {
  if (j_t.rows() != 3) throw DimensionError("point Jacobian must have 3 rows");
  line.validate();
  const Vec3 r = t - line.point;
  const Vec3 r_perp = r - r.dot(line.direction) * line.direction;
  const double d = r_perp.norm();
  if (d < 1e-12)
    throw SingularDistanceError("point lies on the line axis; distance gradient undefined");
  // d/dq d = (r_perp / d)^T J_t
  ConstraintRow row;
  row.coeffs = -((r_perp / d).transpose() * j_t);
  row.bound = eta * (d - d_safe);
  row.kind = RowKind::SlackInequality;
  row.label = label;
  return row;
}

}  // namespace svfi
