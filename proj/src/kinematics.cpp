#include "svfi/kinematics.hpp"

#include <cmath>

namespace svfi {

void RobotModel::validate() const {
  if (joints.empty()) throw DimensionError("robot model needs at least one arm joint");
  for (const auto& j : joints) {
    if (std::abs(j.axis.norm() - 1.0) > 1e-9)
      throw std::invalid_argument("joint axis must be a unit vector");
    if (!(j.min_angle < j.max_angle))
      throw std::invalid_argument("joint limits inverted");
    if (!(j.velocity_limit > 0.0))
      throw std::invalid_argument("joint velocity limit must be positive");
  }
  if (std::abs(ee_axis.norm() - 1.0) > 1e-9)
    throw std::invalid_argument("ee axis must be a unit vector");
  for (const char* name : {"base_center", "probe", "elbow"}) {
    auto it = attachments.find(name);
    if (it == attachments.end())
      throw std::invalid_argument(std::string("missing attachment: ") + name);
    if (it->second.link < 0 || it->second.link > arm_dof())
      throw std::invalid_argument(std::string("attachment link out of range: ") + name);
  }
  if (!(base.forward_velocity_limit > 0.0) || !(base.yaw_rate_limit > 0.0))
    throw std::invalid_argument("base velocity limits must be positive");
}

FrameChain compute_frames(const RobotModel& model, const Configuration& q) {
  if (q.arm.size() != model.arm_dof())
    throw DimensionError("configuration arm dimension does not match model");
  FrameChain c;
  c.base = Eigen::Isometry3d::Identity();
  c.base.translate(Vec3(q.base.x(), q.base.y(), 0.0));
  c.base.rotate(Eigen::AngleAxisd(q.base.z(), Vec3::UnitZ()));

  Eigen::Isometry3d t = c.base * model.mount;
  c.frames.reserve(model.joints.size());
  c.joint_points.reserve(model.joints.size());
  c.joint_axes.reserve(model.joints.size());
  for (int i = 0; i < model.arm_dof(); ++i) {
    const JointSpec& j = model.joints[i];
    t.translate(j.origin);
    c.joint_points.push_back(t.translation());
    c.joint_axes.push_back(t.rotation() * j.axis);
    t.rotate(Eigen::AngleAxisd(q.arm[i], j.axis));
    c.frames.push_back(t);
  }
  return c;
}

TaskVector forward_kinematics(const RobotModel& model, const Configuration& q) {
  FrameChain c = compute_frames(model, q);
  TaskVector x;
  const Eigen::Isometry3d& last = c.frames.back();
  x.position = last * model.ee_offset;
  x.direction = (last.rotation() * model.ee_axis).normalized();
  return x;
}

namespace {

// 3 x n Jacobian of a world point p attached after `links` arm joints.
MatX point_jacobian_impl(const RobotModel& model, const Configuration& q,
                         const FrameChain& c, const Vec3& p, int links) {
  const int n = model.dof();
  MatX jac = MatX::Zero(3, n);
  jac(0, 0) = 1.0;
  jac(1, 1) = 1.0;
  const Vec3 base_origin(q.base.x(), q.base.y(), 0.0);
  jac.col(2) = Vec3::UnitZ().cross(p - base_origin);
  for (int i = 0; i < links; ++i)
    jac.col(3 + i) = c.joint_axes[i].cross(p - c.joint_points[i]);
  return jac;
}

// 3 x n angular-velocity Jacobian of the last frame.
MatX angular_jacobian(const RobotModel& model, const FrameChain& c) {
  const int n = model.dof();
  MatX jw = MatX::Zero(3, n);
  jw.col(2) = Vec3::UnitZ();
  for (int i = 0; i < model.arm_dof(); ++i) jw.col(3 + i) = c.joint_axes[i];
  return jw;
}

}  // namespace

MatX task_jacobian(const RobotModel& model, const Configuration& q) {
  FrameChain c = compute_frames(model, q);
  const Eigen::Isometry3d& last = c.frames.back();
  const Vec3 p = last * model.ee_offset;
  const Vec3 n_e = (last.rotation() * model.ee_axis).normalized();

  MatX jac(6, model.dof());
  jac.topRows<3>() = point_jacobian_impl(model, q, c, p, model.arm_dof());
  jac.bottomRows<3>() = -skew(n_e) * angular_jacobian(model, c);
  return jac;
}

std::pair<Vec3, MatX> point_jacobian(const RobotModel& model, const Configuration& q,
                                     const std::string& attachment) {
  auto it = model.attachments.find(attachment);
  if (it == model.attachments.end())
    throw std::invalid_argument("unknown attachment: " + attachment);
  const AttachmentSpec& att = it->second;
  FrameChain c = compute_frames(model, q);
  const Eigen::Isometry3d frame = att.link == 0 ? c.base : c.frames[att.link - 1];
  const Vec3 p = frame * att.offset;
  return {p, point_jacobian_impl(model, q, c, p, att.link)};
}

ConstraintRow nonholonomic_row(const Configuration& q) {
  ConstraintRow row;
  row.coeffs = RowVecX::Zero(q.dim());
  row.coeffs(0) = -std::sin(q.base.z());
  row.coeffs(1) = std::cos(q.base.z());
  row.bound = 0.0;
  row.kind = RowKind::Equality;
  row.label = "nonholonomic";
  return row;
}

}  // namespace svfi
