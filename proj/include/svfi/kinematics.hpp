#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "svfi/types.hpp"

namespace svfi {

// Configuration of the mobile manipulator: planar base pose (x, y, phi)
// followed by the arm joint angles. phi is kept in (-pi, pi].
struct Configuration {
  Eigen::Vector3d base = Eigen::Vector3d::Zero();  // x, y, phi
  VecX arm;

  int dim() const { return 3 + static_cast<int>(arm.size()); }

  VecX stacked() const {
    VecX q(dim());
    q.head<3>() = base;
    q.tail(arm.size()) = arm;
    return q;
  }

  static Configuration from_stacked(const VecX& q) {
    if (q.size() < 4) throw DimensionError("configuration needs at least one arm joint");
    Configuration c;
    c.base = q.head<3>();
    c.base.z() = wrap_angle(c.base.z());
    c.arm = q.tail(q.size() - 3);
    return c;
  }
};

// Task-space value: end-effector position and the unit axis the probe and
// camera point along.
struct TaskVector {
  Vec3 position = Vec3::Zero();
  Vec3 direction = Vec3::UnitX();

  VecX stacked() const {
    VecX x(6);
    x.head<3>() = position;
    x.tail<3>() = direction;
    return x;
  }
};

// One revolute joint: fixed translation from the parent frame, then a
// rotation by the joint angle about `axis` (unit, in the parent frame).
struct JointSpec {
  Vec3 origin = Vec3::Zero();
  Vec3 axis = Vec3::UnitZ();
  double min_angle = -2.9;
  double max_angle = 2.9;
  double velocity_limit = 1.0;
};

// Point rigidly attached to the chain. link 0 is the base frame; link k
// (1..n_arm) is the frame after joint k.
struct AttachmentSpec {
  int link = 0;
  Vec3 offset = Vec3::Zero();
};

struct BaseSpec {
  double height = 0.15;             // z of the base-center attachment
  double forward_velocity_limit = 0.4;
  double yaw_rate_limit = 1.0;
};

struct RobotModel {
  BaseSpec base;
  Eigen::Isometry3d mount = Eigen::Isometry3d::Identity();  // base frame -> arm root
  std::vector<JointSpec> joints;
  Vec3 ee_offset = Vec3::Zero();    // probe tip in the last joint frame
  Vec3 ee_axis = Vec3::UnitZ();     // probe/camera axis in the last joint frame
  std::map<std::string, AttachmentSpec> attachments;  // base_center, probe, elbow

  int arm_dof() const { return static_cast<int>(joints.size()); }
  int dof() const { return 3 + arm_dof(); }

  // Throws if the model is structurally invalid (no joints, non-unit axes,
  // missing attachments, inverted joint limits).
  void validate() const;
};

// World-frame pose of every link, cached for Jacobian assembly.
struct FrameChain {
  Eigen::Isometry3d base;
  std::vector<Eigen::Isometry3d> frames;  // frame after joint i
  std::vector<Vec3> joint_points;         // world point on axis i
  std::vector<Vec3> joint_axes;           // world axis i (unit)
};

FrameChain compute_frames(const RobotModel& model, const Configuration& q);

TaskVector forward_kinematics(const RobotModel& model, const Configuration& q);

// 6 x n Jacobian of the task vector: rows 0..2 map qdot to the velocity of
// the end-effector point, rows 3..5 to the rate of change of the direction
// axis (d/dt n = -skew(n) * J_omega * qdot).
MatX task_jacobian(const RobotModel& model, const Configuration& q);

// World position of a named attachment and the 3 x n Jacobian of that point.
std::pair<Vec3, MatX> point_jacobian(const RobotModel& model, const Configuration& q,
                                     const std::string& attachment);

// Equality row (-sin phi) * xdot + (cos phi) * ydot = 0 forbidding lateral
// base velocity.
ConstraintRow nonholonomic_row(const Configuration& q);

}  // namespace svfi
