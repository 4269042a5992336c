#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>

namespace svfi {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using VecX = Eigen::VectorXd;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using MatX = Eigen::MatrixXd;
using RowVecX = Eigen::RowVectorXd;

inline Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
  double w = std::remainder(a, 2.0 * M_PI);
  if (w <= -M_PI) w += 2.0 * M_PI;
  return w;
}

// Entropy of a Bernoulli variable in nats. p must lie strictly inside (0, 1).
inline double bernoulli_entropy(double p) {
  return -p * std::log(p) - (1.0 - p) * std::log(1.0 - p);
}

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct SingularDistanceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RankDeficiencyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoConsensusError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class RowKind { HardInequality, SlackInequality, Equality, ChanceSurrogate };

// One scalar constraint on the joint-velocity vector, in the canonical form
//   coeffs * qdot <= bound   (or == for Equality rows).
// Rows of kind SlackInequality are relaxed as coeffs * qdot - s_k <= bound,
// where s_k is the slack variable named by slack_index; slack_index is -1
// for every other kind.
struct ConstraintRow {
  RowVecX coeffs;
  double bound = 0.0;
  RowKind kind = RowKind::HardInequality;
  std::string label;
  int slack_index = -1;
};

}  // namespace svfi
