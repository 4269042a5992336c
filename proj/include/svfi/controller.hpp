#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "svfi/chance.hpp"
#include "svfi/kinematics.hpp"
#include "svfi/primitives.hpp"
#include "svfi/qp_solver.hpp"

namespace svfi {

struct ControllerConfig {
  double kappa = 6.0;
  double lambda_c = 1.2;    // joint-velocity damping
  double lambda_s = 5e3;    // slack penalty
  double eta = 1.0;
  double alpha = 0.7;
  double d_safe_base = 0.5;
  double d_safe_probe = 0.1;
  double line_clearance = 0.075;  // added to the pipe radius
  double rate_hz = 100.0;
  double base_box_margin = 0.0;   // workspace-box clearance for the base
  Vec3 workspace_min = Vec3::Zero();
  Vec3 workspace_max = Vec3::Constant(1.5);
  bool joint_position_rows = false;
  ActiveSetSolver::Options solver;
};

struct ControlTick {
  VecX u;      // commanded joint velocities (zero on an emergency stop)
  VecX slack;
  double error_norm = 0.0;
  SolveStatus status = SolveStatus::Optimal;
  bool emergency = false;
  int iterations = 0;
  double nonholonomic_residual = 0.0;
  double slack_norm = 0.0;
  double min_velocity_margin = 0.0;
  double min_box_margin = 0.0;
  // Aligned with row_labels(): NaN where a belief/row is absent.
  std::vector<double> distances;
  std::vector<double> margins;
};

// Builds and solves the per-tick velocity QP:
//   min |J qdot + kappa x_err|^2 + lambda_c |qdot|^2 + lambda_s |s|^2
// over [qdot; s] subject to the collected constraint rows. Keeps the
// previous command for the zero-order-hold chance buffers and warm-starts
// the solver across ticks.
class WholeBodyController {
 public:
  WholeBodyController(RobotModel model, ControllerConfig config, int n_pipes);

  // Quadratic objective over the stacked decision vector [qdot; s].
  static void build_objective(const MatX& jacobian, const VecX& x_err, double kappa,
                              double lambda_c, double lambda_s, int n_slack, MatX* h, VecX* g);

  // Emits, in a fixed order: chance-surrogate rows for each wall belief
  // (base center against near-vertical planes, probe against all), slack
  // point-line rows for each pipe x {probe, elbow}, paired slack joint
  // velocity rows, the nonholonomic equality, and hard workspace-box rows
  // for the base. Slack indices are assigned in emission order.
  std::vector<ConstraintRow> collect_constraints(
      const Configuration& q, const VecX& qdot_prev,
      const std::vector<std::optional<PlaneBelief>>& wall_beliefs,
      const std::vector<Line>& lines) const;

  ControlTick step(const Configuration& q, const TaskVector& target,
                   const std::vector<std::optional<PlaneBelief>>& wall_beliefs,
                   const std::vector<Line>& lines);

  // Forgets the previous command and the solver's warm start.
  void reset();

  const std::vector<std::string>& row_labels() const { return row_labels_; }
  const RobotModel& model() const { return model_; }
  const ControllerConfig& config() const { return cfg_; }
  const VecX& previous_command() const { return qdot_prev_; }

 private:
  RobotModel model_;
  ControllerConfig cfg_;
  int n_pipes_;
  std::vector<std::string> row_labels_;
  std::unordered_map<std::string, int> row_index_;
  ActiveSetSolver solver_;
  VecX qdot_prev_;
};

}  // namespace svfi
