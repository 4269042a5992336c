#include "svfi/controller.hpp"

#include <cmath>
#include <limits>

namespace svfi {
namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// The base center has no vertical mobility, so a row against a
// near-horizontal plane would have all-zero coefficients and turn
// structurally infeasible whenever the nominal margin goes negative.
// Only near-vertical planes constrain the base.
bool constrains_base(const Plane& plane) { return std::abs(plane.normal.z()) <= 0.5; }

}  // namespace

WholeBodyController::WholeBodyController(RobotModel model, ControllerConfig config, int n_pipes)
    : model_(std::move(model)), cfg_(config), n_pipes_(n_pipes) {
  model_.validate();
  for (int w = 0; w < 6; ++w) {
    row_labels_.push_back("chance:wall" + std::to_string(w) + ":base");
    row_labels_.push_back("chance:wall" + std::to_string(w) + ":probe");
  }
  for (int p = 0; p < n_pipes_; ++p) {
    row_labels_.push_back("line:pipe" + std::to_string(p) + ":probe");
    row_labels_.push_back("line:pipe" + std::to_string(p) + ":elbow");
  }
  for (size_t i = 0; i < row_labels_.size(); ++i) row_index_[row_labels_[i]] = static_cast<int>(i);
  solver_ = ActiveSetSolver(cfg_.solver);
  qdot_prev_ = VecX::Zero(model_.dof());
}

void WholeBodyController::build_objective(const MatX& jacobian, const VecX& x_err, double kappa,
                                          double lambda_c, double lambda_s, int n_slack, MatX* h,
                                          VecX* g) {
  const int n = static_cast<int>(jacobian.cols());
  const int dim = n + n_slack;
  h->setZero(dim, dim);
  h->topLeftCorner(n, n) =
      2.0 * (jacobian.transpose() * jacobian + lambda_c * MatX::Identity(n, n));
  h->bottomRightCorner(n_slack, n_slack) = 2.0 * lambda_s * MatX::Identity(n_slack, n_slack);
  g->setZero(dim);
  g->head(n) = 2.0 * kappa * jacobian.transpose() * x_err;
}

std::vector<ConstraintRow> WholeBodyController::collect_constraints(
    const Configuration& q, const VecX& qdot_prev,
    const std::vector<std::optional<PlaneBelief>>& wall_beliefs,
    const std::vector<Line>& lines) const {
  const int n = model_.dof();
  std::vector<ConstraintRow> rows;

  const auto [base_pt, base_jac] = point_jacobian(model_, q, "base_center");
  const auto [probe_pt, probe_jac] = point_jacobian(model_, q, "probe");
  const auto [elbow_pt, elbow_jac] = point_jacobian(model_, q, "elbow");

  for (size_t w = 0; w < wall_beliefs.size(); ++w) {
    if (!wall_beliefs[w]) continue;
    const PlaneBelief& belief = *wall_beliefs[w];
    const std::string tag = "chance:wall" + std::to_string(w);
    if (constrains_base(belief.plane)) {
      ChanceParams params{cfg_.alpha, cfg_.eta, cfg_.d_safe_base};
      rows.push_back(
          surrogate_row(belief, base_pt, base_jac, qdot_prev, params, tag + ":base"));
    }
    ChanceParams params{cfg_.alpha, cfg_.eta, cfg_.d_safe_probe};
    rows.push_back(
        surrogate_row(belief, probe_pt, probe_jac, qdot_prev, params, tag + ":probe"));
  }

  for (size_t p = 0; p < lines.size(); ++p) {
    const double d_safe = lines[p].radius + cfg_.line_clearance;
    const std::string tag = "line:pipe" + std::to_string(p);
    rows.push_back(point_line_vfi_row(probe_pt, probe_jac, lines[p], d_safe, cfg_.eta,
                                      tag + ":probe"));
    rows.push_back(point_line_vfi_row(elbow_pt, elbow_jac, lines[p], d_safe, cfg_.eta,
                                      tag + ":elbow"));
  }

  auto slack_limit = [&rows](const RowVecX& coeffs, double bound, const std::string& label) {
    ConstraintRow row;
    row.coeffs = coeffs;
    row.bound = bound;
    row.kind = RowKind::SlackInequality;
    row.label = label + ":pos";
    rows.push_back(row);
    row.coeffs = -coeffs;
    row.label = label + ":neg";
    rows.push_back(row);
  };

  RowVecX fwd = RowVecX::Zero(n);
  fwd(0) = std::cos(q.base.z());
  fwd(1) = std::sin(q.base.z());
  slack_limit(fwd, model_.base.forward_velocity_limit, "vel:fwd");
  RowVecX yaw = RowVecX::Zero(n);
  yaw(2) = 1.0;
  slack_limit(yaw, model_.base.yaw_rate_limit, "vel:yaw");
  for (int j = 0; j < model_.arm_dof(); ++j) {
    RowVecX e = RowVecX::Zero(n);
    e(3 + j) = 1.0;
    slack_limit(e, model_.joints[j].velocity_limit, "vel:arm" + std::to_string(j));
  }

  rows.push_back(nonholonomic_row(q));

  if (cfg_.joint_position_rows) {
    for (int j = 0; j < model_.arm_dof(); ++j) {
      RowVecX e = RowVecX::Zero(n);
      e(3 + j) = 1.0;
      ConstraintRow upper;
      upper.coeffs = e;
      upper.bound = cfg_.eta * (model_.joints[j].max_angle - q.arm(j));
      upper.kind = RowKind::HardInequality;
      upper.label = "pos:arm" + std::to_string(j) + ":max";
      rows.push_back(upper);
      ConstraintRow lower;
      lower.coeffs = -e;
      lower.bound = cfg_.eta * (q.arm(j) - model_.joints[j].min_angle);
      lower.kind = RowKind::HardInequality;
      lower.label = "pos:arm" + std::to_string(j) + ":min";
      rows.push_back(lower);
    }
  }

  const Vec3& lo = cfg_.workspace_min;
  const Vec3& hi = cfg_.workspace_max;
  const Plane box_planes[4] = {
      Plane{Vec3(1, 0, 0), lo.x()},
      Plane{Vec3(-1, 0, 0), -hi.x()},
      Plane{Vec3(0, 1, 0), lo.y()},
      Plane{Vec3(0, -1, 0), -hi.y()},
  };
  const char* box_names[4] = {"box:xmin", "box:xmax", "box:ymin", "box:ymax"};
  for (int k = 0; k < 4; ++k) {
    rows.push_back(point_plane_vfi_row(base_pt, base_jac, box_planes[k], cfg_.base_box_margin,
                                       cfg_.eta, box_names[k]));
  }

  int slack_index = 0;
  for (ConstraintRow& row : rows) {
    if (row.kind == RowKind::SlackInequality) row.slack_index = slack_index++;
  }
  return rows;
}

ControlTick WholeBodyController::step(const Configuration& q, const TaskVector& target,
                                      const std::vector<std::optional<PlaneBelief>>& wall_beliefs,
                                      const std::vector<Line>& lines) {
  const int n = model_.dof();
  ControlTick tick;
  tick.distances.assign(row_labels_.size(), kNan);
  tick.margins.assign(row_labels_.size(), kNan);

  const TaskVector x = forward_kinematics(model_, q);
  VecX x_err(6);
  x_err << x.position - target.position, x.direction - target.direction;
  tick.error_norm = x_err.norm();

  const MatX jac = task_jacobian(model_, q);
  std::vector<ConstraintRow> rows = collect_constraints(q, qdot_prev_, wall_beliefs, lines);
  int n_slack = 0;
  for (const ConstraintRow& row : rows)
    if (row.kind == RowKind::SlackInequality) ++n_slack;

  QProblem qp;
  build_objective(jac, x_err, cfg_.kappa, cfg_.lambda_c, cfg_.lambda_s, n_slack, &qp.H, &qp.g);
  const int dim = n + n_slack;
  int n_eq = 0;
  int n_in = 0;
  for (const ConstraintRow& row : rows) (row.kind == RowKind::Equality ? n_eq : n_in)++;
  qp.A_eq.setZero(n_eq, dim);
  qp.b_eq.setZero(n_eq);
  qp.A_in.setZero(n_in, dim);
  qp.b_in.setZero(n_in);
  int ie = 0;
  int ii = 0;
  for (const ConstraintRow& row : rows) {
    if (row.kind == RowKind::Equality) {
      qp.A_eq.row(ie).head(n) = row.coeffs;
      qp.b_eq(ie) = row.bound;
      ++ie;
    } else {
      qp.A_in.row(ii).head(n) = row.coeffs;
      if (row.slack_index >= 0) qp.A_in(ii, n + row.slack_index) = -1.0;
      qp.b_in(ii) = row.bound;
      ++ii;
    }
  }

  QPSolution sol = solver_.solve(qp);
  tick.status = sol.status;
  tick.iterations = sol.iterations;
  if (sol.status != SolveStatus::Optimal) {
    tick.emergency = true;
    tick.u = VecX::Zero(n);
    tick.slack = VecX::Zero(n_slack);
  } else {
    tick.u = sol.x.head(n);
    tick.slack = sol.x.tail(n_slack);
  }
  tick.slack_norm = tick.slack.norm();

  tick.min_velocity_margin = std::numeric_limits<double>::infinity();
  tick.min_box_margin = std::numeric_limits<double>::infinity();
  for (const ConstraintRow& row : rows) {
    const double along = row.coeffs.dot(tick.u);
    if (row.kind == RowKind::Equality) {
      tick.nonholonomic_residual = std::abs(along - row.bound);
      continue;
    }
    double margin = row.bound - along;
    if (row.slack_index >= 0) margin += tick.slack(row.slack_index);
    auto it = row_index_.find(row.label);
    if (it != row_index_.end()) {
      tick.margins[it->second] = margin;
    } else if (row.label.rfind("vel:", 0) == 0) {
      tick.min_velocity_margin = std::min(tick.min_velocity_margin, margin);
    } else if (row.label.rfind("box:", 0) == 0) {
      tick.min_box_margin = std::min(tick.min_box_margin, margin);
    }
  }

  const Vec3 base_pt = point_jacobian(model_, q, "base_center").first;
  const Vec3 probe_pt = point_jacobian(model_, q, "probe").first;
  const Vec3 elbow_pt = point_jacobian(model_, q, "elbow").first;
  for (size_t w = 0; w < wall_beliefs.size() && w < 6; ++w) {
    if (!wall_beliefs[w]) continue;
    const Plane& plane = wall_beliefs[w]->plane;
    tick.distances[row_index_.at("chance:wall" + std::to_string(w) + ":base")] =
        point_plane_distance(base_pt, plane);
    tick.distances[row_index_.at("chance:wall" + std::to_string(w) + ":probe")] =
        point_plane_distance(probe_pt, plane);
  }
  for (size_t p = 0; p < lines.size() && static_cast<int>(p) < n_pipes_; ++p) {
    tick.distances[row_index_.at("line:pipe" + std::to_string(p) + ":probe")] =
        point_line_distance(probe_pt, lines[p]);
    tick.distances[row_index_.at("line:pipe" + std::to_string(p) + ":elbow")] =
        point_line_distance(elbow_pt, lines[p]);
  }

  qdot_prev_ = tick.u;
  return tick;
}

void WholeBodyController::reset() {
  qdot_prev_ = VecX::Zero(model_.dof());
  solver_.reset_warm_start();
}

}  // namespace svfi
