#include "svfi/validation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "svfi/chance.hpp"
#include "svfi/kinematics.hpp"
#include "svfi/primitives.hpp"
#include "svfi/rng.hpp"

namespace svfi::validation {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

// Prefix integrals of the standard normal density from -12 in steps of
// kPanel, each panel integrated by Simpson's rule. The mass below -12
// (~1.8e-33) is dropped; it is far below the accuracy of interest.
constexpr double kCdfLo = -12.0;
constexpr double kCdfHi = 12.0;
constexpr double kPanel = 1e-3;

const std::vector<double>& cdf_prefix_table() {
  static const std::vector<double> table = [] {
    const int n = static_cast<int>(std::llround((kCdfHi - kCdfLo) / kPanel));
    std::vector<double> t(n + 1);
    t[0] = 0.0;
    for (int i = 0; i < n; ++i) {
      const double a = kCdfLo + i * kPanel;
      const double b = a + kPanel;
      t[i + 1] =
          t[i] + (kPanel / 6.0) * (normal_pdf(a) + 4.0 * normal_pdf(0.5 * (a + b)) + normal_pdf(b));
    }
    return t;
  }();
  return table;
}

std::string fmt(const char* format, double a, double b = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), format, a, b);
  return buf;
}

}  // namespace

double simpson_normal_cdf(double z) {
  if (z <= kCdfLo) return 0.0;
  if (z >= kCdfHi) return 1.0;
  const std::vector<double>& table = cdf_prefix_table();
  int i = static_cast<int>(std::floor((z - kCdfLo) / kPanel));
  i = std::min(i, static_cast<int>(table.size()) - 2);
  const double a = kCdfLo + i * kPanel;
  const double w = z - a;
  const double partial =
      (w / 6.0) * (normal_pdf(a) + 4.0 * normal_pdf(a + 0.5 * w) + normal_pdf(z));
  return table[i] + partial;
}

double quantile_oracle(double alpha) {
  if (!(alpha > 0.0) || !(alpha < 1.0))
    throw std::domain_error("quantile oracle requires alpha in (0, 1)");
  double lo = kCdfLo;
  double hi = kCdfHi;
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (simpson_normal_cdf(mid) < alpha)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

MatX numeric_task_jacobian(const RobotModel& model, const Configuration& q, double h) {
  const VecX q0 = q.stacked();
  MatX jac(6, q0.size());
  for (int j = 0; j < q0.size(); ++j) {
    VecX qp = q0;
    VecX qm = q0;
    qp(j) += h;
    qm(j) -= h;
    const TaskVector fp = forward_kinematics(model, Configuration::from_stacked(qp));
    const TaskVector fm = forward_kinematics(model, Configuration::from_stacked(qm));
    jac.col(j) = (fp.stacked() - fm.stacked()) / (2.0 * h);
  }
  return jac;
}

MatX numeric_point_jacobian(const RobotModel& model, const Configuration& q,
                            const std::string& attachment, double h) {
  const VecX q0 = q.stacked();
  MatX jac(3, q0.size());
  for (int j = 0; j < q0.size(); ++j) {
    VecX qp = q0;
    VecX qm = q0;
    qp(j) += h;
    qm(j) -= h;
    const Vec3 tp = point_jacobian(model, Configuration::from_stacked(qp), attachment).first;
    const Vec3 tm = point_jacobian(model, Configuration::from_stacked(qm), attachment).first;
    jac.col(j) = (tp - tm) / (2.0 * h);
  }
  return jac;
}

RowVecX numeric_line_distance_gradient(const RobotModel& model, const Configuration& q,
                                       const std::string& attachment, const Line& line,
                                       double h) {
  const VecX q0 = q.stacked();
  RowVecX grad(q0.size());
  for (int j = 0; j < q0.size(); ++j) {
    VecX qp = q0;
    VecX qm = q0;
    qp(j) += h;
    qm(j) -= h;
    const double dp = point_line_distance(
        point_jacobian(model, Configuration::from_stacked(qp), attachment).first, line);
    const double dm = point_line_distance(
        point_jacobian(model, Configuration::from_stacked(qm), attachment).first, line);
    grad(j) = (dp - dm) / (2.0 * h);
  }
  return grad;
}

DualOracleResult projected_gradient_qp(const QProblem& problem, int max_iterations, double tol) {
  problem.validate();
  const int n = problem.dim();
  Eigen::LLT<MatX> llt(problem.H);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("dual oracle needs a positive definite H");

  // Every constraint folded into rows of a x <= b; equalities become a +-
  // pair so the multiplier cone stays lambda >= 0.
  std::vector<VecX> rows;
  std::vector<double> rhs;
  for (int k = 0; k < problem.A_eq.rows(); ++k) {
    rows.push_back(problem.A_eq.row(k).transpose());
    rhs.push_back(problem.b_eq(k));
    rows.push_back(-problem.A_eq.row(k).transpose());
    rhs.push_back(-problem.b_eq(k));
  }
  for (int k = 0; k < problem.A_in.rows(); ++k) {
    rows.push_back(problem.A_in.row(k).transpose());
    rhs.push_back(problem.b_in(k));
  }
  for (int k = 0; k < problem.lb.size(); ++k) {
    if (std::isfinite(problem.lb(k))) {
      VecX e = VecX::Zero(n);
      e(k) = -1.0;
      rows.push_back(e);
      rhs.push_back(-problem.lb(k));
    }
  }
  for (int k = 0; k < problem.ub.size(); ++k) {
    if (std::isfinite(problem.ub(k))) {
      VecX e = VecX::Zero(n);
      e(k) = 1.0;
      rows.push_back(e);
      rhs.push_back(problem.ub(k));
    }
  }
  const int m = static_cast<int>(rows.size());

  DualOracleResult result;
  if (m == 0) {
    result.x = -llt.solve(problem.g);
    result.objective = 0.5 * result.x.dot(problem.H * result.x) + problem.g.dot(result.x);
    result.converged = true;
    return result;
  }

  MatX a(m, n);
  VecX b(m);
  for (int k = 0; k < m; ++k) {
    a.row(k) = rows[k].transpose();
    b(k) = rhs[k];
  }

  // Lipschitz constant of the dual gradient: largest eigenvalue of
  // A H^-1 A^T.
  const MatX aht = llt.solve(a.transpose());
  const MatX gram = a * aht;
  Eigen::SelfAdjointEigenSolver<MatX> eig(gram);
  const double lip = std::max(eig.eigenvalues().maxCoeff(), 1e-12) * 1.0000001;

  const double b_scale = 1.0 + b.cwiseAbs().maxCoeff();

  // FISTA on the negated dual f(lambda) = 0.5 u^T H^-1 u + b^T lambda with
  // u = g + A^T lambda, grad f = b - A x(lambda), with gradient-based
  // adaptive restart.
  VecX lambda = VecX::Zero(m);
  VecX y = lambda;
  double momentum = 1.0;
  auto primal_of = [&](const VecX& mult) { return VecX(-llt.solve(problem.g + a.transpose() * mult)); };

  for (int it = 0; it < max_iterations; ++it) {
    const VecX x_y = primal_of(y);
    const VecX grad = b - a * x_y;
    const VecX next = (y - grad / lip).cwiseMax(0.0);
    const double momentum_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    if (grad.dot(next - lambda) > 0.0) {
      // Momentum is pointing uphill; restart it.
      y = next;
      momentum = 1.0;
    } else {
      y = next + ((momentum - 1.0) / momentum_next) * (next - lambda);
      momentum = momentum_next;
    }
    lambda = next;
    result.iterations = it + 1;

    if ((it + 1) % 50 == 0 || it + 1 == max_iterations) {
      const VecX x = primal_of(lambda);
      const double viol = (a * x - b).cwiseMax(0.0).maxCoeff();
      const double obj = 0.5 * x.dot(problem.H * x) + problem.g.dot(x);
      const double comp = std::abs(lambda.dot(b - a * x));
      if (viol <= tol * b_scale && comp <= tol * (1.0 + std::abs(obj))) {
        result.x = x;
        result.objective = obj;
        result.converged = true;
        return result;
      }
    }
  }
  result.x = primal_of(lambda);
  result.objective =
      0.5 * result.x.dot(problem.H * result.x) + problem.g.dot(result.x);
  result.converged = false;
  return result;
}

double kkt_residual(const QProblem& problem, const QPSolution& solution) {
  const int n = problem.dim();
  const VecX& x = solution.x;
  double worst = 0.0;
  auto track = [&worst](double v) { worst = std::max(worst, v); };

  // Stationarity: H x + g + A_in^T mu + A_eq^T nu - mu_lb + mu_ub = 0.
  VecX r = problem.H * x + problem.g;
  if (problem.A_in.rows() > 0) r += problem.A_in.transpose() * solution.in_duals;
  if (problem.A_eq.rows() > 0) r += problem.A_eq.transpose() * solution.eq_duals;
  if (problem.lb.size() == n) r -= solution.lb_duals;
  if (problem.ub.size() == n) r += solution.ub_duals;
  track(r.cwiseAbs().maxCoeff());

  if (problem.A_eq.rows() > 0)
    track((problem.A_eq * x - problem.b_eq).cwiseAbs().maxCoeff());
  if (problem.A_in.rows() > 0) {
    const VecX slack = problem.b_in - problem.A_in * x;
    track((-slack).maxCoeff());                                     // primal feasibility
    track((-solution.in_duals).maxCoeff());                         // dual feasibility
    track(solution.in_duals.cwiseProduct(slack).cwiseAbs().maxCoeff());  // complementarity
  }
  if (problem.lb.size() == n) {
    for (int k = 0; k < n; ++k) {
      if (!std::isfinite(problem.lb(k))) continue;
      const double slack = x(k) - problem.lb(k);
      track(-slack);
      track(-solution.lb_duals(k));
      track(std::abs(solution.lb_duals(k) * slack));
    }
  }
  if (problem.ub.size() == n) {
    for (int k = 0; k < n; ++k) {
      if (!std::isfinite(problem.ub(k))) continue;
      const double slack = problem.ub(k) - x(k);
      track(-slack);
      track(-solution.ub_duals(k));
      track(std::abs(solution.ub_duals(k) * slack));
    }
  }
  return worst;
}

namespace {

// Entry-ordered walk along one ray from sorted axis-crossing times, with
// midpoint classification of each slab interval. Visits every voxel the
// ray enters at a parameter t_enter <= max_range, never the origin voxel,
// and stops after the first occupied voxel; an occupied origin voxel
// short-circuits to just that voxel. Origins exactly on a voxel face are
// not handled (measure zero under the random sampling used here).
// Accumulates into *gain in visit order so the running sum associates the
// same way as the implementation's.
template <typename Info>
void walk_ray_info(const VoxelGrid& grid, const Vec3& origin, const Vec3& dir, double max_range,
                   const Info& info, double* gain) {
  const GridParams& p = grid.params();
  const int origin_index = grid.index_of(grid.voxel_of(origin));
  if (grid.state(origin_index) == VoxelState::Occupied) {
    *gain += info(origin_index);
    return;
  }

  const Vec3 local = origin - p.origin;
  double t_exit = kInf;
  for (int i = 0; i < 3; ++i) {
    if (dir(i) > 0.0)
      t_exit = std::min(t_exit, (p.dims(i) * p.resolution - local(i)) / dir(i));
    else if (dir(i) < 0.0)
      t_exit = std::min(t_exit, -local(i) / dir(i));
  }

  std::vector<double> crossings;
  for (int i = 0; i < 3; ++i) {
    if (dir(i) == 0.0) continue;
    for (int k = 0; k <= p.dims(i); ++k) {
      const double t = (k * p.resolution - local(i)) / dir(i);
      if (t > 0.0 && t < t_exit) crossings.push_back(t);
    }
  }
  std::sort(crossings.begin(), crossings.end());
  crossings.erase(std::unique(crossings.begin(), crossings.end()), crossings.end());

  for (size_t j = 0; j < crossings.size(); ++j) {
    const double t_enter = crossings[j];
    if (t_enter > max_range) break;
    const double t_end = (j + 1 < crossings.size()) ? crossings[j + 1] : t_exit;
    const Vec3 mid = origin + dir * (0.5 * (t_enter + t_end));
    if (!grid.contains(mid)) break;
    const int index = grid.index_of(grid.voxel_of(mid));
    *gain += info(index);
    if (grid.state(index) == VoxelState::Occupied) break;
  }
}

}  // namespace

double visual_gain_oracle(const VoxelGrid& grid, const Viewpoint& v,
                          const DepthSensorModel& model, std::uint64_t seed) {
  const std::vector<Vec3> rays = frustum_rays(model, v.direction, model.rays, seed);
  double gain = 0.0;
  for (const Vec3& d : rays) {
    walk_ray_info(
        grid, v.position, d, model.max_range,
        [&](int index) {
          return visual_voxel_info(grid.occupancy(index),
                                   grid.state(index) != VoxelState::Unknown);
        },
        &gain);
  }
  return gain;
}

double coverage_gain_oracle(const VoxelGrid& grid, const Viewpoint& v,
                            const ProbeSensorModel& model, double quantum, std::uint64_t seed) {
  const std::vector<Vec3> rays = sphere_rays(model.rays, seed);
  double gain = 0.0;
  for (const Vec3& d : rays) {
    walk_ray_info(
        grid, v.position, d, model.radius,
        [&](int index) { return coverage_voxel_info(grid.state(index), grid.covered(index), quantum); },
        &gain);
  }
  return gain;
}

VoxelGrid random_grid(const Eigen::Vector3i& dims, double resolution, std::uint64_t seed) {
  GridParams params;
  params.origin = Vec3::Zero();
  params.resolution = resolution;
  params.dims = dims;
  VoxelGrid grid(params);

  auto engine = make_engine(derive_seed(seed, "random-grid"));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < grid.size(); ++i) {
    const double u = unit(engine);
    if (u < 0.30) {
      if (unit(engine) < 0.15) grid.set_voxel(i, 0.0, false, false, true);
      continue;
    }
    if (u < 0.62) {
      const double lo = params.clamp_min + (std::log(0.3 / 0.7) - params.clamp_min) * unit(engine);
      grid.set_voxel(i, lo, true, unit(engine) < 0.3);
      continue;
    }
    if (u < 0.72) {
      // Observed but not confidently classified; state falls to the side
      // of even odds.
      const double lo = std::log(0.3 / 0.7) + (std::log(0.7 / 0.3) - std::log(0.3 / 0.7)) * unit(engine);
      grid.set_voxel(i, lo, true, unit(engine) < 0.2);
      continue;
    }
    const double lo = std::log(0.7 / 0.3) + (params.clamp_max - std::log(0.7 / 0.3)) * unit(engine);
    grid.set_voxel(i, lo, true, unit(engine) < 0.5);
  }
  return grid;
}

SuiteResult run_quantile_suite() {
  SuiteResult suite;
  suite.suite = "quantile";

  double worst_grid = 0.0;
  double worst_sym = 0.0;
  double worst_round = 0.0;
  for (int i = 1; i <= 999; ++i) {
    const double alpha = i / 1000.0;
    const double q = std_normal_quantile(alpha);
    worst_grid = std::max(worst_grid, std::abs(q - quantile_oracle(alpha)));
    worst_sym = std::max(worst_sym, std::abs(q + std_normal_quantile(1.0 - alpha)));
    worst_round = std::max(worst_round, std::abs(simpson_normal_cdf(q) - alpha));
  }
  suite.checks.push_back({"grid-999-vs-oracle", worst_grid <= 1e-9, worst_grid,
                          "max |quantile - oracle| over alpha = i/1000"});
  suite.checks.push_back(
      {"antisymmetry", worst_sym <= 1e-9, worst_sym, "max |q(a) + q(1-a)|"});
  const double median = std::abs(std_normal_quantile(0.5));
  suite.checks.push_back({"median-zero", median <= 1e-12, median, "|q(0.5)|"});
  suite.checks.push_back({"cdf-round-trip", worst_round <= 1e-9, worst_round,
                          "max |cdf(q(a)) - a| via the Simpson cdf"});
  return suite;
}

SuiteResult run_jacobian_suite(std::uint64_t seed) {
  SuiteResult suite;
  suite.suite = "jacobians";
  const RobotModel model = default_robot_model();
  const double h = 1e-6;
  const char* attachments[] = {"base_center", "elbow", "probe"};

  double worst_task = 0.0;
  double worst_point = 0.0;
  double worst_line = 0.0;
  for (int k = 0; k < 100; ++k) {
    auto engine = make_engine(derive_seed(seed, "jacobian-config", k));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Configuration q;
    q.base = Eigen::Vector3d(1.5 * unit(engine), 1.5 * unit(engine),
                             -M_PI + 2.0 * M_PI * unit(engine));
    q.arm.resize(model.arm_dof());
    for (int j = 0; j < model.arm_dof(); ++j) {
      const JointSpec& spec = model.joints[j];
      q.arm(j) = spec.min_angle + (spec.max_angle - spec.min_angle) * (0.05 + 0.9 * unit(engine));
    }

    const MatX task = task_jacobian(model, q);
    const MatX task_fd = numeric_task_jacobian(model, q, h);
    worst_task = std::max(worst_task, (task - task_fd).cwiseAbs().maxCoeff() /
                                          std::max(1.0, task_fd.cwiseAbs().maxCoeff()));

    for (const char* name : attachments) {
      const auto [point, jac] = point_jacobian(model, q, name);
      const MatX jac_fd = numeric_point_jacobian(model, q, name, h);
      worst_point = std::max(worst_point, (jac - jac_fd).cwiseAbs().maxCoeff() /
                                              std::max(1.0, jac_fd.cwiseAbs().maxCoeff()));
    }

    const auto [probe, probe_jac] = point_jacobian(model, q, "probe");
    std::normal_distribution<double> gauss(0.0, 1.0);
    Line line;
    line.radius = 0.03 + 0.03 * unit(engine);
    do {
      line.point = Vec3(1.5 * unit(engine), 1.5 * unit(engine), 1.5 * unit(engine));
      Vec3 d(gauss(engine), gauss(engine), gauss(engine));
      while (d.norm() < 1e-6) d = Vec3(gauss(engine), gauss(engine), gauss(engine));
      line.direction = d.normalized();
    } while (point_line_distance(probe, line) < 0.05);
    const ConstraintRow row = point_line_vfi_row(probe, probe_jac, line, 0.0, 1.0, "fd");
    const RowVecX grad_fd = numeric_line_distance_gradient(model, q, "probe", line, h);
    worst_line = std::max(worst_line, (-row.coeffs - grad_fd).cwiseAbs().maxCoeff() /
                                          std::max(1.0, grad_fd.cwiseAbs().maxCoeff()));
  }

  suite.checks.push_back({"task-jacobian-fd", worst_task <= 1e-5, worst_task,
                          "max relative error over 100 configurations"});
  suite.checks.push_back({"point-jacobian-fd", worst_point <= 1e-5, worst_point,
                          "max relative error, 3 attachments x 100 configurations"});
  suite.checks.push_back({"line-distance-gradient-fd", worst_line <= 1e-5, worst_line,
                          "max relative error over 100 random lines"});
  return suite;
}

SuiteResult run_qp_suite(std::uint64_t seed) {
  SuiteResult suite;
  suite.suite = "qp";

  int not_optimal = 0;
  int not_converged = 0;
  double worst_kkt = 0.0;
  double worst_obj = 0.0;
  for (int k = 0; k < 1000; ++k) {
    auto engine = make_engine(derive_seed(seed, "qp-problem", k));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const int n = 2 + static_cast<int>(unit(engine) * 7.0);
    const int m_in = static_cast<int>(unit(engine) * (2.0 * n + 1.0));
    const int m_eq = std::min(static_cast<int>(unit(engine) * 3.0), n - 1);

    MatX b_mat(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) b_mat(r, c) = 0.7 * gauss(engine);
    QProblem problem;
    problem.H = b_mat.transpose() * b_mat + (0.5 + unit(engine)) * MatX::Identity(n, n);
    problem.g = VecX::NullaryExpr(n, [&](Eigen::Index) { return 2.0 * gauss(engine); });

    VecX x_feas = VecX::NullaryExpr(n, [&](Eigen::Index) { return 0.5 * gauss(engine); });
    problem.A_in.resize(m_in, n);
    problem.b_in.resize(m_in);
    for (int r = 0; r < m_in; ++r) {
      for (int c = 0; c < n; ++c) problem.A_in(r, c) = gauss(engine);
      problem.b_in(r) = problem.A_in.row(r).dot(x_feas) + 0.8 * std::abs(gauss(engine));
    }
    problem.A_eq.resize(m_eq, n);
    problem.b_eq.resize(m_eq);
    for (int r = 0; r < m_eq; ++r) {
      for (int c = 0; c < n; ++c) problem.A_eq(r, c) = gauss(engine);
      problem.b_eq(r) = problem.A_eq.row(r).dot(x_feas);
    }
    if (unit(engine) < 0.5) {
      problem.lb.resize(n);
      problem.ub.resize(n);
      for (int c = 0; c < n; ++c) {
        problem.lb(c) = x_feas(c) - 0.1 - std::abs(gauss(engine));
        problem.ub(c) = x_feas(c) + 0.1 + std::abs(gauss(engine));
      }
    }

    ActiveSetSolver solver;
    const QPSolution sol = solver.solve(problem);
    if (sol.status != SolveStatus::Optimal) {
      ++not_optimal;
      continue;
    }
    worst_kkt = std::max(worst_kkt, kkt_residual(problem, sol));

    const DualOracleResult oracle = projected_gradient_qp(problem, 300000, 1e-10);
    if (!oracle.converged) {
      ++not_converged;
      continue;
    }
    worst_obj = std::max(worst_obj, std::abs(sol.objective - oracle.objective) /
                                        std::max(1.0, std::abs(oracle.objective)));
  }

  suite.checks.push_back({"all-optimal", not_optimal == 0, static_cast<double>(not_optimal),
                          "feasible-by-construction problems not solved to optimality"});
  suite.checks.push_back({"oracle-converged", not_converged == 0,
                          static_cast<double>(not_converged),
                          "dual oracle runs that hit the iteration cap"});
  suite.checks.push_back(
      {"kkt-max", worst_kkt < 1e-8, worst_kkt, "max KKT residual over 1000 problems"});
  suite.checks.push_back({"objective-vs-dual-oracle", worst_obj < 1e-6, worst_obj,
                          "max relative objective gap against the dual oracle"});
  return suite;
}

SuiteResult run_ig_oracle_suite(std::uint64_t seed) {
  SuiteResult suite;
  suite.suite = "ig-oracle";
  DepthSensorModel depth;
  ProbeSensorModel probe;

  double worst_visual = 0.0;
  double worst_coverage = 0.0;
  int origin_occupied = 0;
  for (int k = 0; k < 50; ++k) {
    const VoxelGrid grid = random_grid(Eigen::Vector3i(20, 20, 20), 0.05,
                                       derive_seed(seed, "ig-grid", k));
    auto engine = make_engine(derive_seed(seed, "ig-view", k));
    std::uniform_real_distribution<double> pos(0.02, 0.98);
    std::normal_distribution<double> gauss(0.0, 1.0);

    Viewpoint v;
    v.position = Vec3(pos(engine), pos(engine), pos(engine));
    Vec3 d(gauss(engine), gauss(engine), gauss(engine));
    while (d.norm() < 1e-6) d = Vec3(gauss(engine), gauss(engine), gauss(engine));
    v.direction = d.normalized();
    if (grid.state(grid.index_of(grid.voxel_of(v.position))) == VoxelState::Occupied)
      ++origin_occupied;

    const std::uint64_t ray_seed = derive_seed(seed, "ig-rays", k);
    const double visual = visual_gain(grid, v, depth, ray_seed);
    const double visual_ref = visual_gain_oracle(grid, v, depth, ray_seed);
    worst_visual = std::max(worst_visual, std::abs(visual - visual_ref));

    const double quantum = grid.params().coverage_quantum;
    const double coverage = coverage_gain(grid, v, probe, quantum, ray_seed);
    const double coverage_ref = coverage_gain_oracle(grid, v, probe, quantum, ray_seed);
    worst_coverage = std::max(worst_coverage, std::abs(coverage - coverage_ref));
  }

  suite.checks.push_back({"visual-gain-exact", worst_visual == 0.0, worst_visual,
                          "max |gain - slab-walk oracle| over 50 scenarios"});
  suite.checks.push_back({"coverage-gain-exact", worst_coverage == 0.0, worst_coverage,
                          "max |gain - slab-walk oracle| over 50 scenarios"});
  suite.checks.push_back({"origin-occupied-cases", origin_occupied > 0,
                          static_cast<double>(origin_occupied),
                          "scenarios whose viewpoint sits inside an occupied voxel"});
  return suite;
}

SuiteResult run_chance_suite(std::uint64_t seed) {
  SuiteResult suite;
  suite.suite = "chance";
  const ChanceReport report = run_chance_validation(ChanceValidationConfig{}, seed);
  for (const ChanceCell& cell : report.cells) {
    CheckResult check;
    char name[64];
    std::snprintf(name, sizeof(name), "alpha-%.2f-scale-%.1f-geom-%02d", cell.alpha,
                  cell.sigma_scale, cell.geometry);
    check.name = name;
    check.pass = cell.pass;
    check.metric = cell.fraction;
    check.detail = fmt("threshold %.6f, raw rate %.6f", cell.threshold, cell.raw_fraction) +
                   (cell.boundary_active ? "" : ", constraint not active");
    suite.checks.push_back(check);
  }
  return suite;
}

SuiteResult run_suite(const std::string& name, std::uint64_t seed) {
  if (name == "quantile") return run_quantile_suite();
  if (name == "jacobians") return run_jacobian_suite(seed);
  if (name == "qp") return run_qp_suite(seed);
  if (name == "ig-oracle") return run_ig_oracle_suite(seed);
  if (name == "chance") return run_chance_suite(seed);
  throw std::invalid_argument("unknown validation suite: " + name);
}

}  // namespace svfi::validation
