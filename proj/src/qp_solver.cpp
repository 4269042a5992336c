#include "svfi/qp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace svfi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Internal constraint in the form normal . x >= rhs.
struct Constraint {
  VecX normal;
  double rhs = 0.0;
  bool is_eq = false;
  bool flipped = false;  // equality stored with negated sign
  // Mapping back to the problem: 0 = equality, 1 = inequality, 2 = lb, 3 = ub.
  int group = 1;
  int index = 0;
};

}  // namespace

void QProblem::validate() const {
  const int n = dim();
  if (H.rows() != n || H.cols() != n) throw DimensionError("H dimension mismatch");
  if ((H - H.transpose()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + H.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("H must be symmetric");
  if (A_eq.size() > 0 && A_eq.cols() != n) throw DimensionError("A_eq dimension mismatch");
  if (A_eq.rows() != b_eq.size()) throw DimensionError("b_eq dimension mismatch");
  if (A_in.size() > 0 && A_in.cols() != n) throw DimensionError("A_in dimension mismatch");
  if (A_in.rows() != b_in.size()) throw DimensionError("b_in dimension mismatch");
  if (lb.size() != 0 && lb.size() != n) throw DimensionError("lb dimension mismatch");
  if (ub.size() != 0 && ub.size() != n) throw DimensionError("ub dimension mismatch");
}

QPSolution ActiveSetSolver::solve(const QProblem& problem) {
  problem.validate();
  const int n = problem.dim();
  const int m_eq = static_cast<int>(problem.A_eq.rows());
  const int m_in = static_cast<int>(problem.A_in.rows());

  MatX h_reg = problem.H;
  h_reg.diagonal().array() += opts_.regularization;
  Eigen::LLT<MatX> llt(h_reg);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("H is not positive semidefinite");

  std::vector<Constraint> cons;
  cons.reserve(m_eq + m_in + 2 * n);
  for (int k = 0; k < m_eq; ++k)
    cons.push_back({problem.A_eq.row(k).transpose(), problem.b_eq(k), true, false, 0, k});
  for (int k = 0; k < m_in; ++k)
    cons.push_back({-problem.A_in.row(k).transpose(), -problem.b_in(k), false, false, 1, k});
  for (int k = 0; k < problem.lb.size(); ++k) {
    if (std::isfinite(problem.lb(k))) {
      VecX e = VecX::Zero(n);
      e(k) = 1.0;
      cons.push_back({e, problem.lb(k), false, false, 2, k});
    }
  }
  for (int k = 0; k < problem.ub.size(); ++k) {
    if (std::isfinite(problem.ub(k))) {
      VecX e = VecX::Zero(n);
      e(k) = -1.0;
      cons.push_back({e, -problem.ub(k), false, false, 3, k});
    }
  }
  const int m_total = static_cast<int>(cons.size());

  VecX x = -llt.solve(problem.g);
  std::vector<int> active;
  std::vector<double> lambda;

  QPSolution sol;
  auto finish = [&](SolveStatus status, int iterations) {
    sol.x = x;
    sol.status = status;
    sol.iterations = iterations;
    sol.eq_duals = VecX::Zero(m_eq);
    sol.in_duals = VecX::Zero(m_in);
    sol.lb_duals = VecX::Zero(n);
    sol.ub_duals = VecX::Zero(n);
    for (size_t a = 0; a < active.size(); ++a) {
      const Constraint& c = cons[active[a]];
      // Stationarity inside the solver: H x + g = sum lambda_k normal_k.
      // In problem form H x + g + A_in^T mu + A_eq^T nu + ... = 0, so
      // inequalities (normal = -a) carry mu = lambda and equalities carry
      // nu = -lambda (or +lambda when the stored row was flipped).
      const double l = lambda[a];
      switch (c.group) {
        case 0: sol.eq_duals(c.index) = c.flipped ? l : -l; break;
        case 1: sol.in_duals(c.index) = l; break;
        case 2: sol.lb_duals(c.index) = l; break;
        case 3: sol.ub_duals(c.index) = l; break;
      }
    }
    sol.objective = 0.5 * x.dot(problem.H * x) + problem.g.dot(x);
    if (status == SolveStatus::Optimal) {
      warm_.assign(active.begin(), active.end());
      std::sort(warm_.begin(), warm_.end());
    }
    return sol;
  };

  int iter = 0;

  // Adds constraint p, taking dual steps and dropping blocking inequalities
  // as needed. Returns false on infeasibility ("skip" makes a dependent,
  // already-satisfied row a no-op, used for redundant equalities).
  auto add_constraint = [&](int p, bool* skipped) -> int {  // 0 ok, 1 infeasible, 2 iter cap
    double lambda_p = 0.0;
    while (true) {
      if (++iter > opts_.max_iterations) return 2;
      const Constraint& cp = cons[p];
      const int q = static_cast<int>(active.size());
      const VecX w = llt.matrixL().solve(cp.normal);
      VecX r;
      VecX z;
      if (q > 0) {
        MatX b(n, q);
        for (int a = 0; a < q; ++a)
          b.col(a) = llt.matrixL().solve(cons[active[a]].normal);
        Eigen::HouseholderQR<MatX> qr(b);
        r = qr.solve(w);
        z = llt.matrixU().solve(w - b * r);
      } else {
        z = llt.matrixU().solve(w);
      }

      const double s_p = cp.rhs - cp.normal.dot(x);  // >0: violated
      const double z_dot_np = z.dot(cp.normal);
      const bool have_primal = z_dot_np > 1e-12 * (1.0 + cp.normal.squaredNorm());

      double t1 = kInf;
      int blocking = -1;
      for (int a = 0; a < q; ++a) {
        if (cons[active[a]].is_eq) continue;
        if (r(a) > 1e-12) {
          const double t = lambda[a] / r(a);
          if (t < t1) {
            t1 = t;
            blocking = a;
          }
        }
      }
      const double t2 = have_primal ? s_p / z_dot_np : kInf;

      if (t1 == kInf && t2 == kInf) {
        if (cp.is_eq && std::abs(s_p) <= std::sqrt(opts_.tol)) {
          *skipped = true;  // redundant equality
          return 0;
        }
        return 1;
      }
      const double t = std::min(t1, t2);
      if (t2 == kInf) {
        // Dual step only: shifts multipliers until a blocker leaves.
        // Equality multipliers move too; they just never block.
        for (int a = 0; a < q; ++a) lambda[a] -= t * r(a);
        lambda_p += t;
        active.erase(active.begin() + blocking);
        lambda.erase(lambda.begin() + blocking);
        continue;
      }
      x += t * z;
      for (int a = 0; a < q; ++a) lambda[a] -= t * r(a);
      lambda_p += t;
      if (t2 <= t1) {
        active.push_back(p);
        lambda.push_back(lambda_p);
        return 0;
      }
      active.erase(active.begin() + blocking);
      lambda.erase(lambda.begin() + blocking);
    }
  };

  // Equalities first; they stay active for good.
  for (int e = 0; e < m_eq; ++e) {
    const double s = cons[e].rhs - cons[e].normal.dot(x);
    if (s < 0.0) {
      cons[e].normal = -cons[e].normal;
      cons[e].rhs = -cons[e].rhs;
      cons[e].flipped = true;
    }
    bool skipped = false;
    const int rc = add_constraint(e, &skipped);
    if (rc == 1) return finish(SolveStatus::Infeasible, iter);
    if (rc == 2) return finish(SolveStatus::MaxIterations, iter);
  }

  while (true) {
    // Most violated inequality, preferring rows active in the last solve.
    int p = -1;
    double worst = opts_.tol;
    bool p_warm = false;
    for (int k = m_eq; k < m_total; ++k) {
      if (std::find(active.begin(), active.end(), k) != active.end()) continue;
      const double v = cons[k].rhs - cons[k].normal.dot(x);
      if (v <= opts_.tol) continue;
      const bool warm = std::binary_search(warm_.begin(), warm_.end(), k);
      if (warm && !p_warm) {
        p = k;
        worst = v;
        p_warm = true;
      } else if (warm == p_warm && v > worst) {
        p = k;
        worst = v;
      }
    }
    if (p < 0) return finish(SolveStatus::Optimal, iter);
    bool skipped = false;
    const int rc = add_constraint(p, &skipped);
    if (rc == 1) return finish(SolveStatus::Infeasible, iter);
    if (rc == 2) return finish(SolveStatus::MaxIterations, iter);
  }
}

}  // namespace svfi
