#pragma once

#include <vector>

#include "svfi/types.hpp"

namespace svfi {

// min 0.5 x^T H x + g^T x
// s.t. A_eq x = b_eq, A_in x <= b_in, lb <= x <= ub.
// lb/ub may be empty (absent) or hold +-infinity entries.
struct QProblem {
  MatX H;
  VecX g;
  MatX A_eq;
  VecX b_eq;
  MatX A_in;
  VecX b_in;
  VecX lb;
  VecX ub;

  int dim() const { return static_cast<int>(g.size()); }
  void validate() const;
};

enum class SolveStatus { Optimal, Infeasible, MaxIterations };

struct QPSolution {
  VecX x;
  VecX eq_duals;        // nu: stationarity H x + g + A_in^T mu + A_eq^T nu + ... = 0
  VecX in_duals;        // mu >= 0, one per A_in row
  VecX lb_duals;        // multiplier of -x <= -lb, one per variable (0 if absent)
  VecX ub_duals;        // multiplier of x <= ub
  SolveStatus status = SolveStatus::Optimal;
  int iterations = 0;
  double objective = 0.0;
};

// Dense dual active-set solver (Goldfarb-Idnani scheme): starts from the
// unconstrained minimum of the Tikhonov-regularized objective and adds
// violated constraints one at a time, dropping blocking ones as their
// multipliers hit zero. Equality rows are added first and never dropped.
// Infeasibility is detected when a violated constraint admits neither a
// primal nor a dual step.
//
// The previous solve's active set is kept and violated constraints found in
// it are examined first, which warm-starts the sequence of controller
// problems across ticks. Row ordering must be stable across warm-started
// solves for this to help; results are unaffected either way. One instance
// is not safe for concurrent use.
class ActiveSetSolver {
 public:
  struct Options {
    double tol = 1e-10;
    int max_iterations = 200;
    double regularization = 1e-10;
  };

  ActiveSetSolver() = default;
  explicit ActiveSetSolver(Options opts) : opts_(opts) {}

  QPSolution solve(const QProblem& problem);
  void reset_warm_start() { warm_.clear(); }
  const Options& options() const { return opts_; }

 private:
  Options opts_;
  std::vector<int> warm_;
};

}  // namespace svfi
