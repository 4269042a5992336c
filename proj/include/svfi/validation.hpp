#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "svfi/config.hpp"
#include "svfi/planner.hpp"
#include "svfi/qp_solver.hpp"
#include "svfi/simulation.hpp"
#include "svfi/voxel_grid.hpp"

// Oracle implementations and the named validation suites. Every oracle
// recomputes its target quantity through an independent route (numerical
// integration, finite differences, first-order dual methods, slab-walk ray
// traversal) so agreement is evidence, not tautology.
namespace svfi::validation {

struct CheckResult {
  std::string name;
  bool pass = false;
  double metric = 0.0;  // suite-specific: error, fraction, residual
  std::string detail;
};

struct SuiteResult {
  std::string suite;
  std::vector<CheckResult> checks;

  bool all_pass() const {
    for (const CheckResult& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

// Standard normal CDF by composite Simpson integration over a cached
// prefix table, and its inverse by bisection. Accurate well below 1e-9.
double simpson_normal_cdf(double z);
double quantile_oracle(double alpha);

// Central-difference Jacobians.
MatX numeric_task_jacobian(const RobotModel& model, const Configuration& q, double h);
MatX numeric_point_jacobian(const RobotModel& model, const Configuration& q,
                            const std::string& attachment, double h);
RowVecX numeric_line_distance_gradient(const RobotModel& model, const Configuration& q,
                                       const std::string& attachment, const Line& line, double h);

struct DualOracleResult {
  VecX x;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Accelerated projected-gradient ascent on the dual of a strictly convex
// QP; all constraints folded into one inequality system.
DualOracleResult projected_gradient_qp(const QProblem& problem, int max_iterations, double tol);

// Largest KKT violation of a claimed solution: stationarity, primal and
// dual feasibility, complementary slackness.
double kkt_residual(const QProblem& problem, const QPSolution& solution);

// Slab-walk information gains: voxel entry intervals from sorted axis
// crossings, midpoint classification, first-occupied stopping. Shares only
// the ray directions with the implementation.
double visual_gain_oracle(const VoxelGrid& grid, const Viewpoint& v,
                          const DepthSensorModel& model, std::uint64_t seed);
double coverage_gain_oracle(const VoxelGrid& grid, const Viewpoint& v,
                            const ProbeSensorModel& model, double quantum, std::uint64_t seed);

// Synthetic grid with a mix of unknown, free, occupied (some covered) and
// residual voxels. Deterministic per seed.
VoxelGrid random_grid(const Eigen::Vector3i& dims, double resolution, std::uint64_t seed);

SuiteResult run_quantile_suite();
SuiteResult run_jacobian_suite(std::uint64_t seed);
SuiteResult run_qp_suite(std::uint64_t seed);
SuiteResult run_ig_oracle_suite(std::uint64_t seed);
SuiteResult run_chance_suite(std::uint64_t seed);

SuiteResult run_suite(const std::string& name, std::uint64_t seed);

}  // namespace svfi::validation
