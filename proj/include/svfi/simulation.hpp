#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "svfi/controller.hpp"
#include "svfi/estimation.hpp"
#include "svfi/planner.hpp"
#include "svfi/scene.hpp"
#include "svfi/sensing.hpp"
#include "svfi/voxel_grid.hpp"

namespace svfi {

struct StepResult {
  Configuration q;
  bool arm_clamped = false;
};

// Advances the state by one period under zero-order hold: the base follows
// the exact unicycle arc for the heading-projected forward speed and the
// commanded yaw rate, the arm integrates with forward Euler and clamps at
// the joint limits (flagged).
StepResult step(const RobotModel& model, const Configuration& q, const VecX& u, double dt);

struct TickRecord {
  int tick = 0;
  double time = 0.0;
  VecX q;
  VecX u;
  double error_norm = 0.0;
  int status = 0;  // SolveStatus as an integer
  bool emergency = false;
  bool arm_clamped = false;
  double slack_norm = 0.0;
  double nonholonomic_residual = 0.0;
  double min_velocity_margin = 0.0;
  double min_box_margin = 0.0;
  std::vector<double> distances;  // aligned with RunLog::row_labels
  std::vector<double> margins;
};

// One set-point or bookkeeping event: census of the grid at that moment,
// the gains of the selected viewpoint (NaN for survey/census rows), and the
// active set point. phase is one of survey, explore, census, stop.
struct PlanRecord {
  int iteration = 0;
  int tick = 0;
  double time = 0.0;
  std::string phase;
  Census census;
  double g_visual = 0.0;
  double g_coverage = 0.0;
  double g_weighted = 0.0;
  TaskVector set_point;
  bool stop = false;
};

enum class TerminationReason { InformationGainStop, TickBudget, EmergencyAbort, PlanningFailed };

const char* to_string(TerminationReason reason);

struct RunLog {
  std::vector<std::string> row_labels;
  std::vector<TickRecord> ticks;
  std::vector<PlanRecord> plans;
  TerminationReason reason = TerminationReason::TickBudget;
  int ticks_executed = 0;
  long residual_relabeled = 0;
  Census final_census;
  std::vector<std::optional<PlaneBelief>> wall_beliefs;
  std::vector<int> wall_point_counts;
};

std::vector<Vec3> default_survey_directions();

struct EpisodeConfig {
  ControllerConfig controller;
  GridParams grid;
  DepthSensorModel depth;
  ProbeSensorModel probe;
  DepthNoiseModel noise;
  PlannerConfig planner;
  // Set-point convergence runs through slow lateral joint-space modes, so a
  // full sweep of the room needs tens of simulated minutes; the budget is a
  // backstop, not the expected exit.
  int max_ticks = 540000;  // 90 min at 100 Hz
  int sense_period_ticks = 10;
  int census_period_ticks = 100;
  double emergency_abort_s = 1.0;
  // Directions scanned in place before exploration starts, so every wall
  // has a belief before the base commits to large motions.
  std::vector<Vec3> survey_directions = default_survey_directions();
  double wall_gate_primary = 0.015;    // accept a hit for a wall closer than this
  double wall_gate_secondary = 0.05;   // ... and farther than this from every other wall
  int min_fit_points = 10;
};

struct EpisodeOutput {
  RunLog log;
  VoxelGrid grid;
};

// Closed-loop autonomy episode: sense every sense_period ticks at the probe
// pose, integrate the scan, refit per-wall plane beliefs from gated hit
// clouds, mark probe coverage, run one controller tick toward the current
// set point; switch set points on the replanning rule; stop on the
// information-gain rule (relabeling unknown voxels residual), the tick
// budget, or a sustained emergency-stop streak. Deterministic per seed.
EpisodeOutput run_episode(const RobotModel& model, const Scene& scene,
                          const EpisodeConfig& config, std::uint64_t seed);

struct ChanceValidationConfig {
  std::vector<double> alphas = {0.5, 0.7, 0.9, 0.95};
  std::vector<double> sigma_scales = {0.5, 1.5};
  int geometries_per_cell = 3;
  int samples = 100000;
  int dof = 9;
  bool include_zero_sigma = true;
};

struct ChanceCell {
  double alpha = 0.0;
  double sigma_scale = 0.0;
  int geometry = 0;
  double fraction = 0.0;      // renormalized-sample satisfaction rate
  double raw_fraction = 0.0;  // linear-sample satisfaction rate
  double threshold = 0.0;     // pass bound: alpha minus three binomial sigmas
  bool boundary_active = false;
  bool pass = false;
};

struct ChanceReport {
  std::vector<ChanceCell> cells;
  bool all_pass = true;
};

// For every (alpha, covariance scale, geometry) cell: draw a random
// point/plane/Jacobian geometry, drive a control onto the surrogate
// boundary with a small QP (iterating the zero-order-hold buffer to its
// fixed point), and Monte Carlo the satisfaction rate of the underlying
// probabilistic constraint at the applied control.
ChanceReport run_chance_validation(const ChanceValidationConfig& config, std::uint64_t seed);

}  // namespace svfi
