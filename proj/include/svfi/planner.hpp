#pragma once

#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include "svfi/sensing.hpp"
#include "svfi/types.hpp"
#include "svfi/voxel_grid.hpp"

namespace svfi {

// Candidate camera/probe pose with its scored gains.
struct Viewpoint {
  Vec3 position = Vec3::Zero();
  Vec3 direction = Vec3::UnitX();
  double g_visual = 0.0;
  double g_coverage = 0.0;
  double g_weighted = 0.0;
};

struct PlannerConfig {
  double beta = 0.75;              // visual/coverage mixing weight
  int candidates = 500;
  double stop_gain = 1.0;          // stop when the best weighted gain is below this
  double error_norm_threshold = 1e-3;
  double stall_window_s = 4.0;
  double stall_tolerance = 1e-4;
  double coverage_quantum = std::log(2.0);
};

// Information a ray would gather in one voxel: occupancy entropy gated to
// unknown voxels.
double visual_voxel_info(double occupancy, bool observed);

// Coverage information of one voxel: `quantum` for an uncovered occupied
// voxel, zero otherwise.
double coverage_voxel_info(VoxelState state, bool covered, double quantum);

// Expected visual information gain of a viewpoint: frustum rays walked
// through the grid until the first occupied voxel or the sensor range,
// summing visual_voxel_info. Deterministic per seed.
double visual_gain(const VoxelGrid& grid, const Viewpoint& v, const DepthSensorModel& model,
                   std::uint64_t seed);

// Coverage gain: sphere rays of length model.radius, summing
// coverage_voxel_info over traversed voxels including the terminal one.
double coverage_gain(const VoxelGrid& grid, const Viewpoint& v, const ProbeSensorModel& model,
                     double quantum, std::uint64_t seed);

double weighted_gain(double g_visual, double g_coverage, double beta);

// Uniformly samples candidate poses: positions at centers of free voxels,
// pan in [-pi, pi), tilt in [-pi/2, pi/2]. Throws when no free voxel exists.
std::vector<Viewpoint> sample_candidates(const VoxelGrid& grid, int count, std::uint64_t seed);

// Index of the candidate with the highest weighted gain; first wins ties.
int select_next(std::span<const Viewpoint> candidates);

inline bool should_stop(double best_weighted_gain, double stop_gain) {
  return best_weighted_gain < stop_gain;
}

// Tracks the task-error history for the replanning rule: replan when the
// error norm falls below the threshold or when it has stalled (the window
// spread stays under the tolerance for the whole stall window).
class ReplanMonitor {
 public:
  ReplanMonitor(int window_ticks, double error_threshold, double stall_tolerance)
      : window_(window_ticks), threshold_(error_threshold), tolerance_(stall_tolerance) {}

  void reset() { history_.clear(); }

  bool push(double error_norm) {
    if (error_norm < threshold_) return true;
    history_.push_back(error_norm);
    if (static_cast<int>(history_.size()) > window_) history_.pop_front();
    if (static_cast<int>(history_.size()) == window_) {
      const auto [lo, hi] = std::minmax_element(history_.begin(), history_.end());
      if (*hi - *lo < tolerance_) return true;
    }
    return false;
  }

 private:
  int window_;
  double threshold_;
  double tolerance_;
  std::deque<double> history_;
};

}  // namespace svfi
