#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "svfi/types.hpp"

namespace svfi {

enum class VoxelState { Unknown, Free, Occupied, Residual };

struct GridParams {
  Vec3 origin = Vec3::Zero();
  double resolution = 0.05;
  Eigen::Vector3i dims = Eigen::Vector3i(30, 30, 30);
  double log_odds_hit = std::log(0.7 / 0.3);
  double log_odds_miss = -std::log(0.6 / 0.4);
  double clamp_min = -2.0;
  double clamp_max = 3.5;
  double p_occ_min = 0.7;
  double p_free_max = 0.3;
  double coverage_quantum = std::log(2.0);  // entropy mass of an uncovered occupied voxel
};

// One return of the depth sensor: unit direction and range. hit == false
// marks a ray that saw nothing within range (every traversed voxel is a
// miss).
struct DepthReturn {
  Vec3 direction = Vec3::UnitX();
  double range = 0.0;
  bool hit = false;
};

struct RaycastResult {
  std::vector<int> voxels;  // traversal order, origin voxel excluded
  bool hit = false;         // stopped at an occupied voxel (included as last entry)
};

struct Census {
  long unknown = 0;
  long free = 0;
  long occupied = 0;
  long residual = 0;
  long covered = 0;
  long total = 0;
  double mean_entropy = 0.0;  // (1/|W|) sum of occupancy entropy + coverage term
};

// Dense log-odds occupancy grid over an axis-aligned box, with per-voxel
// observed / covered / residual flags.
//
// Ray traversal convention: the voxel containing the ray origin is never
// part of a traversal; walks start with the first voxel entered after
// leaving it, and a voxel is included when it is entered at a parameter
// t <= max_range. Occupancy-aware walks (raycast) stop at the first
// occupied voxel, which is included in the result.
class VoxelGrid {
 public:
  explicit VoxelGrid(GridParams params);

  const GridParams& params() const { return params_; }
  int size() const { return static_cast<int>(log_odds_.size()); }

  bool contains(const Vec3& p) const;
  int index_of(const Eigen::Vector3i& v) const {
    return (v.z() * params_.dims.y() + v.y()) * params_.dims.x() + v.x();
  }
  Eigen::Vector3i voxel_at(int index) const;
  Eigen::Vector3i voxel_of(const Vec3& p) const;  // throws if outside
  Vec3 center_of(const Eigen::Vector3i& v) const;
  Vec3 center_of(int index) const { return center_of(voxel_at(index)); }

  double log_odds(int index) const { return log_odds_[index]; }
  double occupancy(int index) const { return 1.0 / (1.0 + std::exp(-log_odds_[index])); }
  bool observed(int index) const { return flags_[index] & kObserved; }
  bool covered(int index) const { return flags_[index] & kCovered; }
  bool residual(int index) const { return flags_[index] & kResidual; }

  // Exhaustive, exclusive state rule: never-observed voxels are Unknown (or
  // Residual once relabeled); observed voxels clear the confident
  // thresholds p_occ_min / p_free_max where possible and otherwise fall to
  // the side of even odds, occupied at probability >= 0.5.
  VoxelState state(int index) const;

  struct UpdateSummary {
    int hit_updates = 0;
    int miss_updates = 0;
  };

  // Integrates one depth scan: every traversed voxel (endpoint excluded)
  // receives the miss update, the voxel containing the hit point receives
  // the hit update. Hits beyond the grid or farther than max_range mark
  // misses only. sensor must be inside the grid.
  UpdateSummary integrate_depth_scan(const Vec3& sensor, std::span<const DepthReturn> returns,
                                     double max_range);

  // Occupancy-aware walk from origin along dir (unit), capped at max_range.
  RaycastResult raycast(const Vec3& origin, const Vec3& dir, double max_range) const;

  // Overwrites one voxel directly (log odds and flags), bypassing
  // integration. Meant for building synthetic grids.
  void set_voxel(int index, double log_odds, bool observed, bool covered = false,
                 bool residual = false);

  // Sets the covered flag; returns how many voxels were newly covered.
  int mark_covered(std::span<const int> indices);

  // Relabels every still-unknown voxel as residual; returns the count.
  long relabel_unknown_to_residual();

  Census census() const;

  void save(const std::string& path) const;
  static VoxelGrid load(const std::string& path);

  // Geometric walk, ignoring occupancy; visit(index, t_enter) returns false
  // to stop. Integration and raycast are built on it. Origin must be inside
  // the grid.
  void traverse(const Vec3& origin, const Vec3& dir, double max_range,
                const std::function<bool(int, double)>& visit) const;

 private:
  static constexpr std::uint8_t kObserved = 1;
  static constexpr std::uint8_t kCovered = 2;
  static constexpr std::uint8_t kResidual = 4;

  GridParams params_;
  std::vector<double> log_odds_;
  std::vector<std::uint8_t> flags_;
};

}  // namespace svfi
