#include "svfi/planner.hpp"

#include <cmath>

#include "svfi/rng.hpp"

namespace svfi {

double visual_voxel_info(double occupancy, bool observed) {
  if (observed) return 0.0;
  return bernoulli_entropy(occupancy);
}

double coverage_voxel_info(VoxelState state, bool covered, double quantum) {
  return (state == VoxelState::Occupied && !covered) ? quantum : 0.0;
}

double visual_gain(const VoxelGrid& grid, const Viewpoint& v, const DepthSensorModel& model,
                   std::uint64_t seed) {
  const std::vector<Vec3> rays = frustum_rays(model, v.direction, model.rays, seed);
  double gain = 0.0;
  for (const Vec3& d : rays) {
    const RaycastResult rc = grid.raycast(v.position, d, model.max_range);
    for (int index : rc.voxels)
      gain += visual_voxel_info(grid.occupancy(index), grid.state(index) != VoxelState::Unknown);
  }
  return gain;
}

double coverage_gain(const VoxelGrid& grid, const Viewpoint& v, const ProbeSensorModel& model,
                     double quantum, std::uint64_t seed) {
  const std::vector<Vec3> rays = sphere_rays(model.rays, seed);
  double gain = 0.0;
  for (const Vec3& d : rays) {
    const RaycastResult rc = grid.raycast(v.position, d, model.radius);
    for (int index : rc.voxels)
      gain += coverage_voxel_info(grid.state(index), grid.covered(index), quantum);
  }
  return gain;
}

double weighted_gain(double g_visual, double g_coverage, double beta) {
  return beta * g_visual + (1.0 - beta) * g_coverage;
}

std::vector<Viewpoint> sample_candidates(const VoxelGrid& grid, int count, std::uint64_t seed) {
  std::vector<int> free_voxels;
  for (int i = 0; i < grid.size(); ++i)
    if (grid.state(i) == VoxelState::Free) free_voxels.push_back(i);
  if (free_voxels.empty()) throw std::runtime_error("no free voxels to sample viewpoints from");

  auto engine = make_engine(derive_seed(seed, "candidates"));
  std::uniform_int_distribution<size_t> pick(0, free_voxels.size() - 1);
  std::uniform_real_distribution<double> pan_dist(-M_PI, M_PI);
  std::uniform_real_distribution<double> tilt_dist(-M_PI / 2.0, M_PI / 2.0);

  std::vector<Viewpoint> candidates;
  candidates.reserve(count);
  for (int i = 0; i < count; ++i) {
    Viewpoint v;
    v.position = grid.center_of(free_voxels[pick(engine)]);
    const double pan = pan_dist(engine);
    const double tilt = tilt_dist(engine);
    v.direction =
        Vec3(std::cos(tilt) * std::cos(pan), std::cos(tilt) * std::sin(pan), std::sin(tilt));
    candidates.push_back(v);
  }
  return candidates;
}

int select_next(std::span<const Viewpoint> candidates) {
  if (candidates.empty()) throw std::invalid_argument("no candidates to select from");
  int best = 0;
  for (int i = 1; i < static_cast<int>(candidates.size()); ++i)
    if (candidates[i].g_weighted > candidates[best].g_weighted) best = i;
  return best;
}

}  // namespace svfi
