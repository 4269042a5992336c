#pragma once

#include <cstdint>
#include <vector>

#include "svfi/scene.hpp"
#include "svfi/types.hpp"
#include "svfi/voxel_grid.hpp"

namespace svfi {

struct DepthSensorModel {
  double hfov_deg = 60.0;
  double vfov_deg = 45.0;
  double max_range = 3.0;
  double min_range = 0.3;
  int rays = 200;
};

struct ProbeSensorModel {
  double radius = 0.4;
  int rays = 200;
};

struct DepthNoiseModel {
  double range_std = 0.002;
  double dropout = 0.02;
  bool min_range_fault = false;  // readings closer than min_range come back garbage
};

// `count` unit directions uniform in angle space over the frustum centered
// on `axis` (pan within hfov/2, tilt within vfov/2). Deterministic per seed.
std::vector<Vec3> frustum_rays(const DepthSensorModel& model, const Vec3& axis, int count,
                               std::uint64_t seed);

// `count` unit directions uniform on the sphere (normalized Gaussians).
std::vector<Vec3> sphere_rays(int count, std::uint64_t seed);

// Analytic depth scan of the ground-truth scene from `origin` looking along
// `axis`: per ray the nearest wall-plane or pipe-cylinder intersection,
// corrupted by range noise, dropouts and (optionally) a min-range fault.
std::vector<DepthReturn> simulate_depth_scan(const Scene& scene, const Vec3& origin,
                                             const Vec3& axis, const DepthSensorModel& model,
                                             const DepthNoiseModel& noise, std::uint64_t seed);

}  // namespace svfi
