#include "svfi/sensing.hpp"

#include <cmath>
#include <limits>

#include "svfi/rng.hpp"

namespace svfi {

namespace {

// Orthonormal camera frame (forward, right, up) from the optical axis.
void camera_frame(const Vec3& axis, Vec3* forward, Vec3* right, Vec3* up) {
  *forward = axis.normalized();
  const Vec3 ref = std::abs(forward->dot(Vec3::UnitZ())) < 0.99 ? Vec3::UnitZ() : Vec3::UnitX();
  *right = forward->cross(ref).normalized();
  *up = right->cross(*forward);
}

double ray_cylinder(const Vec3& o, const Vec3& d, const Line& pipe) {
  // |(p(t) - c)_perp| = r with p(t) = o + t d.
  const Vec3 oc = o - pipe.point;
  const Vec3 d_perp = d - d.dot(pipe.direction) * pipe.direction;
  const Vec3 oc_perp = oc - oc.dot(pipe.direction) * pipe.direction;
  const double a = d_perp.squaredNorm();
  if (a < 1e-14) return std::numeric_limits<double>::infinity();
  const double b = 2.0 * d_perp.dot(oc_perp);
  const double c = oc_perp.squaredNorm() - pipe.radius * pipe.radius;
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return std::numeric_limits<double>::infinity();
  const double sq = std::sqrt(disc);
  const double t0 = (-b - sq) / (2.0 * a);
  const double t1 = (-b + sq) / (2.0 * a);
  if (t0 > 1e-9) return t0;
  if (t1 > 1e-9) return t1;
  return std::numeric_limits<double>::infinity();
}

// Exit distance of a ray starting inside the cube [0, side]^3.
double ray_cube_exit(const Vec3& o, const Vec3& d, double side) {
  double t_exit = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    if (d(i) > 1e-14)
      t_exit = std::min(t_exit, (side - o(i)) / d(i));
    else if (d(i) < -1e-14)
      t_exit = std::min(t_exit, -o(i) / d(i));
  }
  return t_exit;
}

}  // namespace

std::vector<Vec3> frustum_rays(const DepthSensorModel& model, const Vec3& axis, int count,
                               std::uint64_t seed) {
  Vec3 f, r, u;
  camera_frame(axis, &f, &r, &u);
  const double half_pan = 0.5 * model.hfov_deg * M_PI / 180.0;
  const double half_tilt = 0.5 * model.vfov_deg * M_PI / 180.0;

  auto engine = make_engine(derive_seed(seed, "frustum"));
  std::uniform_real_distribution<double> pan_dist(-half_pan, half_pan);
  std::uniform_real_distribution<double> tilt_dist(-half_tilt, half_tilt);

  std::vector<Vec3> rays;
  rays.reserve(count);
  for (int i = 0; i < count; ++i) {
    const double pan = half_pan > 0.0 ? pan_dist(engine) : 0.0;
    const double tilt = half_tilt > 0.0 ? tilt_dist(engine) : 0.0;
    rays.push_back(std::cos(tilt) * std::cos(pan) * f + std::cos(tilt) * std::sin(pan) * r +
                   std::sin(tilt) * u);
  }
  return rays;
}

std::vector<Vec3> sphere_rays(int count, std::uint64_t seed) {
  auto engine = make_engine(derive_seed(seed, "sphere"));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Vec3> rays;
  rays.reserve(count);
  while (static_cast<int>(rays.size()) < count) {
    const Vec3 v(gauss(engine), gauss(engine), gauss(engine));
    const double n = v.norm();
    if (n > 1e-9) rays.push_back(v / n);
  }
  return rays;
}

std::vector<DepthReturn> simulate_depth_scan(const Scene& scene, const Vec3& origin,
                                             const Vec3& axis, const DepthSensorModel& model,
                                             const DepthNoiseModel& noise, std::uint64_t seed) {
  const std::vector<Vec3> dirs = frustum_rays(model, axis, model.rays, derive_seed(seed, "scan-dirs"));
  auto engine = make_engine(derive_seed(seed, "scan-noise"));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<DepthReturn> returns;
  returns.reserve(dirs.size());
  for (const Vec3& d : dirs) {
    double t = ray_cube_exit(origin, d, scene.cube_side);
    for (const Line& pipe : scene.pipes) t = std::min(t, ray_cylinder(origin, d, pipe));

    DepthReturn ret;
    ret.direction = d;
    const double dropout_draw = unit(engine);
    const double noise_draw = gauss(engine);
    const double fault_draw = unit(engine);
    if (!std::isfinite(t) || t > model.max_range || dropout_draw < noise.dropout) {
      ret.hit = false;
      ret.range = model.max_range;
    } else if (noise.min_range_fault && t < model.min_range) {
      ret.hit = true;
      ret.range = model.min_range + fault_draw * (model.max_range - model.min_range);
    } else {
      ret.hit = true;
      ret.range = std::max(1e-4, t + noise.range_std * noise_draw);
    }
    returns.push_back(ret);
  }
  return returns;
}

}  // namespace svfi
