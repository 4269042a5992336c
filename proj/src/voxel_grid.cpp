#include "svfi/voxel_grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace svfi {

VoxelGrid::VoxelGrid(GridParams params) : params_(std::move(params)) {
  if (!(params_.resolution > 0.0)) throw std::invalid_argument("resolution must be positive");
  if ((params_.dims.array() <= 0).any()) throw std::invalid_argument("grid dims must be positive");
  if (!(params_.clamp_min < params_.clamp_max))
    throw std::invalid_argument("log-odds clamps inverted");
  const long total =
      static_cast<long>(params_.dims.x()) * params_.dims.y() * params_.dims.z();
  log_odds_.assign(total, 0.0);
  flags_.assign(total, 0);
}

bool VoxelGrid::contains(const Vec3& p) const {
  const Vec3 local = p - params_.origin;
  for (int i = 0; i < 3; ++i) {
    if (local(i) < 0.0 || local(i) >= params_.dims(i) * params_.resolution) return false;
  }
  return true;
}

Eigen::Vector3i VoxelGrid::voxel_at(int index) const {
  Eigen::Vector3i v;
  v.x() = index % params_.dims.x();
  v.y() = (index / params_.dims.x()) % params_.dims.y();
  v.z() = index / (params_.dims.x() * params_.dims.y());
  return v;
}

Eigen::Vector3i VoxelGrid::voxel_of(const Vec3& p) const {
  if (!contains(p)) throw std::invalid_argument("point outside grid");
  const Vec3 local = (p - params_.origin) / params_.resolution;
  Eigen::Vector3i v;
  for (int i = 0; i < 3; ++i)
    v(i) = std::min(static_cast<int>(std::floor(local(i))), params_.dims(i) - 1);
  return v;
}

Vec3 VoxelGrid::center_of(const Eigen::Vector3i& v) const {
  return params_.origin + params_.resolution * (v.cast<double>() + Vec3::Constant(0.5));
}

VoxelState VoxelGrid::state(int index) const {
  const std::uint8_t f = flags_[index];
  if (!(f & kObserved)) return (f & kResidual) ? VoxelState::Residual : VoxelState::Unknown;
  const double p = occupancy(index);
  if (p >= params_.p_occ_min) return VoxelState::Occupied;
  if (p <= params_.p_free_max) return VoxelState::Free;
  return p >= 0.5 ? VoxelState::Occupied : VoxelState::Free;
}

void VoxelGrid::traverse(const Vec3& origin, const Vec3& dir, double max_range,
                         const std::function<bool(int, double)>& visit) const {
  if (!contains(origin)) throw std::invalid_argument("traversal origin outside grid");
  if (std::abs(dir.norm() - 1.0) > 1e-6) throw std::invalid_argument("direction must be unit");

  const double res = params_.resolution;
  const Vec3 local = origin - params_.origin;
  Eigen::Vector3i v = voxel_of(origin);

  Eigen::Vector3i step;
  Vec3 t_max, t_delta;
  for (int i = 0; i < 3; ++i) {
    if (dir(i) > 0.0) {
      step(i) = 1;
      t_max(i) = ((v(i) + 1) * res - local(i)) / dir(i);
      t_delta(i) = res / dir(i);
    } else if (dir(i) < 0.0) {
      step(i) = -1;
      t_max(i) = (v(i) * res - local(i)) / dir(i);
      t_delta(i) = -res / dir(i);
    } else {
      step(i) = 0;
      t_max(i) = std::numeric_limits<double>::infinity();
      t_delta(i) = std::numeric_limits<double>::infinity();
    }
  }

  while (true) {
    int axis = 0;
    if (t_max(1) < t_max(axis)) axis = 1;
    if (t_max(2) < t_max(axis)) axis = 2;
    const double t_enter = t_max(axis);
    if (t_enter > max_range) return;
    v(axis) += step(axis);
    if (v(axis) < 0 || v(axis) >= params_.dims(axis)) return;
    t_max(axis) += t_delta(axis);
    if (!visit(index_of(v), t_enter)) return;
  }
}

VoxelGrid::UpdateSummary VoxelGrid::integrate_depth_scan(const Vec3& sensor,
                                                         std::span<const DepthReturn> returns,
                                                         double max_range) {
  UpdateSummary summary;
  const auto clamp = [&](double l) {
    return std::min(params_.clamp_max, std::max(params_.clamp_min, l));
  };
  for (const DepthReturn& ray : returns) {
    const double range = std::min(ray.range, max_range);
    int hit_index = -1;
    if (ray.hit && ray.range <= max_range) {
      // Nudge the endpoint back along the ray so hits landing exactly on a
      // voxel face (the cube walls) resolve to the inside voxel.
      const Vec3 endpoint = sensor + ray.direction * (range - 1e-9);
      // A measured point outside the map cannot be integrated, and marking
      // its ray as misses would systematically erode any surface lying on
      // the map boundary under range noise; drop the whole return instead
      // (the cloud is filtered to the map bounds).
      if (!contains(endpoint)) continue;
      hit_index = index_of(voxel_of(endpoint));
    }
    traverse(sensor, ray.direction, range, [&](int index, double) {
      if (index == hit_index) return false;  // hit update below
      log_odds_[index] = clamp(log_odds_[index] + params_.log_odds_miss);
      flags_[index] |= kObserved;
      ++summary.miss_updates;
      return true;
    });
    if (hit_index >= 0) {
      log_odds_[hit_index] = clamp(log_odds_[hit_index] + params_.log_odds_hit);
      flags_[hit_index] |= kObserved;
      ++summary.hit_updates;
    }
  }
  return summary;
}

RaycastResult VoxelGrid::raycast(const Vec3& origin, const Vec3& dir, double max_range) const {
  RaycastResult result;
  const int origin_index = index_of(voxel_of(origin));  // throws if outside
  if (state(origin_index) == VoxelState::Occupied) {
    result.voxels.push_back(origin_index);
    result.hit = true;
    return result;
  }
  traverse(origin, dir, max_range, [&](int index, double) {
    result.voxels.push_back(index);
    if (state(index) == VoxelState::Occupied) {
      result.hit = true;
      return false;
    }
    return true;
  });
  return result;
}

void VoxelGrid::set_voxel(int index, double log_odds, bool observed, bool covered,
                          bool residual) {
  log_odds_[index] = log_odds;
  std::uint8_t f = 0;
  if (observed) f |= kObserved;
  if (covered) f |= kCovered;
  if (residual) f |= kResidual;
  flags_[index] = f;
}

int VoxelGrid::mark_covered(std::span<const int> indices) {
  int fresh = 0;
  for (int index : indices) {
    if (!(flags_[index] & kCovered)) {
      flags_[index] |= kCovered;
      ++fresh;
    }
  }
  return fresh;
}

long VoxelGrid::relabel_unknown_to_residual() {
  long count = 0;
  for (size_t i = 0; i < flags_.size(); ++i) {
    if (!(flags_[i] & kObserved) && !(flags_[i] & kResidual)) {
      flags_[i] |= kResidual;
      ++count;
    }
  }
  return count;
}

Census VoxelGrid::census() const {
  Census c;
  c.total = size();
  double entropy = 0.0;
  for (int i = 0; i < size(); ++i) {
    const VoxelState s = state(i);
    switch (s) {
      case VoxelState::Unknown: ++c.unknown; break;
      case VoxelState::Free: ++c.free; break;
      case VoxelState::Occupied: ++c.occupied; break;
      case VoxelState::Residual: ++c.residual; break;
    }
    if (covered(i)) ++c.covered;
    entropy += bernoulli_entropy(occupancy(i));
    if (s == VoxelState::Occupied && !covered(i)) entropy += params_.coverage_quantum;
  }
  c.mean_entropy = entropy / static_cast<double>(c.total);
  return c;
}

void VoxelGrid::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open grid snapshot for writing: " + path);
  out << "svfi-grid 1\n";
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g %.17g\n", params_.origin.x(),
                params_.origin.y(), params_.origin.z(), params_.resolution);
  out << buf;
  out << params_.dims.x() << ' ' << params_.dims.y() << ' ' << params_.dims.z() << '\n';
  for (int i = 0; i < size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g %u\n", log_odds_[i],
                  static_cast<unsigned>(flags_[i]));
    out << buf;
  }
}

VoxelGrid VoxelGrid::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open grid snapshot: " + path);
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "svfi-grid" || version != 1)
    throw std::runtime_error("unrecognized grid snapshot format");
  GridParams p;
  in >> p.origin.x() >> p.origin.y() >> p.origin.z() >> p.resolution;
  in >> p.dims.x() >> p.dims.y() >> p.dims.z();
  VoxelGrid grid(p);
  for (int i = 0; i < grid.size(); ++i) {
    unsigned f = 0;
    in >> grid.log_odds_[i] >> f;
    grid.flags_[i] = static_cast<std::uint8_t>(f);
  }
  if (!in) throw std::runtime_error("truncated grid snapshot");
  return grid;
}

}  // namespace svfi
