#pragma once

#include <vector>

#include "svfi/kinematics.hpp"
#include "svfi/primitives.hpp"
#include "svfi/types.hpp"

namespace svfi {

// Ground-truth world: a cubic workspace with inward-facing wall planes and
// up to a few straight pipes, plus the start configuration.
struct Scene {
  double cube_side = 1.5;
  std::vector<Line> pipes;
  Configuration start;

  // Inward-facing planes in a fixed order: x-, x+, y-, y+, z- (floor),
  // z+ (ceiling).
  std::vector<Plane> walls() const {
    std::vector<Plane> w(6);
    w[0] = {Vec3::UnitX(), 0.0};
    w[1] = {-Vec3::UnitX(), -cube_side};
    w[2] = {Vec3::UnitY(), 0.0};
    w[3] = {-Vec3::UnitY(), -cube_side};
    w[4] = {Vec3::UnitZ(), 0.0};
    w[5] = {-Vec3::UnitZ(), -cube_side};
    return w;
  }

  void validate(int arm_dof) const {
    if (!(cube_side > 0.0)) throw std::invalid_argument("cube side must be positive");
    if (pipes.size() > 3) throw std::invalid_argument("at most three pipes supported");
    for (const Line& p : pipes) {
      p.validate();
      if (!(p.radius > 0.0)) throw std::invalid_argument("pipe radius must be positive");
    }
    if (start.arm.size() != arm_dof)
      throw DimensionError("scene start configuration does not match the robot");
  }
};

}  // namespace svfi
