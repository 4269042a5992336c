#pragma once

#include <cstdint>
#include <string>

#include "svfi/simulation.hpp"

namespace svfi {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string name = "default";
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  std::string robot_name = "default";
  std::string scene_name = "three_pipes";
  RobotModel robot;
  Scene scene;
  EpisodeConfig episode;
};

// The fixed mobile manipulator used by every experiment: differential-drive
// base with a 6R arm, probe/camera on the last link, attachments for the
// base center, elbow and probe.
RobotModel default_robot_model();

// Built-in scenes: empty, one_pipe, three_pipes. All share the cube and
// start pose and differ in the pipe layout.
Scene make_scene(const std::string& name, const RobotModel& robot);

ExperimentConfig default_config();

// Strict load: unknown keys anywhere in the file are rejected, values are
// range-checked, and keys omitted from the file keep their defaults. The
// scene is named by "scene"; a sibling scenes/<name>.json overrides the
// built-in layout when present.
ExperimentConfig load_config(const std::string& path);

}  // namespace svfi
