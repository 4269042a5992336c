#include "svfi/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

namespace svfi {

namespace {

using nlohmann::json;

// Tracks which keys of one JSON object were consumed; leftovers are errors.
class StrictObject {
 public:
  StrictObject(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  bool has(const std::string& key) const { return node_.contains(key); }

  const json* take(const std::string& key) {
    if (!node_.contains(key)) return nullptr;
    seen_.insert(key);
    return &node_.at(key);
  }

  void finish() const {
    for (const auto& item : node_.items()) {
      if (!seen_.count(item.key()))
        throw ConfigError(path_ + ": unknown key \"" + item.key() + "\"");
    }
  }

  const std::string& path() const { return path_; }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

double as_double(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path + ": expected a number");
  return v.get<double>();
}

void read(StrictObject& obj, const std::string& key, double* out) {
  if (const json* v = obj.take(key)) *out = as_double(*v, obj.path() + "." + key);
}

void read(StrictObject& obj, const std::string& key, int* out) {
  if (const json* v = obj.take(key)) {
    if (!v->is_number_integer()) throw ConfigError(obj.path() + "." + key + ": expected an integer");
    *out = v->get<int>();
  }
}

void read(StrictObject& obj, const std::string& key, bool* out) {
  if (const json* v = obj.take(key)) {
    if (!v->is_boolean()) throw ConfigError(obj.path() + "." + key + ": expected a boolean");
    *out = v->get<bool>();
  }
}

void read(StrictObject& obj, const std::string& key, std::string* out) {
  if (const json* v = obj.take(key)) {
    if (!v->is_string()) throw ConfigError(obj.path() + "." + key + ": expected a string");
    *out = v->get<std::string>();
  }
}

void read(StrictObject& obj, const std::string& key, std::uint64_t* out) {
  if (const json* v = obj.take(key)) {
    if (!v->is_number_unsigned() && !v->is_number_integer())
      throw ConfigError(obj.path() + "." + key + ": expected a non-negative integer");
    *out = v->get<std::uint64_t>();
  }
}

Vec3 as_vec3(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 3) throw ConfigError(path + ": expected an array of 3 numbers");
  return Vec3(as_double(v[0], path), as_double(v[1], path), as_double(v[2], path));
}

void read(StrictObject& obj, const std::string& key, Vec3* out) {
  if (const json* v = obj.take(key)) *out = as_vec3(*v, obj.path() + "." + key);
}

void read(StrictObject& obj, const std::string& key, Eigen::Vector3i* out) {
  if (const json* v = obj.take(key)) {
    const std::string path = obj.path() + "." + key;
    if (!v->is_array() || v->size() != 3) throw ConfigError(path + ": expected an array of 3 integers");
    for (int i = 0; i < 3; ++i) {
      if (!(*v)[i].is_number_integer()) throw ConfigError(path + ": expected an array of 3 integers");
      (*out)(i) = (*v)[i].get<int>();
    }
  }
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

void parse_controller(const json& node, const std::string& path, ControllerConfig* c) {
  StrictObject obj(node, path);
  read(obj, "kappa", &c->kappa);
  read(obj, "lambda_c", &c->lambda_c);
  read(obj, "lambda_s", &c->lambda_s);
  read(obj, "eta", &c->eta);
  read(obj, "alpha", &c->alpha);
  read(obj, "d_safe_base", &c->d_safe_base);
  read(obj, "d_safe_probe", &c->d_safe_probe);
  read(obj, "line_clearance", &c->line_clearance);
  read(obj, "rate_hz", &c->rate_hz);
  read(obj, "base_box_margin", &c->base_box_margin);
  read(obj, "joint_position_rows", &c->joint_position_rows);
  if (const json* solver = obj.take("solver")) {
    StrictObject s(*solver, path + ".solver");
    read(s, "tol", &c->solver.tol);
    read(s, "max_iterations", &c->solver.max_iterations);
    read(s, "regularization", &c->solver.regularization);
    s.finish();
  }
  obj.finish();
  require(c->kappa > 0.0 && c->lambda_c > 0.0 && c->lambda_s > 0.0,
          path + ": kappa, lambda_c, lambda_s must be positive");
  require(c->alpha > 0.0 && c->alpha < 1.0, path + ".alpha: must lie in (0, 1)");
  require(c->eta > 0.0, path + ".eta: must be positive");
  require(c->rate_hz > 0.0, path + ".rate_hz: must be positive");
  require(c->d_safe_base >= 0.0 && c->d_safe_probe >= 0.0 && c->line_clearance >= 0.0,
          path + ": clearances must be non-negative");
  require(c->solver.tol > 0.0 && c->solver.max_iterations > 0, path + ".solver: invalid");
}

void parse_grid(const json& node, const std::string& path, GridParams* g, bool* quantum_positive) {
  StrictObject obj(node, path);
  read(obj, "origin", &g->origin);
  read(obj, "resolution", &g->resolution);
  read(obj, "dims", &g->dims);
  double p_hit = 0.7;
  double p_miss = 0.4;
  read(obj, "p_hit", &p_hit);
  read(obj, "p_miss", &p_miss);
  read(obj, "clamp_min", &g->clamp_min);
  read(obj, "clamp_max", &g->clamp_max);
  read(obj, "p_occ_min", &g->p_occ_min);
  read(obj, "p_free_max", &g->p_free_max);
  read(obj, "coverage_quantum_positive", quantum_positive);
  obj.finish();
  require(g->resolution > 0.0, path + ".resolution: must be positive");
  require((g->dims.array() > 0).all(), path + ".dims: must be positive");
  require(p_hit > 0.5 && p_hit < 1.0, path + ".p_hit: must lie in (0.5, 1)");
  require(p_miss > 0.0 && p_miss < 0.5, path + ".p_miss: must lie in (0, 0.5)");
  require(g->clamp_min < g->clamp_max, path + ": clamp_min must be below clamp_max");
  require(g->p_occ_min > 0.5 && g->p_occ_min < 1.0, path + ".p_occ_min: must lie in (0.5, 1)");
  require(g->p_free_max > 0.0 && g->p_free_max < 0.5, path + ".p_free_max: must lie in (0, 0.5)");
  g->log_odds_hit = std::log(p_hit / (1.0 - p_hit));
  g->log_odds_miss = std::log(p_miss / (1.0 - p_miss));
  g->coverage_quantum = *quantum_positive ? std::log(2.0) : -std::log(2.0);
}

void parse_depth(const json& node, const std::string& path, DepthSensorModel* d) {
  StrictObject obj(node, path);
  read(obj, "hfov_deg", &d->hfov_deg);
  read(obj, "vfov_deg", &d->vfov_deg);
  read(obj, "max_range", &d->max_range);
  read(obj, "min_range", &d->min_range);
  read(obj, "rays", &d->rays);
  obj.finish();
  require(d->hfov_deg > 0.0 && d->hfov_deg < 180.0, path + ".hfov_deg: must lie in (0, 180)");
  require(d->vfov_deg > 0.0 && d->vfov_deg < 180.0, path + ".vfov_deg: must lie in (0, 180)");
  require(d->max_range > d->min_range && d->min_range >= 0.0, path + ": invalid range bounds");
  require(d->rays > 0, path + ".rays: must be positive");
}

void parse_probe(const json& node, const std::string& path, ProbeSensorModel* p) {
  StrictObject obj(node, path);
  read(obj, "radius", &p->radius);
  read(obj, "rays", &p->rays);
  obj.finish();
  require(p->radius > 0.0, path + ".radius: must be positive");
  require(p->rays > 0, path + ".rays: must be positive");
}

void parse_noise(const json& node, const std::string& path, DepthNoiseModel* n) {
  StrictObject obj(node, path);
  read(obj, "range_std", &n->range_std);
  read(obj, "dropout", &n->dropout);
  read(obj, "min_range_fault", &n->min_range_fault);
  obj.finish();
  require(n->range_std >= 0.0, path + ".range_std: must be non-negative");
  require(n->dropout >= 0.0 && n->dropout < 1.0, path + ".dropout: must lie in [0, 1)");
}

void parse_planner(const json& node, const std::string& path, PlannerConfig* p) {
  StrictObject obj(node, path);
  read(obj, "beta", &p->beta);
  read(obj, "candidates", &p->candidates);
  read(obj, "stop_gain", &p->stop_gain);
  read(obj, "error_norm_threshold", &p->error_norm_threshold);
  read(obj, "stall_window_s", &p->stall_window_s);
  read(obj, "stall_tolerance", &p->stall_tolerance);
  obj.finish();
  require(p->beta >= 0.0 && p->beta <= 1.0, path + ".beta: must lie in [0, 1]");
  require(p->candidates > 0, path + ".candidates: must be positive");
  require(p->error_norm_threshold > 0.0, path + ".error_norm_threshold: must be positive");
  require(p->stall_window_s > 0.0 && p->stall_tolerance > 0.0, path + ": invalid stall rule");
}

void parse_episode(const json& node, const std::string& path, EpisodeConfig* e) {
  StrictObject obj(node, path);
  read(obj, "max_ticks", &e->max_ticks);
  read(obj, "sense_period_ticks", &e->sense_period_ticks);
  read(obj, "census_period_ticks", &e->census_period_ticks);
  read(obj, "emergency_abort_s", &e->emergency_abort_s);
  read(obj, "wall_gate_primary", &e->wall_gate_primary);
  read(obj, "wall_gate_secondary", &e->wall_gate_secondary);
  read(obj, "min_fit_points", &e->min_fit_points);
  obj.finish();
  require(e->max_ticks > 0, path + ".max_ticks: must be positive");
  require(e->sense_period_ticks > 0, path + ".sense_period_ticks: must be positive");
  require(e->emergency_abort_s > 0.0, path + ".emergency_abort_s: must be positive");
  require(e->wall_gate_primary > 0.0 && e->wall_gate_secondary >= e->wall_gate_primary,
          path + ": wall gates must satisfy 0 < primary <= secondary");
  require(e->min_fit_points >= 3, path + ".min_fit_points: need at least 3");
}

Scene parse_scene_json(const json& node, const std::string& path, const RobotModel& robot,
                       const Scene& base) {
  Scene scene = base;
  StrictObject obj(node, path);
  read(obj, "cube_side", &scene.cube_side);
  if (const json* pipes = obj.take("pipes")) {
    if (!pipes->is_array()) throw ConfigError(path + ".pipes: expected an array");
    scene.pipes.clear();
    int i = 0;
    for (const json& p : *pipes) {
      StrictObject pobj(p, path + ".pipes[" + std::to_string(i) + "]");
      Line line;
      read(pobj, "point", &line.point);
      read(pobj, "direction", &line.direction);
      read(pobj, "radius", &line.radius);
      pobj.finish();
      const double norm = line.direction.norm();
      require(norm > 1e-9, pobj.path() + ".direction: must be nonzero");
      line.direction /= norm;
      scene.pipes.push_back(line);
      ++i;
    }
  }
  if (const json* start = obj.take("start")) {
    StrictObject sobj(*start, path + ".start");
    read(sobj, "base", &scene.start.base);
    if (const json* arm = sobj.take("arm")) {
      if (!arm->is_array()) throw ConfigError(path + ".start.arm: expected an array");
      scene.start.arm.resize(arm->size());
      for (size_t i = 0; i < arm->size(); ++i)
        scene.start.arm(i) = as_double((*arm)[i], path + ".start.arm");
    }
    sobj.finish();
  }
  obj.finish();
  scene.validate(robot.arm_dof());
  return scene;
}

}  // namespace

RobotModel default_robot_model() {
  RobotModel m;
  m.base.height = 0.15;
  m.base.forward_velocity_limit = 0.4;
  m.base.yaw_rate_limit = 1.0;
  m.mount = Eigen::Isometry3d::Identity();
  m.mount.translate(Vec3(0.10, 0.0, 0.30));
  m.joints = {
      {Vec3(0.0, 0.0, 0.10), Vec3::UnitZ(), -2.9, 2.9, 1.0},
      {Vec3(0.05, 0.0, 0.05), Vec3::UnitY(), -2.6, 2.6, 1.0},
      {Vec3(0.40, 0.0, 0.0), Vec3::UnitY(), -2.8, 2.8, 1.0},
      // Z-Y wrist pair close to the tip: pointing the probe barely moves it,
      // so view changes stay in the wrist instead of dragging the arm along,
      // and arm translation needs almost no wrist counter-rotation. The long
      // upper links keep fine positioning in the arm, where it is fast,
      // rather than in base maneuvering.
      // Wide wrist-yaw travel: consecutive view changes wind this joint in
      // one direction, and with no position term in the objective nothing
      // unwinds it; a tight stop turns later set points into limit crawls.
      {Vec3(0.40, 0.0, 0.0), Vec3::UnitZ(), -6.0, 6.0, 1.0},
      {Vec3(0.10, 0.0, 0.0), Vec3::UnitY(), -2.2, 2.2, 1.0},
      {Vec3(0.03, 0.0, 0.0), Vec3::UnitX(), -2.9, 2.9, 1.0},
  };
  m.ee_offset = Vec3(0.03, 0.0, 0.0);
  m.ee_axis = Vec3::UnitX();
  // Front-bumper reference, not the yaw axis: a point on the axis has a
  // zero yaw column, and when the heading runs parallel to a wall at the
  // standoff bound no command can move such a point away from the wall;
  // the QP then reports infeasible on numerical drift. With the forward
  // offset, yaw and forward speed together always span the retreat
  // direction.
  m.attachments["base_center"] = {0, Vec3(0.10, 0.0, 0.15)};
  m.attachments["elbow"] = {3, Vec3(0.125, 0.0, 0.0)};
  m.attachments["probe"] = {6, Vec3(0.03, 0.0, 0.0)};
  return m;
}

Scene make_scene(const std::string& name, const RobotModel& robot) {
  Scene scene;
  scene.cube_side = 1.5;
  // Tucked start in the back corner, reaching diagonally toward the room
  // center: probe at (0.46, 1.04, 0.48). Keeping the whole chain away from
  // the pipe planes matters more than wall clearance: an attachment parked
  // on a safety surface can only move tangentially, which turns set-point
  // approach into a crawl. Every margin here is at least 0.17 m in the
  // built-in scenes and every joint is at no more than ~71% of its limit.
  scene.start.base = Vec3(0.97, 0.53, 3.0 * M_PI / 4.0);
  scene.start.arm = VecX::Zero(robot.arm_dof());
  if (robot.arm_dof() == 6) {
    scene.start.arm << 0.0, -1.4, 2.0, 0.0, -0.15, 0.0;
  }
  if (name == "empty") {
    // no pipes
  } else if (name == "one_pipe") {
    scene.pipes.push_back({Vec3(1.15, 0.75, 0.75), Vec3::UnitY(), 0.05});
  } else if (name == "three_pipes") {
    scene.pipes.push_back({Vec3(1.15, 0.75, 0.75), Vec3::UnitY(), 0.05});
    scene.pipes.push_back({Vec3(0.75, 1.2, 0.45), Vec3::UnitX(), 0.04});
    scene.pipes.push_back({Vec3(0.4, 0.75, 1.1), Vec3::UnitY(), 0.04});
  } else {
    throw ConfigError("unknown scene: " + name);
  }
  scene.validate(robot.arm_dof());
  return scene;
}

ExperimentConfig default_config() {
  ExperimentConfig cfg;
  cfg.robot = default_robot_model();
  cfg.scene = make_scene(cfg.scene_name, cfg.robot);
  cfg.episode.controller.workspace_min = Vec3::Zero();
  cfg.episode.controller.workspace_max = Vec3::Constant(cfg.scene.cube_side);
  cfg.episode.controller.base_box_margin = 0.05;
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& err) {
    throw ConfigError(std::string("config parse error: ") + err.what());
  }

  ExperimentConfig cfg = default_config();
  StrictObject obj(root, "config");
  int schema = 1;
  read(obj, "schema_version", &schema);
  require(schema == 1, "config.schema_version: only version 1 is supported");
  read(obj, "name", &cfg.name);
  read(obj, "seed", &cfg.seed);
  read(obj, "output_dir", &cfg.output_dir);
  read(obj, "robot", &cfg.robot_name);
  require(cfg.robot_name == "default", "config.robot: only \"default\" is available");
  cfg.robot = default_robot_model();

  read(obj, "scene", &cfg.scene_name);

  bool quantum_positive = true;
  if (const json* node = obj.take("controller"))
    parse_controller(*node, "config.controller", &cfg.episode.controller);
  if (const json* node = obj.take("grid"))
    parse_grid(*node, "config.grid", &cfg.episode.grid, &quantum_positive);
  if (const json* node = obj.take("depth"))
    parse_depth(*node, "config.depth", &cfg.episode.depth);
  if (const json* node = obj.take("probe"))
    parse_probe(*node, "config.probe", &cfg.episode.probe);
  if (const json* node = obj.take("noise"))
    parse_noise(*node, "config.noise", &cfg.episode.noise);
  if (const json* node = obj.take("planner"))
    parse_planner(*node, "config.planner", &cfg.episode.planner);
  if (const json* node = obj.take("episode"))
    parse_episode(*node, "config.episode", &cfg.episode);
  obj.finish();

  cfg.episode.planner.coverage_quantum = cfg.episode.grid.coverage_quantum;

  // Scene resolution: a scenes/<name>.json next to the config wins over the
  // built-in layout of the same name.
  const Scene base = [&] {
    try {
      return make_scene(cfg.scene_name, cfg.robot);
    } catch (const ConfigError&) {
      Scene s;
      s.start.arm = VecX::Zero(cfg.robot.arm_dof());
      return s;
    }
  }();
  const std::filesystem::path scene_file =
      std::filesystem::path(path).parent_path() / "scenes" / (cfg.scene_name + ".json");
  if (std::filesystem::exists(scene_file)) {
    std::ifstream sin(scene_file);
    if (!sin) throw ConfigError("cannot open scene: " + scene_file.string());
    json snode;
    try {
      snode = json::parse(sin);
    } catch (const json::parse_error& err) {
      throw ConfigError(std::string("scene parse error: ") + err.what());
    }
    cfg.scene = parse_scene_json(snode, "scene", cfg.robot, base);
  } else {
    cfg.scene = make_scene(cfg.scene_name, cfg.robot);  // throws on unknown name
  }

  // The hard workspace box follows the scene cube.
  cfg.episode.controller.workspace_min = Vec3::Zero();
  cfg.episode.controller.workspace_max = Vec3::Constant(cfg.scene.cube_side);

  // The grid must cover the cube exactly at the configured resolution.
  for (int i = 0; i < 3; ++i) {
    const double span = cfg.episode.grid.dims(i) * cfg.episode.grid.resolution;
    require(span + 1e-9 >= cfg.scene.cube_side,
            "config.grid: dims * resolution must cover the scene cube");
  }

  return cfg;
}

}  // namespace svfi
