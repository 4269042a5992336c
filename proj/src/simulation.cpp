#include "svfi/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "svfi/rng.hpp"

namespace svfi {

namespace {
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
}

StepResult step(const RobotModel& model, const Configuration& q, const VecX& u, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (u.size() != q.dim() || q.arm.size() != model.arm_dof())
    throw DimensionError("command dimension does not match the configuration");

  StepResult r;
  r.q = q;
  const double phi = q.base.z();
  const double v = u(0) * std::cos(phi) + u(1) * std::sin(phi);
  const double w = u(2);
  if (std::abs(w) < 1e-12) {
    r.q.base.x() += v * std::cos(phi) * dt;
    r.q.base.y() += v * std::sin(phi) * dt;
    r.q.base.z() = wrap_angle(phi + w * dt);
  } else {
    const double phi1 = phi + w * dt;
    r.q.base.x() += v / w * (std::sin(phi1) - std::sin(phi));
    r.q.base.y() -= v / w * (std::cos(phi1) - std::cos(phi));
    r.q.base.z() = wrap_angle(phi1);
  }
  for (int j = 0; j < model.arm_dof(); ++j) {
    double a = q.arm(j) + u(3 + j) * dt;
    const JointSpec& js = model.joints[j];
    if (a < js.min_angle) {
      a = js.min_angle;
      r.arm_clamped = true;
    } else if (a > js.max_angle) {
      a = js.max_angle;
      r.arm_clamped = true;
    }
    r.q.arm(j) = a;
  }
  return r;
}

const char* to_string(TerminationReason reason) {
  switch (reason) {
    case TerminationReason::InformationGainStop: return "information_gain_stop";
    case TerminationReason::TickBudget: return "tick_budget";
    case TerminationReason::EmergencyAbort: return "emergency_abort";
    case TerminationReason::PlanningFailed: return "planning_failed";
  }
  return "unknown";
}

std::vector<Vec3> default_survey_directions() {
  // Ordered so the first view sits near the start heading and consecutive
  // targets stay well away from antipodal (the direction error has a saddle
  // there); short sweeps keep the transient position drift small. The
  // vertical views are tilted: aiming the probe straight up or down parks
  // the tracking error in a near-singular task direction that decays too
  // slowly for the stall window to catch.
  const Vec3 down(-0.5, 0.0, -std::sqrt(3.0) / 2.0);
  const Vec3 up(-0.5, 0.0, std::sqrt(3.0) / 2.0);
  return {-Vec3::UnitX(), -Vec3::UnitY(), down, Vec3::UnitY(), Vec3::UnitX(), up};
}

// Rotates unit vector `current` toward `goal` by at most `max_step` radians;
// snaps exactly onto `goal` once within one step.
static Vec3 rotate_toward(const Vec3& current, const Vec3& goal, double max_step) {
  const double cosine = std::clamp(current.dot(goal), -1.0, 1.0);
  if (std::acos(cosine) <= max_step) return goal;
  Vec3 axis = current.cross(goal);
  if (axis.norm() < 1e-12) {
    axis = current.unitOrthogonal();  // antipodal; any perpendicular works
  } else {
    axis.normalize();
  }
  return (Eigen::AngleAxisd(max_step, axis) * current).normalized();
}

EpisodeOutput run_episode(const RobotModel& model, const Scene& scene,
                          const EpisodeConfig& config, std::uint64_t seed) {
  model.validate();
  scene.validate(model.arm_dof());
  const double dt = 1.0 / config.controller.rate_hz;
  const int abort_ticks =
      std::max(1, static_cast<int>(config.emergency_abort_s * config.controller.rate_hz));

  VoxelGrid grid(config.grid);
  WholeBodyController controller(model, config.controller, static_cast<int>(scene.pipes.size()));
  ReplanMonitor monitor(
      std::max(1, static_cast<int>(config.planner.stall_window_s * config.controller.rate_hz)),
      config.planner.error_norm_threshold, config.planner.stall_tolerance);

  const std::vector<Plane> true_walls = scene.walls();
  std::vector<std::optional<PlaneBelief>> beliefs(true_walls.size());
  // Running fit statistics per wall; no eviction, so every refit sees the
  // full history and the belief uncertainty shrinks monotonically. A capped
  // cloud made the chance-row bounds jitter upward on refits, which can
  // strand the base against a bound it cannot retreat from sideways.
  std::vector<PlaneAccumulator> wall_stats(true_walls.size());

  RunLog log;
  log.row_labels = controller.row_labels();

  Configuration q = scene.start;
  TaskVector target;
  {
    const TaskVector x0 = forward_kinematics(model, q);
    target.position = x0.position;
    target.direction =
        config.survey_directions.empty() ? x0.direction : config.survey_directions.front();
  }

  // The controller is fed a rate-limited reference instead of the raw set
  // point. A large direction step makes the myopic objective trade position
  // for rotation, and a large position step leaves the lag to unwind through
  // the slow lateral modes; both excursions cost far more time than the
  // shaped approach does.
  TaskVector carrot = target;
  constexpr double kCarrotRate = 1.0;   // rad/s
  constexpr double kCarrotSpeed = 0.25;  // m/s

  size_t survey_index = 0;
  bool exploring = config.survey_directions.empty();
  int plan_iteration = 0;
  int scan_counter = 0;
  int emergency_streak = 0;
  // Occupied-and-uncovered indices, rebuilt after every scan (scans are the
  // only events that create occupied voxels); coverage marking between scans
  // only removes entries.
  std::vector<int> uncovered_occupied;
  log.reason = TerminationReason::TickBudget;

  auto record_plan = [&](const std::string& phase, double gv, double gc, double gw, bool stop,
                         int at_tick) {
    PlanRecord rec;
    rec.iteration = static_cast<int>(log.plans.size());
    rec.tick = at_tick;
    rec.time = at_tick * dt;
    rec.phase = phase;
    rec.census = grid.census();
    rec.g_visual = gv;
    rec.g_coverage = gc;
    rec.g_weighted = gw;
    rec.set_point = target;
    rec.stop = stop;
    log.plans.push_back(std::move(rec));
  };

  // Scores a fresh candidate set and either adopts the best view or stops.
  auto plan_next = [&](int at_tick) -> bool {
    std::vector<Viewpoint> candidates;
    try {
      candidates = sample_candidates(grid, config.planner.candidates,
                                     derive_seed(seed, "plan-candidates", plan_iteration));
    } catch (const std::runtime_error&) {
      log.reason = TerminationReason::PlanningFailed;
      record_plan("stop", kNan, kNan, kNan, true, at_tick);
      return true;
    }
    for (size_t i = 0; i < candidates.size(); ++i) {
      Viewpoint& v = candidates[i];
      v.g_visual =
          visual_gain(grid, v, config.depth, derive_seed(seed, "plan-visual", plan_iteration, i));
      v.g_coverage = coverage_gain(grid, v, config.probe, config.planner.coverage_quantum,
                                   derive_seed(seed, "plan-coverage", plan_iteration, i));
      v.g_weighted = weighted_gain(v.g_visual, v.g_coverage, config.planner.beta);
    }
    ++plan_iteration;
    const Viewpoint& best = candidates[select_next(candidates)];
    if (should_stop(best.g_weighted, config.planner.stop_gain)) {
      log.residual_relabeled = grid.relabel_unknown_to_residual();
      log.reason = TerminationReason::InformationGainStop;
      record_plan("stop", best.g_visual, best.g_coverage, best.g_weighted, true, at_tick);
      return true;
    }
    target.position = best.position;
    target.direction = best.direction;
    record_plan("explore", best.g_visual, best.g_coverage, best.g_weighted, false, at_tick);
    return false;
  };

  record_plan(exploring ? "explore" : "survey", kNan, kNan, kNan, false, 0);

  int tick = 0;
  for (; tick < config.max_ticks; ++tick) {
    const TaskVector x = forward_kinematics(model, q);

    if (tick % config.sense_period_ticks == 0 && grid.contains(x.position)) {
      const std::vector<DepthReturn> returns = simulate_depth_scan(
          scene, x.position, x.direction, config.depth, config.noise,
          derive_seed(seed, "scan", scan_counter));
      ++scan_counter;
      grid.integrate_depth_scan(x.position, returns, config.depth.max_range);

      std::vector<bool> grew(true_walls.size(), false);
      for (const DepthReturn& ret : returns) {
        if (!ret.hit || ret.range > config.depth.max_range) continue;
        const Vec3 p = x.position + ret.direction * ret.range;
        double d1 = std::numeric_limits<double>::infinity();
        double d2 = std::numeric_limits<double>::infinity();
        size_t nearest = 0;
        for (size_t w = 0; w < true_walls.size(); ++w) {
          const double d = std::abs(point_plane_distance(p, true_walls[w]));
          if (d < d1) {
            d2 = d1;
            d1 = d;
            nearest = w;
          } else if (d < d2) {
            d2 = d;
          }
        }
        if (d1 <= config.wall_gate_primary && d2 > config.wall_gate_secondary) {
          wall_stats[nearest].add({p, std::max(config.noise.range_std, 1e-4)});
          grew[nearest] = true;
        }
      }
      for (size_t w = 0; w < true_walls.size(); ++w) {
        if (!grew[w]) continue;
        if (wall_stats[w].count < config.min_fit_points) continue;
        try {
          PlaneBelief fitted = fit_plane(wall_stats[w], config.min_fit_points);
          // The fit's sign is arbitrary; safety rows assume normals that
          // face into the room. Negating (n, d) leaves the covariance
          // unchanged.
          if (point_plane_distance(Vec3::Constant(scene.cube_side / 2.0), fitted.plane) < 0.0) {
            fitted.plane.normal = -fitted.plane.normal;
            fitted.plane.offset = -fitted.plane.offset;
          }
          beliefs[w] = fitted;
        } catch (const RankDeficiencyError&) {
          // Degenerate cloud (single stripe); keep the previous belief.
        }
      }

      uncovered_occupied.clear();
      for (int i = 0; i < grid.size(); ++i) {
        if (grid.state(i) == VoxelState::Occupied && !grid.covered(i))
          uncovered_occupied.push_back(i);
      }
    }

    {
      const Vec3 gap = target.position - carrot.position;
      const double step_len = kCarrotSpeed * dt;
      carrot.position = gap.norm() <= step_len
                            ? target.position
                            : Vec3(carrot.position + gap.normalized() * step_len);
    }
    carrot.direction = rotate_toward(carrot.direction, target.direction, kCarrotRate * dt);
    const ControlTick ct = controller.step(q, carrot, beliefs, scene.pipes);
    const StepResult sr = step(model, q, ct.u, dt);

    // Arrival and the log both use the error to the set point itself; the
    // carrot is internal shaping.
    const double target_error =
        std::sqrt((x.position - target.position).squaredNorm() +
                  (x.direction - target.direction).squaredNorm());

    TickRecord tr;
    tr.tick = tick;
    tr.time = tick * dt;
    tr.q = q.stacked();
    tr.u = ct.u;
    tr.error_norm = target_error;
    tr.status = static_cast<int>(ct.status);
    tr.emergency = ct.emergency;
    tr.arm_clamped = sr.arm_clamped;
    tr.slack_norm = ct.slack_norm;
    tr.nonholonomic_residual = ct.nonholonomic_residual;
    tr.min_velocity_margin = ct.min_velocity_margin;
    tr.min_box_margin = ct.min_box_margin;
    tr.distances = ct.distances;
    tr.margins = ct.margins;
    log.ticks.push_back(std::move(tr));

    q = sr.q;

    if (ct.emergency) {
      if (++emergency_streak > abort_ticks) {
        log.reason = TerminationReason::EmergencyAbort;
        ++tick;
        break;
      }
    } else {
      emergency_streak = 0;
    }

    const Vec3 probe_pt = point_jacobian(model, q, "probe").first;
    if (grid.contains(probe_pt)) {
      // Coverage credit is exhaustive, not ray-sampled: every uncovered
      // occupied voxel inside the probe radius with a clear line of sight is
      // marked, so a settled view credits its whole visible patch instead of
      // waiting on ray luck. The list keeps the pass linear in what is still
      // uncovered; raycasts run only for in-radius survivors.
      const int origin_index = grid.index_of(grid.voxel_of(probe_pt));
      std::vector<int> kept;
      std::vector<int> newly_covered;
      kept.reserve(uncovered_occupied.size());
      for (const int idx : uncovered_occupied) {
        if (grid.state(idx) != VoxelState::Occupied) continue;
        const Vec3 gap = grid.center_of(idx) - probe_pt;
        const double dist = gap.norm();
        if (dist > config.probe.radius) {
          kept.push_back(idx);
          continue;
        }
        bool visible = idx == origin_index;
        if (!visible) {
          const RaycastResult rc = grid.raycast(probe_pt, gap / dist, config.probe.radius);
          visible = rc.hit && rc.voxels.back() == idx;
        }
        (visible ? newly_covered : kept).push_back(idx);
      }
      uncovered_occupied.swap(kept);
      grid.mark_covered(newly_covered);
    }

    if (config.census_period_ticks > 0 && (tick + 1) % config.census_period_ticks == 0)
      record_plan("census", kNan, kNan, kNan, false, tick + 1);

    // Set points switch only on ticks whose successor opens with a scan:
    // the pose is still the settled view then, so every reached view is
    // scanned once before motion toward the next one begins.
    const bool arrived = monitor.push(target_error);
    if (arrived && (tick + 1) % config.sense_period_ticks == 0) {
      monitor.reset();
      bool done = false;
      if (!exploring) {
        ++survey_index;
        if (survey_index < config.survey_directions.size()) {
          // The survey pivots about the start pose; it was placed clear of
          // every obstacle, so the sweeps never fight the safety rows.
          target.direction = config.survey_directions[survey_index];
          record_plan("survey", kNan, kNan, kNan, false, tick + 1);
        } else {
          exploring = true;
          done = plan_next(tick + 1);
        }
      } else {
        done = plan_next(tick + 1);
      }
      if (done) {
        ++tick;
        break;
      }
    }
  }

  log.ticks_executed = tick;
  log.final_census = grid.census();
  log.wall_beliefs = beliefs;
  for (const auto& stats : wall_stats) log.wall_point_counts.push_back(stats.count);

  return EpisodeOutput{std::move(log), std::move(grid)};
}

ChanceReport run_chance_validation(const ChanceValidationConfig& config, std::uint64_t seed) {
  ChanceReport report;
  ActiveSetSolver solver;

  std::vector<double> scales = config.sigma_scales;
  if (config.include_zero_sigma) scales.insert(scales.begin(), 0.0);

  int geometry_id = 0;
  for (double alpha : config.alphas) {
    for (double scale : scales) {
      for (int g = 0; g < config.geometries_per_cell; ++g, ++geometry_id) {
        auto engine = make_engine(derive_seed(seed, "chance-cell", geometry_id));
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::normal_distribution<double> gauss(0.0, 1.0);

        ChanceParams params;
        params.alpha = alpha;
        params.eta = 0.5 + unit(engine);
        params.d_safe = 0.02 + 0.06 * unit(engine);

        Vec3 n(gauss(engine), gauss(engine), gauss(engine));
        while (n.norm() < 1e-6) n = Vec3(gauss(engine), gauss(engine), gauss(engine));
        n.normalize();
        Vec3 t(0.2 + 1.1 * unit(engine), 0.2 + 1.1 * unit(engine), 0.2 + 1.1 * unit(engine));
        const double d_hat = params.d_safe + 0.1 + 0.3 * unit(engine);
        Plane plane{n, n.dot(t) - d_hat};

        MatX j_t(3, config.dof);
        do {
          for (int r = 0; r < 3; ++r)
            for (int c = 0; c < config.dof; ++c) j_t(r, c) = 2.0 * unit(engine) - 1.0;
          // A well-scaled row keeps the desired command violating, hence
          // the constraint active at the optimum.
        } while ((plane.normal.transpose() * j_t).norm() < 0.5);

        // Offset-dominant covariance: renormalizing by |n| shifts the
        // effective threshold by eta * d_safe * (|n| - 1), so the rate
        // stays within the binomial tolerance of the linear guarantee only
        // while sigma_n * d_safe << sigma_d.
        Vec4 stds;
        for (int k = 0; k < 3; ++k) stds(k) = scale * (0.0001 + 0.0002 * unit(engine));
        stds(3) = scale * (0.03 + 0.02 * unit(engine));
        const Mat4 sigma = stds.cwiseProduct(stds).asDiagonal();

        PlaneBelief belief{plane, sigma};

        // Desired command pushes the point through the plane so the
        // surrogate row is active at the optimum.
        const VecX push = -(plane.normal.transpose() * j_t).transpose().normalized() * 2.0;

        QProblem qp;
        qp.H = 2.0 * MatX::Identity(config.dof, config.dof);
        qp.g = -2.0 * push;

        VecX qdot = VecX::Zero(config.dof);
        ConstraintRow row;
        // The buffer depends on the applied command through the zero-order
        // hold; iterate to the fixed point so the Monte Carlo evaluates the
        // same command the surrogate was built with.
        for (int it = 0; it < 100; ++it) {
          row = surrogate_row(belief, t, j_t, qdot, params, "cell");
          qp.A_in.resize(1, config.dof);
          qp.A_in.row(0) = row.coeffs;
          qp.b_in.resize(1);
          qp.b_in(0) = row.bound;
          const QPSolution sol = solver.solve(qp);
          if (sol.status != SolveStatus::Optimal)
            throw std::runtime_error("chance validation cell QP did not solve");
          if ((sol.x - qdot).norm() < 1e-13) {
            qdot = sol.x;
            break;
          }
          qdot = sol.x;
        }

        // The optimum sits on the surrogate boundary to solver precision,
        // which leaves the satisfied/violated call at sigma = 0 to the last
        // ulp. Step inside by a margin far below the activity tolerance.
        const double margin = 1e-12 * (1.0 + std::abs(row.bound));
        const double overshoot = row.coeffs.dot(qdot) - (row.bound - margin);
        if (overshoot > 0.0)
          qdot -= (overshoot / row.coeffs.squaredNorm()) * row.coeffs.transpose();

        ChanceCell cell;
        cell.alpha = alpha;
        cell.sigma_scale = scale;
        cell.geometry = geometry_id;
        cell.boundary_active =
            std::abs(row.coeffs.dot(qdot) - row.bound) <= 1e-7 * (1.0 + std::abs(row.bound));

        const ViolationRateResult mc = monte_carlo_violation_rate(
            plane, sigma, t, j_t, qdot, params, config.samples,
            derive_seed(seed, "chance-mc", geometry_id));
        cell.fraction = mc.fraction;
        cell.raw_fraction = mc.raw_fraction;
        if (scale == 0.0) {
          cell.threshold = 1.0;
          cell.pass = cell.fraction == 1.0 && cell.boundary_active;
        } else {
          cell.threshold =
              alpha - 3.0 * std::sqrt(alpha * (1.0 - alpha) / config.samples);
          cell.pass = cell.fraction >= cell.threshold && cell.boundary_active;
        }
        report.all_pass = report.all_pass && cell.pass;
        report.cells.push_back(cell);
      }
    }
  }
  return report;
}

}  // namespace svfi
