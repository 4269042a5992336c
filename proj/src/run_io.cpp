#include "svfi/run_io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>

#include <json.hpp>

namespace svfi {

namespace {

std::ofstream open_new(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  return out;
}

void append_census_header(std::string* line) {
  *line += ",unknown,free,occupied,residual,covered,total,mean_entropy";
}

void append_census(std::string* line, const Census& c) {
  *line += ',' + std::to_string(c.unknown);
  *line += ',' + std::to_string(c.free);
  *line += ',' + std::to_string(c.occupied);
  *line += ',' + std::to_string(c.residual);
  *line += ',' + std::to_string(c.covered);
  *line += ',' + std::to_string(c.total);
  *line += ',' + format_double(c.mean_entropy);
}

nlohmann::json belief_to_json(const PlaneBelief& b) {
  nlohmann::json j;
  j["normal"] = {b.plane.normal.x(), b.plane.normal.y(), b.plane.normal.z()};
  j["offset"] = b.plane.offset;
  std::vector<double> cov;
  cov.reserve(16);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) cov.push_back(b.covariance(r, c));
  j["covariance"] = cov;
  return j;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::filesystem::path create_unique_dir(const std::filesystem::path& preferred) {
  std::filesystem::create_directories(preferred.parent_path().empty()
                                          ? std::filesystem::path(".")
                                          : preferred.parent_path());
  std::filesystem::path candidate = preferred;
  for (int suffix = 1; std::filesystem::exists(candidate); ++suffix)
    candidate = preferred.string() + "-" + std::to_string(suffix);
  std::filesystem::create_directory(candidate);
  return candidate;
}

void write_tick_csv(const std::filesystem::path& path, const RunLog& log) {
  std::ofstream out = open_new(path);
  out << "# schema: svfi-ticks-1\n";

  const int n = log.ticks.empty() ? 0 : static_cast<int>(log.ticks.front().q.size());
  std::string header = "tick,t";
  auto joint_names = [&](const char* prefix) {
    std::string h;
    h += std::string(",") + prefix + "_x";
    h += std::string(",") + prefix + "_y";
    h += std::string(",") + prefix + "_phi";
    for (int j = 0; j + 3 < n; ++j) h += std::string(",") + prefix + "_arm" + std::to_string(j);
    return h;
  };
  header += joint_names("q");
  header += joint_names("u");
  header += ",err_norm,status,emergency,arm_clamped,slack_norm,nonholo_residual";
  header += ",min_vel_margin,min_box_margin";
  for (const std::string& label : log.row_labels) header += ",dist:" + label;
  for (const std::string& label : log.row_labels) header += ",margin:" + label;
  out << header << '\n';

  std::string line;
  for (const TickRecord& t : log.ticks) {
    line.clear();
    line += std::to_string(t.tick);
    line += ',' + format_double(t.time);
    for (int i = 0; i < t.q.size(); ++i) line += ',' + format_double(t.q(i));
    for (int i = 0; i < t.u.size(); ++i) line += ',' + format_double(t.u(i));
    line += ',' + format_double(t.error_norm);
    line += ',' + std::to_string(t.status);
    line += ',' + std::to_string(t.emergency ? 1 : 0);
    line += ',' + std::to_string(t.arm_clamped ? 1 : 0);
    line += ',' + format_double(t.slack_norm);
    line += ',' + format_double(t.nonholonomic_residual);
    line += ',' + format_double(t.min_velocity_margin);
    line += ',' + format_double(t.min_box_margin);
    for (double d : t.distances) line += ',' + format_double(d);
    for (double m : t.margins) line += ',' + format_double(m);
    out << line << '\n';
  }
}

void write_plan_csv(const std::filesystem::path& path, const RunLog& log) {
  std::ofstream out = open_new(path);
  out << "# schema: svfi-plans-1\n";
  std::string header = "iteration,tick,t,phase";
  append_census_header(&header);
  header += ",g_visual,g_coverage,g_weighted,sp_x,sp_y,sp_z,sp_dx,sp_dy,sp_dz,stop";
  out << header << '\n';

  std::string line;
  for (const PlanRecord& p : log.plans) {
    line.clear();
    line += std::to_string(p.iteration);
    line += ',' + std::to_string(p.tick);
    line += ',' + format_double(p.time);
    line += ',' + p.phase;
    append_census(&line, p.census);
    line += ',' + format_double(p.g_visual);
    line += ',' + format_double(p.g_coverage);
    line += ',' + format_double(p.g_weighted);
    for (int i = 0; i < 3; ++i) line += ',' + format_double(p.set_point.position(i));
    for (int i = 0; i < 3; ++i) line += ',' + format_double(p.set_point.direction(i));
    line += ',' + std::to_string(p.stop ? 1 : 0);
    out << line << '\n';
  }
}

void write_summary_json(const std::filesystem::path& path, const RunLog& log,
                        const std::string& config_name, const std::string& scene_name,
                        std::uint64_t seed) {
  nlohmann::json j;
  j["schema"] = "svfi-summary-1";
  j["config"] = config_name;
  j["scene"] = scene_name;
  j["seed"] = seed;
  j["termination"] = to_string(log.reason);
  j["ticks"] = log.ticks_executed;
  j["plan_iterations"] = log.plans.size();
  j["residual_relabeled"] = log.residual_relabeled;
  j["census"] = {
      {"unknown", log.final_census.unknown},     {"free", log.final_census.free},
      {"occupied", log.final_census.occupied},   {"residual", log.final_census.residual},
      {"covered", log.final_census.covered},     {"total", log.final_census.total},
      {"mean_entropy", log.final_census.mean_entropy},
  };
  nlohmann::json walls = nlohmann::json::array();
  for (size_t w = 0; w < log.wall_beliefs.size(); ++w) {
    nlohmann::json entry;
    entry["wall"] = w;
    entry["points"] = w < log.wall_point_counts.size() ? log.wall_point_counts[w] : 0;
    if (log.wall_beliefs[w])
      entry["belief"] = belief_to_json(*log.wall_beliefs[w]);
    else
      entry["belief"] = nullptr;
    walls.push_back(entry);
  }
  j["walls"] = walls;

  std::ofstream out = open_new(path);
  out << j.dump(2) << '\n';
}

void print_error_record(const std::string& stage, const std::string& message) {
  nlohmann::json j;
  j["schema"] = "svfi-error-1";
  j["stage"] = stage;
  j["message"] = message;
  std::cerr << j.dump() << std::endl;
}

void write_aggregate_csv(const std::filesystem::path& path, const std::vector<RunLog>& logs,
                         int bins) {
  if (bins <= 0) throw std::invalid_argument("bins must be positive");
  std::ofstream out = open_new(path);
  out << "# schema: svfi-aggregate-1\n";
  out << "t_norm";
  const char* fields[6] = {"unknown_frac", "free_frac",    "occupied_frac",
                           "residual_frac", "covered_frac", "mean_entropy"};
  for (const char* f : fields)
    out << ',' << f << "_mean," << f << "_min," << f << "_max";
  out << '\n';

  auto census_values = [](const Census& c) {
    const double total = static_cast<double>(std::max<long>(c.total, 1));
    return std::array<double, 6>{c.unknown / total,  c.free / total,    c.occupied / total,
                                 c.residual / total, c.covered / total, c.mean_entropy};
  };

  for (int b = 0; b < bins; ++b) {
    const double edge = static_cast<double>(b + 1) / bins;
    std::array<double, 6> mean{}, mn, mx;
    mn.fill(std::numeric_limits<double>::infinity());
    mx.fill(-std::numeric_limits<double>::infinity());
    for (const RunLog& log : logs) {
      // Last plan record at or before the bin's right edge of this trial's
      // normalized time axis.
      const double horizon = std::max(1, log.ticks_executed);
      const Census* last = nullptr;
      for (const PlanRecord& p : log.plans) {
        if (p.tick / horizon <= edge + 1e-12) last = &p.census;
      }
      if (last == nullptr && !log.plans.empty()) last = &log.plans.front().census;
      if (last == nullptr) continue;
      const auto v = census_values(*last);
      for (int i = 0; i < 6; ++i) {
        mean[i] += v[i];
        mn[i] = std::min(mn[i], v[i]);
        mx[i] = std::max(mx[i], v[i]);
      }
    }
    const double count = logs.empty() ? 1.0 : static_cast<double>(logs.size());
    std::string line = format_double(edge);
    for (int i = 0; i < 6; ++i) {
      line += ',' + format_double(mean[i] / count);
      line += ',' + format_double(mn[i]);
      line += ',' + format_double(mx[i]);
    }
    out << line << '\n';
  }
}

}  // namespace svfi
