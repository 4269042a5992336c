#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "svfi/simulation.hpp"

namespace svfi {

// Shortest representation that round-trips the exact double; "nan"/"inf"
// for non-finite values. Keeps repeated runs byte-identical.
std::string format_double(double v);

// Creates `preferred` (parents included); when it already exists, tries
// preferred-1, preferred-2, ... so existing results are never overwritten.
std::filesystem::path create_unique_dir(const std::filesystem::path& preferred);

void write_tick_csv(const std::filesystem::path& path, const RunLog& log);

void write_plan_csv(const std::filesystem::path& path, const RunLog& log);

void write_summary_json(const std::filesystem::path& path, const RunLog& log,
                        const std::string& config_name, const std::string& scene_name,
                        std::uint64_t seed);

// Machine-readable failure record on stderr (single JSON line).
void print_error_record(const std::string& stage, const std::string& message);

// Per normalized-time bin, the mean/min/max across trials of the voxel
// state fractions, the covered fraction and the mean entropy; each trial's
// census is a step function of its plan records sampled at the bin's right
// edge.
void write_aggregate_csv(const std::filesystem::path& path, const std::vector<RunLog>& logs,
                         int bins);

}  // namespace svfi
