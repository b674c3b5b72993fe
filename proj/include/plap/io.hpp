#pragma once

// Run artifacts: per-run series CSV and JSON manifest.

#include "plap/dynamics.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace plap {

/// %.17g, with "inf"/"-inf"/"nan" for non-finite values.
std::string format_double(double v);

/// Header t,dt,linf,l1[,l<q>...],s_monitor followed by one row per output.
std::string series_csv(const RunRecord& record);

nlohmann::ordered_json run_manifest(const RunRecord& record);

void write_text(const std::filesystem::path& path, const std::string& text);

/// Writes series.csv and manifest.json into `dir`, creating it if needed.
void write_run(const RunRecord& record, const std::filesystem::path& dir);

}  // namespace plap
