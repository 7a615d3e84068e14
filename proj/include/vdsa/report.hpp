#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "vdsa/experiments.hpp"

namespace vdsa {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

/// Writes a header and rows; throws IoError naming the path on failure.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

/// `git describe` of the source tree at configure time.
std::string git_describe();

nlohmann::json to_json(const BoundsExperimentConfig& config);
nlohmann::json to_json(const SweepConfig& config);
nlohmann::json to_json(const MemoryExperimentConfig& config);
nlohmann::json to_json(const TrafficScenario& scenario);
nlohmann::json to_json(const PlatoonExperimentConfig& config);

/// FNV-1a of the compact JSON dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& config);

struct ReportContext {
  std::filesystem::path out_dir;
  std::vector<std::uint64_t> seeds;
  /// Extra inputs (such as the trace scenario), hashed under "inputs".
  nlohmann::json inputs = nullptr;
};

/// Each emitter writes `<id>_*.csv` plus `<id>_manifest.json` into
/// ctx.out_dir (created if absent) and returns every path written.
std::vector<std::filesystem::path> emit_report(const BoundsExperimentResult& result, const ReportContext& ctx);
std::vector<std::filesystem::path> emit_report(const SweepResult& result, const ReportContext& ctx);
std::vector<std::filesystem::path> emit_report(const MemoryExperimentResult& result, const ReportContext& ctx);
std::vector<std::filesystem::path> emit_report(const PlatoonExperimentResult& result, const ReportContext& ctx);

/// Writes the manifest for an arbitrary set of files.
std::filesystem::path write_manifest(const std::string& experiment_id, const nlohmann::json& config,
                                     const ReportContext& ctx, const std::vector<std::filesystem::path>& files,
                                     const nlohmann::json& summary);

}  // namespace vdsa
