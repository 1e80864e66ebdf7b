#pragma once

#include "ddsim/simulation.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace ddsim {

/// Parse a spec document. Unknown keys and wrong types raise ConfigError
/// naming the offending key. A document with a top-level "spec" object
/// (a run manifest) is parsed from that object. Relative profile paths are
/// resolved against `base_dir`.
ExperimentSpec parse_spec(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
ExperimentSpec load_spec(const std::filesystem::path& path);

/// Fully resolved spec; parse_spec(spec_to_json(s)) == s.
nlohmann::json spec_to_json(const ExperimentSpec& spec);

/// scheme,mode,F,snr_db,nu_max,frame_index,trials,ber,ber_ci,nmse_db,se
void write_csv(std::ostream& out, const std::vector<MetricRow>& rows);
std::string format_csv(const std::vector<MetricRow>& rows);

struct RunManifest {
    ExperimentSpec spec;
    std::string version;
    std::string started_utc;
    double wall_clock_s = 0.0;
    std::vector<std::string> outputs;
    std::vector<CellFailure> failures;
};

nlohmann::json manifest_to_json(const RunManifest& manifest);

/// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

std::string library_version();

}  // namespace ddsim
