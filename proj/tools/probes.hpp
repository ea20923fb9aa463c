#pragma once

// Config-driven probe runners shared by the command line and the acceptance
// suite. Every subcommand reads one ExperimentConfig and returns its verdict
// plus the files it would write.

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace finitype::cli {

struct CutoffSpec {
    std::string kind = "default";  // default | uniform | bump | plateau
    std::vector<double> center;
    double radius = 0.0;
};

struct ExperimentConfig {
    std::string subcommand;
    std::string mode;                  // variant of the subcommand, "" when it has one
    std::vector<std::string> targets;  // surfaces or distributions
    CutoffSpec cutoff;
    std::vector<double> direction;
    std::vector<double> p;
    std::vector<std::string> expect;  // per p: plateau | growth
    int range_lo = 0;                 // shells or j
    int range_hi = 0;
    int samples = 0;                  // per shell, random functions, symbols...
    int levels = 0;                   // partition depth J or band half-width
    std::vector<int> resolutions;
    std::vector<double> times;
    int t_octave_lo = 0;  // t-grid 2^lo .. 2^hi
    int t_octave_hi = 0;
    int per_octave = 0;
    std::uint64_t seed = 1;
    std::string output_dir = "out";
    std::map<std::string, double> tolerances;
};

const std::vector<std::string>& subcommands();
// Acceptance-suite defaults for a subcommand and mode; ConfigInvalid on unknown names.
ExperimentConfig default_config(const std::string& subcommand, const std::string& mode = "");

nlohmann::ordered_json config_to_json(const ExperimentConfig& c);
// Missing keys keep the subcommand defaults; unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);
std::string dump_config(const ExperimentConfig& c);
void validate(const ExperimentConfig& c);

struct RunResult {
    bool pass = false;
    std::string headline;  // one line of measured values
    nlohmann::ordered_json summary;
    std::vector<std::pair<std::string, std::string>> files;  // name, contents
};

// Runs the probe; Error propagates.
RunResult run(const ExperimentConfig& c);

// Writes summary.json, the artifacts and manifest.json into c.output_dir.
void write_run(const ExperimentConfig& c, const RunResult& r, double seconds, int threads);

}  // namespace finitype::cli
