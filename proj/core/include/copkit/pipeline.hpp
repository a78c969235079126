#pragma once

// End-to-end orchestration: scenario -> sweep -> train -> optimize, with
// fail-fast validation, derived per-stage seeds and artifact reuse keyed by
// a fingerprint manifest.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "copkit/datagen.hpp"
#include "copkit/genopt.hpp"
#include "copkit/report_io.hpp"
#include "copkit/scenario.hpp"
#include "copkit/surrogate.hpp"

namespace copkit {

struct PipelineConfig {
    std::optional<std::string> scenario_file;  // read this world instead of generating one
    std::optional<std::uint64_t> seed;         // global seed; stages derive fixed offsets
    LayoutParams layout;                       // used when generating
    ParameterGrid grid;
    std::string model_family = "gbrt";
    double train_fraction = 1.0;
    SurrogateParams surrogate;
    std::optional<std::string> external_csv;  // required when model_family == "external"
    GaConfig ga;
    std::string out_dir = "out";
    int jobs = 0;  // sweep parallelism hint; 0 = hardware concurrency
};

// Fixed offsets applied to the global seed, so each stage is individually
// reproducible.
inline constexpr std::uint64_t kScenarioSeedOffset = 0;
inline constexpr std::uint64_t kTrainSeedOffset = 2;
inline constexpr std::uint64_t kGaSeedOffset = 3;

// Parses the JSON config file; unknown keys are errors.
PipelineConfig load_pipeline_config(const std::string& json_path);

// Throws ConfigError when any stage input is unresolvable. Called by
// run_pipeline before any compute.
void validate(const PipelineConfig& config);

struct PipelineResult {
    std::string scenario_path;
    std::string dataset_path;
    std::string model_path;
    std::string report_path;
    std::string best_path;
    std::string trace_path;
    BestRow best;
    int stages_reused = 0;
};

// Runs every stage, reusing an artifact when it exists and its fingerprint
// in <out_dir>/manifest.json still matches. Stage errors are rethrown with
// the stage name; artifacts written so far stay on disk. The optimize stage
// searches the swept lattice, so best.csv names a config the simulator
// scored, with both its predicted and simulated KPI.
PipelineResult run_pipeline(const PipelineConfig& config, std::ostream& log);

}  // namespace copkit
