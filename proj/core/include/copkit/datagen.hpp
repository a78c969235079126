#pragma once

// CIO x HOM grid enumeration, simulator sweeps and the CSV dataset format.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "copkit/scenario.hpp"

namespace copkit {

struct ParameterGrid {
    double cio_min = -10.0;
    double cio_max = 10.0;
    double cio_step = 2.0;
    double hom_min = 0.0;
    double hom_max = 10.0;
    double hom_step = 2.0;
    int n_target_sectors = 3;

    std::vector<double> cio_values() const;
    std::vector<double> hom_values() const;
    std::uint64_t cardinality() const;  // |cio|^3 * |hom|^3
};

void validate(const ParameterGrid& grid);

// Hard refusal thresholds: grids larger than these cannot be materialized /
// driven through the simulator.
inline constexpr std::uint64_t kEnumerationGuard = 100'000'000;
inline constexpr std::uint64_t kSweepGuard = 1'000'000;

// Visits every lattice config in lexicographic (cio1, cio2, cio3, hom1, hom2,
// hom3) order without materializing the grid.
void for_each_grid_config(const ParameterGrid& grid,
                          const std::function<void(const MobilityConfig&)>& fn);

// Materialized enumeration in the same order. Refuses grids beyond the guard.
std::vector<MobilityConfig> enumerate_grid(const ParameterGrid& grid);

// Nearest lattice point, per axis.
MobilityConfig snap_to_grid(const ParameterGrid& grid, const MobilityConfig& config);

struct SweepRecord {
    MobilityConfig config;
    double mean_sinr_db = 0.0;  // NaN flags a fully-outage configuration
    int outage_count = 0;
};

struct SweepDataset {
    std::vector<SweepRecord> records;
    std::uint64_t scenario_seed = 0;
    ParameterGrid grid;
    int schema_version = 1;
};

// One record per lattice config, in enumeration order regardless of how many
// worker threads run (hint <= 0 picks the hardware concurrency). Fully-outage
// configs are recorded with a NaN KPI, never dropped. Refuses grids beyond
// kSweepGuard.
SweepDataset run_sweep(const NetworkScenario& scenario, const ParameterGrid& grid,
                       int parallelism_hint = 0);

// Uniform sample without replacement keeping the original record order;
// sample size is floor(fraction * count).
SweepDataset subsample(const SweepDataset& dataset, double fraction, std::uint64_t seed);

// CSV with a fixed 8-column header; floats carry 6 decimals; grid and seed
// metadata travel in '#' comment lines.
void write_csv(const SweepDataset& dataset, const std::string& path);
SweepDataset read_csv(const std::string& path);

}  // namespace copkit
