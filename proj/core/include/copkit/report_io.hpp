#pragma once

// CSV emission for the artifacts the subcommands produce: fit-report ranking
// tables, best-solution rows, GA traces and convergence curves.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "copkit/genopt.hpp"
#include "copkit/scenario.hpp"
#include "copkit/surrogate.hpp"

namespace copkit {

// Ranked by (train_fraction desc, rmse_test asc); failed cells sink to the end.
void write_fit_reports_csv(const std::vector<FitReport>& reports, const std::string& path);

struct BestRow {
    std::array<double, 6> genes{};
    double best_fitness = 0.0;
    std::int64_t evaluations = 0;
    std::optional<double> simulated_mean_sinr_db;
};

void write_best_csv(const BestRow& row, const std::string& path);
BestRow read_best_csv(const std::string& path);

// generation,evaluations,best_fitness,cio1..hom3
void write_ga_trace_csv(const GaRun& run, const std::string& path);

// evaluations,best_fitness
void write_convergence_csv(const std::vector<ConvergencePoint>& trace, const std::string& path);

// Per-user SINR rows with the KPI summary in '#' metadata lines.
void write_kpi_report_csv(const NetworkScenario& scenario, const MobilityConfig& config,
                          const KpiReport& report, const std::string& path);

}  // namespace copkit
