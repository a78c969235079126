#include "copkit/report_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "copkit/errors.hpp"
#include "text_util.hpp"

namespace copkit {

namespace {

using detail::format_fixed;
using detail::parse_double;
using detail::parse_int;
using detail::split;
using detail::trim;

constexpr int kDecimals = 6;

std::ofstream open_for_write(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    return out;
}

}  // namespace

void write_fit_reports_csv(const std::vector<FitReport>& reports, const std::string& path) {
    std::vector<FitReport> ranked = reports;
    std::stable_sort(ranked.begin(), ranked.end(), [](const FitReport& a, const FitReport& b) {
        if (a.train_fraction != b.train_fraction) return a.train_fraction > b.train_fraction;
        const bool a_ok = std::isfinite(a.rmse_test);
        const bool b_ok = std::isfinite(b.rmse_test);
        if (a_ok != b_ok) return a_ok;
        return a.rmse_test < b.rmse_test;
    });

    std::ofstream out = open_for_write(path);
    out << "model_name,train_fraction,n_train,n_test,rmse_train,rmse_test,seed,error\n";
    for (const FitReport& r : ranked) {
        out << r.model_name << ',' << format_fixed(r.train_fraction, kDecimals) << ',' << r.n_train
            << ',' << r.n_test << ',' << format_fixed(r.rmse_train, kDecimals) << ','
            << format_fixed(r.rmse_test, kDecimals) << ',' << r.seed << ',' << r.error << "\n";
    }
}

void write_best_csv(const BestRow& row, const std::string& path) {
    std::ofstream out = open_for_write(path);
    out << "cio1,cio2,cio3,hom1,hom2,hom3,best_fitness,evaluations";
    if (row.simulated_mean_sinr_db) out << ",simulated_mean_sinr_db";
    out << "\n";
    for (double g : row.genes) out << format_fixed(g, kDecimals) << ',';
    out << format_fixed(row.best_fitness, kDecimals) << ',' << row.evaluations;
    if (row.simulated_mean_sinr_db)
        out << ',' << format_fixed(*row.simulated_mean_sinr_db, kDecimals);
    out << "\n";
}

BestRow read_best_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::string header, line;
    if (!std::getline(in, header) || !std::getline(in, line))
        throw ParseError(path + ": expected a header and one row");
    auto f = split(trim(line), ',');
    if (f.size() < 8) throw ParseError(path + ": expected at least 8 fields", 2);
    BestRow row;
    for (std::size_t i = 0; i < 6; ++i) row.genes[i] = parse_double(f[i], 2);
    row.best_fitness = parse_double(f[6], 2);
    row.evaluations = parse_int(f[7], 2);
    if (f.size() > 8) row.simulated_mean_sinr_db = parse_double(f[8], 2);
    return row;
}

void write_ga_trace_csv(const GaRun& run, const std::string& path) {
    std::ofstream out = open_for_write(path);
    out << "generation,evaluations,best_fitness,cio1,cio2,cio3,hom1,hom2,hom3\n";
    for (const GaTracePoint& p : run.trace) {
        out << p.generation << ',' << p.evaluations << ',' << format_fixed(p.best_fitness, kDecimals);
        for (double g : p.best_genes) out << ',' << format_fixed(g, kDecimals);
        out << "\n";
    }
}

void write_convergence_csv(const std::vector<ConvergencePoint>& trace, const std::string& path) {
    std::ofstream out = open_for_write(path);
    out << "evaluations,best_fitness\n";
    for (const ConvergencePoint& p : trace)
        out << p.evaluations << ',' << format_fixed(p.best_fitness, kDecimals) << "\n";
}

void write_kpi_report_csv(const NetworkScenario& scenario, const MobilityConfig& config,
                          const KpiReport& report, const std::string& path) {
    std::ofstream out = open_for_write(path);
    out << "# copkit-simulate v1\n";
    out << "# mean_sinr_db = " << format_fixed(report.mean_sinr_db, kDecimals) << "\n";
    out << "# capacity = " << format_fixed(report.capacity, kDecimals) << "\n";
    out << "# outage_count = " << report.outage_count << "\n";
    out << "# users_in_mean = " << report.per_user_sinr_db.size() << "\n";
    out << "ue_id,serving_sector_id,sinr_db\n";
    for (const auto& [ue_id, sinr] : report.per_user_sinr_db) {
        const auto it = std::find_if(scenario.users.begin(), scenario.users.end(),
                                     [&](const UserEquipment& ue) { return ue.ue_id == ue_id; });
        if (it == scenario.users.end())
            throw ConfigError("report names ue " + std::to_string(ue_id) +
                              " which the scenario does not contain");
        const AssociationResult assoc = associate(scenario, config, *it);
        out << ue_id << ',' << *assoc.serving_sector_id << ',' << format_fixed(sinr, kDecimals)
            << "\n";
    }
}

}  // namespace copkit
