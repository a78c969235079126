#include "copkit/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <thread>

#include "copkit/errors.hpp"
#include "rng_util.hpp"
#include "text_util.hpp"

namespace copkit {

namespace {

using detail::format_double;
using detail::format_fixed;
using detail::parse_double;
using detail::parse_int;
using detail::trim;

constexpr const char* kCsvHeader = "cio1,cio2,cio3,hom1,hom2,hom3,mean_sinr_db,outage_count";
constexpr int kCsvDecimals = 6;

std::vector<double> axis_values(double lo, double hi, double step) {
    // The +1e-9 slack keeps counts stable when (hi - lo) / step lands on an
    // integer up to rounding.
    int n = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
    std::vector<double> values(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) values[static_cast<std::size_t>(i)] = lo + i * step;
    return values;
}

double snap_axis(double value, double lo, double step, int count) {
    int i = static_cast<int>(std::lround((value - lo) / step));
    i = std::clamp(i, 0, count - 1);
    return lo + i * step;
}

}  // namespace

void validate(const ParameterGrid& grid) {
    if (!(grid.cio_step > 0.0) || !(grid.hom_step > 0.0))
        throw ConfigError("grid steps must be positive");
    if (grid.cio_min > grid.cio_max || grid.hom_min > grid.hom_max)
        throw ConfigError("grid min must not exceed max");
    if (grid.n_target_sectors != 3)
        throw ConfigError("grids are defined over exactly 3 target sectors");
    if (grid.cio_min < kCioMinDb || grid.cio_max > kCioMaxDb)
        throw ConfigError("cio grid leaves the [-10, 10] dB range");
    if (grid.hom_min < kHomMinDb || grid.hom_max > kHomMaxDb)
        throw ConfigError("hom grid leaves the [0, 10] dB range");
}

std::vector<double> ParameterGrid::cio_values() const {
    return axis_values(cio_min, cio_max, cio_step);
}

std::vector<double> ParameterGrid::hom_values() const {
    return axis_values(hom_min, hom_max, hom_step);
}

std::uint64_t ParameterGrid::cardinality() const {
    auto c = static_cast<std::uint64_t>(cio_values().size());
    auto h = static_cast<std::uint64_t>(hom_values().size());
    return c * c * c * h * h * h;
}

void for_each_grid_config(const ParameterGrid& grid,
                          const std::function<void(const MobilityConfig&)>& fn) {
    validate(grid);
    const std::vector<double> cio = grid.cio_values();
    const std::vector<double> hom = grid.hom_values();
    MobilityConfig config;
    for (double c1 : cio) {
        config.cio_db[0] = c1;
        for (double c2 : cio) {
            config.cio_db[1] = c2;
            for (double c3 : cio) {
                config.cio_db[2] = c3;
                for (double h1 : hom) {
                    config.hom_db[0] = h1;
                    for (double h2 : hom) {
                        config.hom_db[1] = h2;
                        for (double h3 : hom) {
                            config.hom_db[2] = h3;
                            fn(config);
                        }
                    }
                }
            }
        }
    }
}

std::vector<MobilityConfig> enumerate_grid(const ParameterGrid& grid) {
    validate(grid);
    const std::uint64_t count = grid.cardinality();
    if (count > kEnumerationGuard)
        throw ConfigError("grid cardinality " + std::to_string(count) +
                          " exceeds the enumeration guard of " + std::to_string(kEnumerationGuard));
    std::vector<MobilityConfig> configs;
    configs.reserve(count);
    for_each_grid_config(grid, [&](const MobilityConfig& c) { configs.push_back(c); });
    return configs;
}

MobilityConfig snap_to_grid(const ParameterGrid& grid, const MobilityConfig& config) {
    validate(grid);
    const int nc = static_cast<int>(grid.cio_values().size());
    const int nh = static_cast<int>(grid.hom_values().size());
    MobilityConfig snapped;
    for (std::size_t i = 0; i < 3; ++i) {
        snapped.cio_db[i] = snap_axis(config.cio_db[i], grid.cio_min, grid.cio_step, nc);
        snapped.hom_db[i] = snap_axis(config.hom_db[i], grid.hom_min, grid.hom_step, nh);
    }
    return snapped;
}

SweepDataset run_sweep(const NetworkScenario& scenario, const ParameterGrid& grid,
                       int parallelism_hint) {
    validate(scenario);
    validate(grid);
    const std::uint64_t count = grid.cardinality();
    if (count > kSweepGuard)
        throw ConfigError("grid cardinality " + std::to_string(count) +
                          " exceeds the sweep guard of " + std::to_string(kSweepGuard) +
                          "; sweep a coarser grid");

    SweepDataset dataset;
    dataset.scenario_seed = scenario.rng_seed;
    dataset.grid = grid;
    const std::vector<MobilityConfig> configs = enumerate_grid(grid);
    dataset.records.resize(configs.size());

    auto evaluate_range = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            SweepRecord& record = dataset.records[i];
            record.config = configs[i];
            try {
                KpiReport report = evaluate_kpi(scenario, configs[i]);
                record.mean_sinr_db = report.mean_sinr_db;
                record.outage_count = report.outage_count;
            } catch (const DegenerateKpiError& e) {
                record.mean_sinr_db = std::numeric_limits<double>::quiet_NaN();
                record.outage_count = e.outage_count();
            }
        }
    };

    std::size_t workers = parallelism_hint > 0 ? static_cast<std::size_t>(parallelism_hint)
                                               : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, configs.size());
    if (workers <= 1) {
        evaluate_range(0, configs.size());
        return dataset;
    }

    // Static block partition: record i is always computed by the same pure
    // call, so the dataset does not depend on the worker count.
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(workers);
    const std::size_t chunk = (configs.size() + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(begin + chunk, configs.size());
        threads.emplace_back([&, w, begin, end] {
            try {
                evaluate_range(begin, end);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (std::thread& t : threads) t.join();
    for (const std::exception_ptr& e : errors)
        if (e) std::rethrow_exception(e);
    return dataset;
}

SweepDataset subsample(const SweepDataset& dataset, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw ConfigError("subsample fraction must lie in (0, 1]");
    const auto n = dataset.records.size();
    const auto m = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
    if (m < 1) throw ConfigError("subsample would be empty");

    SweepDataset out;
    out.scenario_seed = dataset.scenario_seed;
    out.grid = dataset.grid;
    out.schema_version = dataset.schema_version;
    out.records.reserve(m);
    for (std::size_t idx : detail::sample_indices(n, m, seed))
        out.records.push_back(dataset.records[idx]);
    return out;
}

void write_csv(const SweepDataset& dataset, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    const ParameterGrid& g = dataset.grid;
    out << "# copkit-sweep v" << dataset.schema_version << "\n";
    out << "# scenario_seed = " << dataset.scenario_seed << "\n";
    out << "# grid = cio " << format_double(g.cio_min) << ' ' << format_double(g.cio_max) << ' '
        << format_double(g.cio_step) << " hom " << format_double(g.hom_min) << ' '
        << format_double(g.hom_max) << ' ' << format_double(g.hom_step) << "\n";
    out << kCsvHeader << "\n";
    for (const SweepRecord& r : dataset.records) {
        for (double v : r.config.cio_db) out << format_fixed(v, kCsvDecimals) << ',';
        for (double v : r.config.hom_db) out << format_fixed(v, kCsvDecimals) << ',';
        out << format_fixed(r.mean_sinr_db, kCsvDecimals) << ',' << r.outage_count << "\n";
    }
    if (!out) throw ConfigError("failed writing '" + path + "'");
}

SweepDataset read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open dataset file '" + path + "'");

    SweepDataset dataset;
    std::string line;
    int line_no = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view text = trim(line);
        if (text.empty()) continue;
        if (text.front() == '#') {
            auto f = detail::split(std::string(text.substr(1)), '=');
            if (f.size() == 2) {
                std::string key(trim(f[0]));
                std::string value(trim(f[1]));
                if (key == "scenario_seed") {
                    dataset.scenario_seed = static_cast<std::uint64_t>(parse_int(value, line_no));
                } else if (key == "grid") {
                    auto g = detail::split(value, ' ');
                    if (g.size() != 8 || g[0] != "cio" || g[4] != "hom")
                        throw ParseError("malformed grid metadata", line_no);
                    dataset.grid.cio_min = parse_double(g[1], line_no);
                    dataset.grid.cio_max = parse_double(g[2], line_no);
                    dataset.grid.cio_step = parse_double(g[3], line_no);
                    dataset.grid.hom_min = parse_double(g[5], line_no);
                    dataset.grid.hom_max = parse_double(g[6], line_no);
                    dataset.grid.hom_step = parse_double(g[7], line_no);
                }
            }
            continue;
        }
        if (!saw_header) {
            auto expected = detail::split(kCsvHeader, ',');
            auto got = detail::split(text, ',');
            for (auto& g : got) g = std::string(trim(g));
            for (const std::string& column : expected)
                if (std::find(got.begin(), got.end(), column) == got.end())
                    throw ParseError("missing column '" + column + "'", line_no);
            if (got.size() != expected.size() ||
                !std::equal(got.begin(), got.end(), expected.begin()))
                throw ParseError("unexpected dataset header", line_no);
            saw_header = true;
            continue;
        }
        auto f = detail::split(text, ',');
        if (f.size() != 8) throw ParseError("expected 8 fields", line_no);
        SweepRecord record;
        for (std::size_t i = 0; i < 3; ++i) record.config.cio_db[i] = parse_double(f[i], line_no);
        for (std::size_t i = 0; i < 3; ++i) record.config.hom_db[i] = parse_double(f[3 + i], line_no);
        record.mean_sinr_db = parse_double(f[6], line_no);
        record.outage_count = static_cast<int>(parse_int(f[7], line_no));
        dataset.records.push_back(record);
    }
    if (!saw_header) throw ParseError(path + ": no dataset header found");
    return dataset;
}

}  // namespace copkit
