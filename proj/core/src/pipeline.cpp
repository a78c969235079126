#include "copkit/pipeline.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "copkit/errors.hpp"
#include "text_util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace copkit {

namespace {

using detail::fnv1a64;
using detail::format_double;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string hex64(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

std::string describe(const LayoutParams& p) {
    std::ostringstream s;
    const RadioConstants& c = p.constants;
    s << c.carrier_frequency_mhz << '|' << c.tx_power_dbm << '|' << c.antenna_gain_dbi << '|'
      << c.min_rsrp_dbm << '|' << c.selection_threshold_db << '|' << c.noise_power_dbm << '|'
      << c.pathloss_exponent << '|' << c.pathloss_ref_db << '|' << c.ref_distance_m << '|'
      << p.site_count << '|' << p.sectors_per_site << '|' << p.user_count << '|'
      << p.inter_site_distance_m << '|' << p.region_half_extent_m << '|' << p.sector_load << '|'
      << p.prb_count << '|' << p.non_target_cio_db << '|' << p.non_target_hom_db;
    return s.str();
}

std::string describe(const ParameterGrid& g) {
    std::ostringstream s;
    s << g.cio_min << '|' << g.cio_max << '|' << g.cio_step << '|' << g.hom_min << '|' << g.hom_max
      << '|' << g.hom_step;
    return s.str();
}

std::string describe(const GaConfig& g) {
    std::ostringstream s;
    s << g.population_size << '|' << g.max_generations << '|' << g.elite_count << '|' << g.sbx_eta
      << '|' << g.mutation_eta << '|' << g.mutation_prob << '|' << g.seed << '|'
      << g.stagnation_patience;
    return s.str();
}

class Manifest {
public:
    explicit Manifest(fs::path path) : path_(std::move(path)) {
        if (fs::exists(path_)) {
            try {
                entries_ = json::parse(read_file(path_.string()));
            } catch (const std::exception&) {
                entries_ = json::object();  // stale manifest, rebuild as stages run
            }
        } else {
            entries_ = json::object();
        }
    }

    bool matches(const std::string& artifact, const std::string& fingerprint) const {
        return entries_.contains(artifact) && entries_[artifact] == fingerprint;
    }

    void record(const std::string& artifact, const std::string& fingerprint) {
        entries_[artifact] = fingerprint;
        std::ofstream out(path_);
        if (!out) throw ConfigError("cannot write manifest '" + path_.string() + "'");
        out << entries_.dump(2) << "\n";
    }

private:
    fs::path path_;
    json entries_;
};

template <typename Fn>
auto stage(const char* name, Fn&& fn) {
    try {
        return fn();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("stage '") + name + "' failed: " + e.what());
    }
}

void merge_layout(const json& j, LayoutParams& layout) {
    for (const auto& [key, value] : j.items()) {
        if (key == "site_count") layout.site_count = value.get<int>();
        else if (key == "sectors_per_site") layout.sectors_per_site = value.get<int>();
        else if (key == "user_count") layout.user_count = value.get<int>();
        else if (key == "inter_site_distance_m") layout.inter_site_distance_m = value.get<double>();
        else if (key == "region_half_extent_m") layout.region_half_extent_m = value.get<double>();
        else if (key == "sector_load") layout.sector_load = value.get<double>();
        else if (key == "prb_count") layout.prb_count = value.get<int>();
        else if (key == "non_target_cio_db") layout.non_target_cio_db = value.get<double>();
        else if (key == "non_target_hom_db") layout.non_target_hom_db = value.get<double>();
        else if (key == "tx_power_dbm") layout.constants.tx_power_dbm = value.get<double>();
        else if (key == "antenna_gain_dbi") layout.constants.antenna_gain_dbi = value.get<double>();
        else if (key == "min_rsrp_dbm") layout.constants.min_rsrp_dbm = value.get<double>();
        else if (key == "selection_threshold_db")
            layout.constants.selection_threshold_db = value.get<double>();
        else if (key == "noise_power_dbm") layout.constants.noise_power_dbm = value.get<double>();
        else if (key == "pathloss_exponent") layout.constants.pathloss_exponent = value.get<double>();
        else if (key == "pathloss_ref_db") layout.constants.pathloss_ref_db = value.get<double>();
        else if (key == "ref_distance_m") layout.constants.ref_distance_m = value.get<double>();
        else if (key == "carrier_frequency_mhz")
            layout.constants.carrier_frequency_mhz = value.get<double>();
        else throw ConfigError("unknown scenario key '" + key + "'");
    }
}

void merge_grid(const json& j, ParameterGrid& grid) {
    for (const auto& [key, value] : j.items()) {
        if (key == "cio_min") grid.cio_min = value.get<double>();
        else if (key == "cio_max") grid.cio_max = value.get<double>();
        else if (key == "cio_step") grid.cio_step = value.get<double>();
        else if (key == "hom_min") grid.hom_min = value.get<double>();
        else if (key == "hom_max") grid.hom_max = value.get<double>();
        else if (key == "hom_step") grid.hom_step = value.get<double>();
        else throw ConfigError("unknown grid key '" + key + "'");
    }
}

void merge_model(const json& j, PipelineConfig& config) {
    for (const auto& [key, value] : j.items()) {
        if (key == "family") config.model_family = value.get<std::string>();
        else if (key == "train_fraction") config.train_fraction = value.get<double>();
        else if (key == "external_csv") config.external_csv = value.get<std::string>();
        else if (key == "knn_k") config.surrogate.knn_k = value.get<int>();
        else if (key == "gbrt_trees") config.surrogate.gbrt_trees = value.get<int>();
        else if (key == "gbrt_max_depth") config.surrogate.gbrt_max_depth = value.get<int>();
        else if (key == "gbrt_learning_rate")
            config.surrogate.gbrt_learning_rate = value.get<double>();
        else if (key == "gbrt_l2_lambda") config.surrogate.gbrt_l2_lambda = value.get<double>();
        else if (key == "test_fraction") config.surrogate.test_fraction = value.get<double>();
        else throw ConfigError("unknown model key '" + key + "'");
    }
}

void merge_ga(const json& j, GaConfig& ga) {
    for (const auto& [key, value] : j.items()) {
        if (key == "population_size") ga.population_size = value.get<int>();
        else if (key == "max_generations") ga.max_generations = value.get<int>();
        else if (key == "elite_count") ga.elite_count = value.get<int>();
        else if (key == "sbx_eta") ga.sbx_eta = value.get<double>();
        else if (key == "mutation_eta") ga.mutation_eta = value.get<double>();
        else if (key == "mutation_prob") ga.mutation_prob = value.get<double>();
        else if (key == "stagnation_patience") ga.stagnation_patience = value.get<int>();
        else throw ConfigError("unknown ga key '" + key + "'");
    }
}

}  // namespace

PipelineConfig load_pipeline_config(const std::string& json_path) {
    json j;
    try {
        j = json::parse(read_file(json_path));
    } catch (const json::exception& e) {
        throw ParseError(json_path + ": " + e.what());
    }

    PipelineConfig config;
    for (const auto& [key, value] : j.items()) {
        if (key == "seed") config.seed = value.get<std::uint64_t>();
        else if (key == "out_dir") config.out_dir = value.get<std::string>();
        else if (key == "jobs") config.jobs = value.get<int>();
        else if (key == "scenario") {
            if (value.contains("file")) {
                config.scenario_file = value["file"].get<std::string>();
                if (value.size() != 1)
                    throw ConfigError("scenario.file excludes other scenario keys");
            } else {
                merge_layout(value, config.layout);
            }
        } else if (key == "grid") merge_grid(value, config.grid);
        else if (key == "model") merge_model(value, config);
        else if (key == "ga") merge_ga(value, config.ga);
        else throw ConfigError("unknown pipeline key '" + key + "'");
    }
    return config;
}

void validate(const PipelineConfig& config) {
    if (config.scenario_file) {
        if (!fs::exists(*config.scenario_file))
            throw ConfigError("scenario file '" + *config.scenario_file + "' does not exist");
    } else if (!config.seed) {
        throw ConfigError("no scenario file and no seed: nothing determines the world");
    }
    validate(config.grid);
    if (config.grid.cardinality() > kSweepGuard)
        throw ConfigError("pipeline grid exceeds the sweep guard");
    if (config.model_family != "linear" && config.model_family != "knn" &&
        config.model_family != "gbrt" && config.model_family != "external")
        throw ConfigError("unknown model family '" + config.model_family + "'");
    if (config.model_family == "external") {
        if (!config.external_csv) throw ConfigError("model family 'external' needs external_csv");
        if (!fs::exists(*config.external_csv))
            throw ConfigError("external predictions file '" + *config.external_csv +
                              "' does not exist");
    }
    if (!(config.train_fraction > 0.0 && config.train_fraction <= 1.0))
        throw ConfigError("train_fraction must lie in (0, 1]");
    GaConfig ga = config.ga;
    ga.seed = 0;
    validate(ga);
    if (config.out_dir.empty()) throw ConfigError("out_dir must not be empty");
}

PipelineResult run_pipeline(const PipelineConfig& config, std::ostream& log) {
    validate(config);

    const std::uint64_t seed = config.seed.value_or(0);
    fs::create_directories(config.out_dir);
    Manifest manifest(fs::path(config.out_dir) / "manifest.json");

    PipelineResult result;
    const fs::path out_dir(config.out_dir);
    result.scenario_path = (out_dir / "scenario.txt").string();
    result.dataset_path = (out_dir / "dataset.csv").string();
    result.model_path = (out_dir / "model.bin").string();
    result.report_path = (out_dir / "report.csv").string();
    result.best_path = (out_dir / "best.csv").string();
    result.trace_path = (out_dir / "trace.csv").string();

    // --- scenario ---
    std::string scenario_fp;
    if (config.scenario_file) {
        scenario_fp = hex64(fnv1a64("scenario|file|" + read_file(*config.scenario_file)));
    } else {
        scenario_fp = hex64(fnv1a64("scenario|seed|" + std::to_string(seed + kScenarioSeedOffset) +
                                    '|' + describe(config.layout)));
    }
    NetworkScenario scenario = stage("scenario", [&] {
        if (manifest.matches("scenario.txt", scenario_fp) && fs::exists(result.scenario_path)) {
            log << "[pipeline] scenario: reusing " << result.scenario_path << "\n";
            ++result.stages_reused;
            return read_scenario_file(result.scenario_path);
        }
        NetworkScenario s = config.scenario_file
                                ? read_scenario_file(*config.scenario_file)
                                : generate_scenario(seed + kScenarioSeedOffset, config.layout);
        write_scenario_file(s, result.scenario_path);
        manifest.record("scenario.txt", scenario_fp);
        log << "[pipeline] scenario: wrote " << result.scenario_path << " (" << s.sectors.size()
            << " sectors, " << s.users.size() << " users)\n";
        return s;
    });

    // --- sweep --- (the worker count must not influence the artifact)
    const std::string dataset_fp =
        hex64(fnv1a64("sweep|" + scenario_fp + '|' + describe(config.grid)));
    SweepDataset dataset = stage("sweep", [&] {
        if (manifest.matches("dataset.csv", dataset_fp) && fs::exists(result.dataset_path)) {
            log << "[pipeline] sweep: reusing " << result.dataset_path << "\n";
            ++result.stages_reused;
            return read_csv(result.dataset_path);
        }
        SweepDataset d = run_sweep(scenario, config.grid, config.jobs);
        write_csv(d, result.dataset_path);
        manifest.record("dataset.csv", dataset_fp);
        log << "[pipeline] sweep: wrote " << result.dataset_path << " (" << d.records.size()
            << " records)\n";
        return d;
    });

    // --- train ---
    std::ostringstream train_desc;
    train_desc << "train|" << dataset_fp << '|' << config.model_family << '|'
               << config.train_fraction << '|' << config.surrogate.knn_k << '|'
               << config.surrogate.gbrt_trees << '|' << config.surrogate.gbrt_max_depth << '|'
               << config.surrogate.gbrt_learning_rate << '|' << config.surrogate.gbrt_l2_lambda
               << '|' << config.surrogate.test_fraction << '|' << seed + kTrainSeedOffset;
    if (config.external_csv) train_desc << "|ext|" << read_file(*config.external_csv);
    const std::string model_fp = hex64(fnv1a64(train_desc.str()));
    TrainedModel model = stage("train", [&] {
        if (manifest.matches("model.bin", model_fp) && fs::exists(result.model_path) &&
            fs::exists(result.report_path)) {
            log << "[pipeline] train: reusing " << result.model_path << "\n";
            ++result.stages_reused;
            return read_model(result.model_path);
        }
        const std::vector<FeatureRow> rows = to_feature_rows(dataset);
        ExternalTable external;
        const ExternalTable* external_ptr = nullptr;
        if (config.model_family == "external") {
            external = load_external_table(*config.external_csv);
            external_ptr = &external;
        }
        TrainedModel m = train_model(rows, config.model_family, config.train_fraction,
                                     seed + kTrainSeedOffset, config.surrogate, external_ptr);
        write_model(m, result.model_path);
        // The comparison table mirrors the full/sparse training protocol.
        std::vector<FitReport> reports =
            evaluate_models(rows, {1.0, 0.1}, seed + kTrainSeedOffset, config.surrogate);
        write_fit_reports_csv(reports, result.report_path);
        manifest.record("model.bin", model_fp);
        log << "[pipeline] train: wrote " << result.model_path << " (test RMSE "
            << format_double(m.report.rmse_test) << " dB)\n";
        return m;
    });

    // --- optimize ---
    GaConfig ga = config.ga;
    ga.seed = seed + kGaSeedOffset;
    const std::string best_fp = hex64(fnv1a64("optimize|" + model_fp + '|' + describe(ga)));
    stage("optimize", [&] {
        if (manifest.matches("best.csv", best_fp) && fs::exists(result.best_path) &&
            fs::exists(result.trace_path)) {
            log << "[pipeline] optimize: reusing " << result.best_path << "\n";
            ++result.stages_reused;
            result.best = read_best_csv(result.best_path);
            return 0;
        }
        // The search stays on the swept lattice so the chosen config is one
        // the simulator scored and best.csv rows join against dataset.csv.
        GaRun run = run_ga(fitness_from_model(model), ga, GeneBounds{}, &config.grid);
        result.best.genes = run.best.genes;
        result.best.best_fitness = *run.best.fitness;
        result.best.evaluations = run.total_evaluations;
        // Close the loop: score the chosen config in the simulator.
        try {
            result.best.simulated_mean_sinr_db =
                evaluate_kpi(scenario, to_config(run.best.genes)).mean_sinr_db;
        } catch (const DegenerateKpiError&) {
            result.best.simulated_mean_sinr_db = std::numeric_limits<double>::quiet_NaN();
        }
        write_best_csv(result.best, result.best_path);
        write_ga_trace_csv(run, result.trace_path);
        manifest.record("best.csv", best_fp);
        log << "[pipeline] optimize: wrote " << result.best_path << " (predicted "
            << format_double(result.best.best_fitness) << " dB in " << run.total_evaluations
            << " evaluations)\n";
        return 0;
    });

    return result;
}

}  // namespace copkit
