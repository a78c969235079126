// copkit command-line front end. Every subcommand is a thin wrapper over the
// library: simulate, sweep, train, optimize, bruteforce, compare, pipeline.

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "copkit/datagen.hpp"
#include "copkit/errors.hpp"
#include "copkit/genopt.hpp"
#include "copkit/pipeline.hpp"
#include "copkit/report_io.hpp"
#include "copkit/scenario.hpp"
#include "copkit/surrogate.hpp"

namespace {

using namespace copkit;

struct ScenarioSource {
    std::string file;
    std::uint64_t gen_seed = 0;
    bool has_gen_seed = false;
    std::string save_path;

    void add_options(CLI::App* cmd) {
        auto* file_opt = cmd->add_option("--scenario", file, "Scenario file to load");
        auto* seed_opt =
            cmd->add_option("--gen-seed", gen_seed, "Generate the canonical scenario from a seed")
                ->excludes(file_opt);
        file_opt->excludes(seed_opt);
        cmd->add_option("--save-scenario", save_path,
                        "Write the scenario in use to this file");
        cmd->callback([this, seed_opt] { has_gen_seed = seed_opt->count() > 0; });
    }

    NetworkScenario resolve() const {
        if (file.empty() && !has_gen_seed)
            throw ConfigError("either --scenario or --gen-seed is required");
        NetworkScenario scenario =
            file.empty() ? generate_scenario(gen_seed) : read_scenario_file(file);
        if (!save_path.empty()) write_scenario_file(scenario, save_path);
        return scenario;
    }
};

void add_grid_options(CLI::App* cmd, ParameterGrid& grid) {
    cmd->add_option("--cio-min", grid.cio_min, "CIO grid minimum (dB)")->capture_default_str();
    cmd->add_option("--cio-max", grid.cio_max, "CIO grid maximum (dB)")->capture_default_str();
    cmd->add_option("--cio-step", grid.cio_step, "CIO grid step (dB)")->capture_default_str();
    cmd->add_option("--hom-min", grid.hom_min, "HOM grid minimum (dB)")->capture_default_str();
    cmd->add_option("--hom-max", grid.hom_max, "HOM grid maximum (dB)")->capture_default_str();
    cmd->add_option("--hom-step", grid.hom_step, "HOM grid step (dB)")->capture_default_str();
}

void add_ga_options(CLI::App* cmd, GaConfig& ga) {
    cmd->add_option("--pop", ga.population_size, "Population size")->capture_default_str();
    cmd->add_option("--gens", ga.max_generations, "Maximum generations")->capture_default_str();
    cmd->add_option("--elites", ga.elite_count, "Elite count (even)")->capture_default_str();
    cmd->add_option("--sbx-eta", ga.sbx_eta, "SBX distribution index")->capture_default_str();
    cmd->add_option("--mutation-eta", ga.mutation_eta, "Mutation distribution index")
        ->capture_default_str();
    cmd->add_option("--mutation-prob", ga.mutation_prob, "Per-gene mutation probability")
        ->capture_default_str();
    cmd->add_option("--patience", ga.stagnation_patience,
                    "Generations without improvement before stopping")
        ->capture_default_str();
    cmd->add_option("--seed", ga.seed, "GA random seed")->capture_default_str();
}

std::array<double, 3> parse_triplet(const std::string& text, const char* what) {
    std::array<double, 3> values{};
    std::stringstream ss(text);
    std::string field;
    std::size_t i = 0;
    while (std::getline(ss, field, ',')) {
        if (i >= 3) throw ConfigError(std::string(what) + " needs exactly 3 comma-separated values");
        try {
            values[i++] = std::stod(field);
        } catch (const std::exception&) {
            throw ConfigError(std::string(what) + ": '" + field + "' is not a number");
        }
    }
    if (i != 3) throw ConfigError(std::string(what) + " needs exactly 3 comma-separated values");
    return values;
}

int cmd_simulate(const ScenarioSource& source, const std::string& cio, const std::string& hom,
                 const std::string& out) {
    NetworkScenario scenario = source.resolve();
    MobilityConfig config;
    config.cio_db = parse_triplet(cio, "--cio");
    config.hom_db = parse_triplet(hom, "--hom");
    KpiReport report = evaluate_kpi(scenario, config);
    write_kpi_report_csv(scenario, config, report, out);
    std::cout << "mean_sinr_db " << report.mean_sinr_db << "\n"
              << "capacity " << report.capacity << "\n"
              << "outage_count " << report.outage_count << "\n"
              << "users_in_mean " << report.per_user_sinr_db.size() << "\n"
              << "report " << out << "\n";
    return 0;
}

int cmd_sweep(const ScenarioSource& source, const ParameterGrid& grid, const std::string& out,
              double fraction, std::uint64_t seed, int jobs) {
    NetworkScenario scenario = source.resolve();
    SweepDataset dataset = run_sweep(scenario, grid, jobs);
    if (fraction < 1.0) dataset = subsample(dataset, fraction, seed);
    write_csv(dataset, out);
    std::cout << "records " << dataset.records.size() << "\n" << "dataset " << out << "\n";
    return 0;
}

int cmd_train(const std::string& data, const std::string& family, double fraction,
              std::uint64_t seed, const SurrogateParams& params, const std::string& external_csv,
              const std::string& out, const std::string& report_path) {
    const std::vector<FeatureRow> rows = to_feature_rows(read_csv(data));
    ExternalTable external;
    const ExternalTable* external_ptr = nullptr;
    if (family == "external") {
        if (external_csv.empty()) throw ConfigError("--model external needs --external <csv>");
        external = load_external_table(external_csv);
        external_ptr = &external;
    }
    TrainedModel model = train_model(rows, family, fraction, seed, params, external_ptr);
    write_model(model, out);
    if (!report_path.empty()) write_fit_reports_csv({model.report}, report_path);
    std::cout << "family " << model.family() << "\n"
              << "rmse_train " << model.report.rmse_train << "\n"
              << "rmse_test " << model.report.rmse_test << "\n"
              << "model " << out << "\n";
    return 0;
}

int cmd_optimize(const std::string& model_path, const GaConfig& ga, bool snap,
                 const ParameterGrid& grid, const std::string& trace_path,
                 const std::string& out) {
    TrainedModel model = read_model(model_path);
    GaRun run = run_ga(fitness_from_model(model), ga, GeneBounds{}, snap ? &grid : nullptr);
    BestRow best;
    best.genes = run.best.genes;
    best.best_fitness = *run.best.fitness;
    best.evaluations = run.total_evaluations;
    write_best_csv(best, out);
    if (!trace_path.empty()) write_ga_trace_csv(run, trace_path);
    std::cout << "best_fitness " << best.best_fitness << "\n"
              << "evaluations " << best.evaluations << "\n"
              << "best " << out << "\n";
    return 0;
}

int cmd_bruteforce(const std::string& model_path, const ParameterGrid& grid,
                   const std::string& out) {
    TrainedModel model = read_model(model_path);
    BruteForceResult result = brute_force(fitness_from_model(model), grid);
    BestRow best;
    best.genes = to_features(result.best_config);
    best.best_fitness = result.best_fitness;
    best.evaluations = result.evaluations;
    write_best_csv(best, out);
    std::cout << "best_fitness " << result.best_fitness << "\n"
              << "evaluations " << result.evaluations << "\n"
              << "best " << out << "\n";
    return 0;
}

int cmd_compare(const std::string& model_path, const ParameterGrid& grid, const GaConfig& ga,
                bool no_snap, const std::string& out_dir) {
    TrainedModel model = read_model(model_path);
    std::filesystem::create_directories(out_dir);
    ComparisonReport report = compare(fitness_from_model(model), grid, ga, !no_snap);

    const std::filesystem::path dir(out_dir);
    write_convergence_csv(report.ga_trace, (dir / "ga_trace.csv").string());
    write_convergence_csv(report.brute_trace, (dir / "brute_trace.csv").string());

    std::ofstream summary(dir / "compare.csv");
    if (!summary) throw ConfigError("cannot write compare.csv");
    summary << "metric,value\n";
    summary << "brute_best_fitness," << report.brute.best_fitness << "\n";
    summary << "brute_evaluations," << report.brute.evaluations << "\n";
    summary << "ga_best_raw," << report.ga_best_raw << "\n";
    summary << "ga_best_on_lattice," << report.ga_best_on_lattice << "\n";
    summary << "ga_evaluations," << report.ga.total_evaluations << "\n";
    summary << "gap_db," << report.gap_db << "\n";
    summary << "speedup," << report.speedup << "\n";

    std::cout << "brute_best " << report.brute.best_fitness << " in "
              << report.brute.evaluations << " evaluations\n"
              << "ga_best " << report.ga_best_on_lattice << " in " << report.ga.total_evaluations
              << " evaluations\n"
              << "gap_db " << report.gap_db << "\n"
              << "speedup " << report.speedup << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"copkit: COP sweep, surrogate modeling and GA search for a snapshot LTE-like network"};
    app.require_subcommand(1);

    // --- simulate ---
    auto* simulate = app.add_subcommand("simulate", "Evaluate the KPI for one COP configuration");
    ScenarioSource sim_source;
    sim_source.add_options(simulate);
    std::string sim_cio = "0,0,0", sim_hom = "0,0,0", sim_out = "report.csv";
    simulate->add_option("--cio", sim_cio, "Target-sector CIO values, dB (a,b,c)")
        ->capture_default_str();
    simulate->add_option("--hom", sim_hom, "Target-sector HOM values, dB (d,e,f)")
        ->capture_default_str();
    simulate->add_option("--out", sim_out, "Per-user KPI report CSV")->capture_default_str();

    // --- sweep ---
    auto* sweep = app.add_subcommand("sweep", "Run the simulator over a CIO x HOM grid");
    ScenarioSource sweep_source;
    sweep_source.add_options(sweep);
    ParameterGrid sweep_grid;
    add_grid_options(sweep, sweep_grid);
    std::string sweep_out = "dataset.csv";
    double sweep_fraction = 1.0;
    std::uint64_t sweep_seed = 0;
    int sweep_jobs = 0;
    sweep->add_option("--out", sweep_out, "Dataset CSV path")->capture_default_str();
    sweep->add_option("--fraction", sweep_fraction, "Keep this fraction of records (subsample)")
        ->capture_default_str();
    sweep->add_option("--seed", sweep_seed, "Subsample seed")->capture_default_str();
    sweep->add_option("--jobs", sweep_jobs, "Worker threads (0 = hardware)")
        ->envname("COPKIT_JOBS")
        ->capture_default_str();

    // --- train ---
    auto* train = app.add_subcommand("train", "Fit a surrogate model on a sweep dataset");
    std::string train_data, train_family = "gbrt", train_external, train_out = "model.bin",
                train_report = "report.csv";
    double train_fraction = 1.0;
    std::uint64_t train_seed = 0;
    SurrogateParams train_params;
    train->add_option("--data", train_data, "Sweep dataset CSV")->required();
    train->add_option("--model", train_family, "Model family")
        ->check(CLI::IsMember({"linear", "knn", "gbrt", "external"}))
        ->capture_default_str();
    train->add_option("--external", train_external,
                      "Predictions CSV for --model external (dataset schema)");
    train->add_option("--fraction", train_fraction, "Fraction of the training side used")
        ->capture_default_str();
    train->add_option("--seed", train_seed, "Split / subsample seed")->capture_default_str();
    train->add_option("--out", train_out, "Model file path")->capture_default_str();
    train->add_option("--report", train_report, "Fit report CSV")->capture_default_str();
    train->add_option("--knn-k", train_params.knn_k, "KNN neighbor count")->capture_default_str();
    train->add_option("--gbrt-trees", train_params.gbrt_trees, "GBRT tree count")
        ->capture_default_str();
    train->add_option("--gbrt-depth", train_params.gbrt_max_depth, "GBRT max tree depth")
        ->capture_default_str();
    train->add_option("--gbrt-lr", train_params.gbrt_learning_rate, "GBRT learning rate")
        ->capture_default_str();
    train->add_option("--gbrt-lambda", train_params.gbrt_l2_lambda, "GBRT leaf L2 strength")
        ->capture_default_str();
    train->add_option("--test-fraction", train_params.test_fraction, "Held-out test fraction")
        ->capture_default_str();

    // --- optimize ---
    auto* optimize = app.add_subcommand("optimize", "Search the COP box with the GA");
    std::string opt_model, opt_trace, opt_out = "best.csv";
    GaConfig opt_ga;
    bool opt_snap = false;
    ParameterGrid opt_grid;
    optimize->add_option("--model", opt_model, "Trained model file")->required();
    add_ga_options(optimize, opt_ga);
    optimize->add_flag("--snap", opt_snap, "Confine the search to the grid lattice");
    add_grid_options(optimize, opt_grid);
    optimize->add_option("--trace", opt_trace, "Convergence trace CSV");
    optimize->add_option("--out", opt_out, "Best solution CSV")->capture_default_str();

    // --- bruteforce ---
    auto* brute = app.add_subcommand("bruteforce", "Scan the whole grid lattice");
    std::string brute_model, brute_out = "best.csv";
    ParameterGrid brute_grid;
    brute->add_option("--model", brute_model, "Trained model file")->required();
    add_grid_options(brute, brute_grid);
    brute->add_option("--out", brute_out, "Best solution CSV")->capture_default_str();

    // --- compare ---
    auto* comparison = app.add_subcommand("compare", "GA versus brute force on the same model");
    std::string cmp_model, cmp_out_dir = "compare_out";
    ParameterGrid cmp_grid;
    GaConfig cmp_ga;
    bool cmp_no_snap = false;
    comparison->add_option("--model", cmp_model, "Trained model file")->required();
    add_grid_options(comparison, cmp_grid);
    add_ga_options(comparison, cmp_ga);
    comparison->add_flag("--no-snap", cmp_no_snap, "Let the GA search the continuous box");
    comparison->add_option("--out-dir", cmp_out_dir, "Directory for compare.csv and traces")
        ->capture_default_str();

    // --- pipeline ---
    auto* pipeline = app.add_subcommand("pipeline", "scenario -> sweep -> train -> optimize");
    std::string pipe_config_path, pipe_out_dir;
    std::uint64_t pipe_seed = 0;
    bool pipe_seed_set = false;
    int pipe_jobs = -1;
    ParameterGrid pipe_grid;
    std::string pipe_family;
    pipeline->add_option("--config", pipe_config_path, "Pipeline JSON config");
    pipeline->add_option("--out-dir", pipe_out_dir, "Output directory (overrides config)");
    auto* pipe_seed_opt =
        pipeline->add_option("--seed", pipe_seed, "Global seed (overrides config)");
    pipeline->add_option("--jobs", pipe_jobs, "Sweep worker threads")->envname("COPKIT_JOBS");
    pipeline->add_option("--cio-step", pipe_grid.cio_step, "CIO grid step (overrides config)");
    pipeline->add_option("--hom-step", pipe_grid.hom_step, "HOM grid step (overrides config)");
    pipeline->add_option("--model", pipe_family, "Model family (overrides config)")
        ->check(CLI::IsMember({"linear", "knn", "gbrt", "external"}));
    pipeline->callback([&] { pipe_seed_set = pipe_seed_opt->count() > 0; });

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) return cmd_simulate(sim_source, sim_cio, sim_hom, sim_out);
        if (sweep->parsed())
            return cmd_sweep(sweep_source, sweep_grid, sweep_out, sweep_fraction, sweep_seed,
                             sweep_jobs);
        if (train->parsed())
            return cmd_train(train_data, train_family, train_fraction, train_seed, train_params,
                             train_external, train_out, train_report);
        if (optimize->parsed())
            return cmd_optimize(opt_model, opt_ga, opt_snap, opt_grid, opt_trace, opt_out);
        if (brute->parsed()) return cmd_bruteforce(brute_model, brute_grid, brute_out);
        if (comparison->parsed())
            return cmd_compare(cmp_model, cmp_grid, cmp_ga, cmp_no_snap, cmp_out_dir);
        if (pipeline->parsed()) {
            PipelineConfig config;
            if (!pipe_config_path.empty()) config = load_pipeline_config(pipe_config_path);
            if (!pipe_out_dir.empty()) config.out_dir = pipe_out_dir;
            if (pipe_seed_set) config.seed = pipe_seed;
            if (pipe_jobs >= 0) config.jobs = pipe_jobs;
            if (pipeline->count("--cio-step") > 0) config.grid.cio_step = pipe_grid.cio_step;
            if (pipeline->count("--hom-step") > 0) config.grid.hom_step = pipe_grid.hom_step;
            if (!pipe_family.empty()) config.model_family = pipe_family;
            PipelineResult result = run_pipeline(config, std::cout);
            std::cout << "best_fitness " << result.best.best_fitness << "\n";
            if (result.best.simulated_mean_sinr_db)
                std::cout << "simulated_mean_sinr_db " << *result.best.simulated_mean_sinr_db
                          << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "copkit: error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
