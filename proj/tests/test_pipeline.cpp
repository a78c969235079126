#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "copkit/errors.hpp"
#include "copkit/pipeline.hpp"
#include "test_util.hpp"

using namespace copkit;
namespace fs = std::filesystem;

TEST_SUITE_BEGIN("pipeline");

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Tiny world and grid so the whole pipeline runs in well under a second.
PipelineConfig tiny_config(const std::string& out_dir) {
    PipelineConfig config;
    config.seed = 42;
    config.out_dir = out_dir;
    config.layout.site_count = 4;
    config.layout.user_count = 40;
    config.layout.region_half_extent_m = 700.0;
    config.grid.cio_step = 10.0;
    config.grid.hom_step = 10.0;
    config.surrogate.gbrt_trees = 40;
    config.ga.max_generations = 25;
    config.jobs = 2;
    return config;
}

}  // namespace

TEST_CASE("pipeline json config parses and rejects unknown keys") {
    test::TempDir dir;
    {
        std::ofstream out(dir.file("p.json"));
        out << R"({
            "seed": 7,
            "out_dir": "somewhere",
            "scenario": {"site_count": 4, "user_count": 50},
            "grid": {"cio_step": 5, "hom_step": 5},
            "model": {"family": "knn", "knn_k": 3, "train_fraction": 0.5},
            "ga": {"population_size": 20, "max_generations": 10}
        })";
    }
    PipelineConfig c = load_pipeline_config(dir.file("p.json"));
    CHECK(c.seed == 7);
    CHECK(c.out_dir == "somewhere");
    CHECK(c.layout.site_count == 4);
    CHECK(c.grid.cio_step == 5.0);
    CHECK(c.model_family == "knn");
    CHECK(c.surrogate.knn_k == 3);
    CHECK(c.train_fraction == 0.5);
    CHECK(c.ga.population_size == 20);

    {
        std::ofstream out(dir.file("bad.json"));
        out << R"({"grid": {"cio_stepp": 5}})";
    }
    CHECK_THROWS_AS(load_pipeline_config(dir.file("bad.json")), ConfigError);
    {
        std::ofstream out(dir.file("junk.json"));
        out << "{not json";
    }
    CHECK_THROWS_AS(load_pipeline_config(dir.file("junk.json")), ParseError);
}

TEST_CASE("pipeline fails fast before producing anything") {
    test::TempDir dir;
    const std::string out_dir = dir.file("out");
    std::ostringstream log;

    PipelineConfig no_world;
    no_world.out_dir = out_dir;
    CHECK_THROWS_AS(run_pipeline(no_world, log), ConfigError);
    CHECK_FALSE(fs::exists(out_dir));

    PipelineConfig missing_file = tiny_config(out_dir);
    missing_file.seed.reset();
    missing_file.scenario_file = dir.file("absent.txt");
    CHECK_THROWS_AS(run_pipeline(missing_file, log), ConfigError);
    CHECK_FALSE(fs::exists(out_dir));

    PipelineConfig bad_family = tiny_config(out_dir);
    bad_family.model_family = "catboost";
    CHECK_THROWS_AS(run_pipeline(bad_family, log), ConfigError);
    CHECK_FALSE(fs::exists(out_dir));
}

TEST_CASE("pipeline produces every artifact and reuses them on rerun") {
    test::TempDir dir;
    PipelineConfig config = tiny_config(dir.file("out"));
    std::ostringstream log;

    PipelineResult first = run_pipeline(config, log);
    for (const std::string& path :
         {first.scenario_path, first.dataset_path, first.model_path, first.report_path,
          first.best_path, first.trace_path}) {
        CAPTURE(path);
        CHECK(fs::exists(path));
    }
    CHECK(first.stages_reused == 0);

    // The report ranks every family at both training fractions.
    {
        std::ifstream report(first.report_path);
        std::string line;
        std::getline(report, line);
        CHECK(line == "model_name,train_fraction,n_train,n_test,rmse_train,rmse_test,seed,error");
        int rows = 0;
        while (std::getline(report, line))
            if (!line.empty()) ++rows;
        CHECK(rows == 6);  // {linear, knn, gbrt} x {1.0, 0.1}
    }

    const std::string dataset_before = slurp(first.dataset_path);
    const std::string best_before = slurp(first.best_path);

    PipelineResult second = run_pipeline(config, log);
    CHECK(second.stages_reused == 4);
    CHECK(slurp(second.dataset_path) == dataset_before);
    CHECK(slurp(second.best_path) == best_before);
    // The reused value comes back through the 6-decimal CSV.
    CHECK(second.best.best_fitness == doctest::Approx(first.best.best_fitness).epsilon(1e-6));

    // A different seed invalidates the fingerprints end to end.
    PipelineConfig reseeded = config;
    reseeded.seed = 43;
    PipelineResult third = run_pipeline(reseeded, log);
    CHECK(third.stages_reused == 0);
}

TEST_CASE("pipeline best lands near the swept maximum") {
    test::TempDir dir;
    PipelineConfig config = tiny_config(dir.file("out"));
    std::ostringstream log;
    PipelineResult result = run_pipeline(config, log);

    SweepDataset dataset = read_csv(result.dataset_path);
    double best_swept = -1e300;
    for (const SweepRecord& r : dataset.records)
        if (!std::isnan(r.mean_sinr_db)) best_swept = std::max(best_swept, r.mean_sinr_db);

    // The chosen config is a swept lattice point: its simulated KPI must sit
    // at the top of the dataset, and the surrogate's own score nearby.
    REQUIRE(result.best.simulated_mean_sinr_db.has_value());
    CHECK(*result.best.simulated_mean_sinr_db >= best_swept - 0.1);
    CHECK(result.best.best_fitness >= best_swept - 1.0);
}

TEST_SUITE_END();
