#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "test_util.hpp"

namespace fs = std::filesystem;

TEST_SUITE_BEGIN("cli");

namespace {

std::string binary() {
    const char* bin = std::getenv("COPKIT_BIN");
    REQUIRE_MESSAGE(bin != nullptr, "COPKIT_BIN must point at the copkit executable");
    return bin;
}

int run(const std::string& args) {
    const std::string cmd = binary() + " " + args + " >/dev/null 2>&1";
    return std::system(cmd.c_str());
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST_CASE("help works and unknown flags are errors") {
    CHECK(run("--help") == 0);
    CHECK(run("sweep --help") == 0);
    CHECK(run("--bogus") != 0);
    CHECK(run("sweep --bogus-flag 1") != 0);
    CHECK(run("") != 0);  // a subcommand is required
}

TEST_CASE("subcommands chain into the full workflow") {
    copkit::test::TempDir dir;
    const std::string scenario = dir.file("scenario.txt");
    const std::string dataset = dir.file("dataset.csv");
    const std::string model = dir.file("model.bin");

    // simulate needs a world from somewhere.
    CHECK(run("simulate --cio 0,0,0 --hom 0,0,0 --out " + dir.file("r.csv")) != 0);
    CHECK(run("simulate --gen-seed 42 --save-scenario " + scenario +
              " --cio 0,0,0 --hom 0,0,0 --out " + dir.file("report.csv")) == 0);
    CHECK(fs::exists(scenario));
    CHECK(fs::exists(dir.file("report.csv")));

    // Tiny sweep, twice, deterministic bytes.
    const std::string sweep_args = "sweep --scenario " + scenario +
                                   " --cio-step 10 --hom-step 10 --jobs 2 --out ";
    CHECK(run(sweep_args + dataset) == 0);
    CHECK(run(sweep_args + dir.file("dataset2.csv")) == 0);
    CHECK(slurp(dataset) == slurp(dir.file("dataset2.csv")));

    // Subsampled sweep keeps the floor-sized subset.
    CHECK(run("sweep --scenario " + scenario +
              " --cio-step 10 --hom-step 10 --fraction 0.5 --seed 3 --out " +
              dir.file("half.csv")) == 0);

    CHECK(run("train --data " + dataset + " --model gbrt --gbrt-trees 40 --seed 1 --out " +
              model + " --report " + dir.file("fit.csv")) == 0);
    CHECK(fs::exists(model));
    CHECK(fs::exists(dir.file("fit.csv")));

    CHECK(run("optimize --model " + model + " --pop 40 --gens 15 --seed 2 --trace " +
              dir.file("trace.csv") + " --out " + dir.file("best.csv")) == 0);
    CHECK(fs::exists(dir.file("best.csv")));
    CHECK(fs::exists(dir.file("trace.csv")));

    CHECK(run("bruteforce --model " + model + " --cio-step 10 --hom-step 10 --out " +
              dir.file("brute.csv")) == 0);
    CHECK(fs::exists(dir.file("brute.csv")));

    CHECK(run("compare --model " + model +
              " --cio-step 10 --hom-step 10 --pop 40 --gens 15 --seed 2 --out-dir " +
              dir.file("cmp")) == 0);
    for (const char* name : {"compare.csv", "ga_trace.csv", "brute_trace.csv"})
        CHECK(fs::exists(dir.file("cmp") + "/" + name));

    // External predictions flow through the same train interface.
    CHECK(run("train --data " + dataset + " --model external --external " + dataset +
              " --out " + dir.file("ext.bin") + " --report " + dir.file("ext_fit.csv")) == 0);
    CHECK(fs::exists(dir.file("ext.bin")));
    CHECK(run("optimize --model " + dir.file("ext.bin") + " --pop 30 --gens 10 --seed 4 --out " +
              dir.file("ext_best.csv")) == 0);

    // train on a missing dataset fails loudly, as does external without a table.
    CHECK(run("train --data " + dir.file("nope.csv") + " --model linear --out " +
              dir.file("m.bin")) != 0);
    CHECK(run("train --data " + dataset + " --model external --out " + dir.file("m.bin")) != 0);
}

TEST_CASE("pipeline subcommand honors config files and overrides") {
    copkit::test::TempDir dir;
    const std::string config_path = dir.file("pipeline.json");
    {
        std::ofstream out(config_path);
        out << R"({
            "seed": 42,
            "scenario": {"site_count": 4, "user_count": 40, "region_half_extent_m": 700},
            "grid": {"cio_step": 10, "hom_step": 10},
            "model": {"family": "gbrt", "gbrt_trees": 40},
            "ga": {"max_generations": 20}
        })";
    }
    const std::string out_dir = dir.file("out");
    CHECK(run("pipeline --config " + config_path + " --out-dir " + out_dir + " --jobs 2") == 0);
    for (const char* name :
         {"scenario.txt", "dataset.csv", "model.bin", "report.csv", "best.csv", "trace.csv",
          "manifest.json"})
        CHECK(fs::exists(out_dir + "/" + name));

    // Without a config file the seed is still required.
    CHECK(run("pipeline --out-dir " + dir.file("out2")) != 0);
    CHECK_FALSE(fs::exists(dir.file("out2")));
}

TEST_SUITE_END();
