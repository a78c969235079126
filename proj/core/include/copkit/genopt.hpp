#pragma once

// Genetic algorithm over the 6-gene COP chromosome (elite selection, SBX
// crossover, polynomial mutation), the brute-force baseline and the
// convergence comparison between the two.

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <vector>

#include "copkit/datagen.hpp"
#include "copkit/scenario.hpp"

namespace copkit {

struct GeneBounds {
    std::array<double, 6> lower{kCioMinDb, kCioMinDb, kCioMinDb, kHomMinDb, kHomMinDb, kHomMinDb};
    std::array<double, 6> upper{kCioMaxDb, kCioMaxDb, kCioMaxDb, kHomMaxDb, kHomMaxDb, kHomMaxDb};
};

struct Chromosome {
    std::array<double, 6> genes{};  // (cio1, cio2, cio3, hom1, hom2, hom3)
    std::optional<double> fitness;
};

// Pure, deterministic, total over the bounded gene box.
using FitnessFn = std::function<double(const std::array<double, 6>&)>;

struct TrainedModel;  // surrogate.hpp

// The two standard fitness realizations: a surrogate's prediction, or the
// simulated mean SINR itself. Both capture by reference; the argument must
// outlive the returned function. The simulator variant maps a fully-outage
// config to -infinity so the GA simply avoids it.
FitnessFn fitness_from_model(const TrainedModel& model);
FitnessFn fitness_from_scenario(const NetworkScenario& scenario);

struct GaConfig {
    int population_size = 100;
    int max_generations = 50;
    int elite_count = 10;  // even; consecutive elites are paired for crossover
    double sbx_eta = 15.0;
    double mutation_eta = 20.0;
    double mutation_prob = 1.0 / 6.0;  // one expected gene per chromosome
    std::uint64_t seed = 0;
    int stagnation_patience = 20;  // generations without best-fitness improvement
};

void validate(const GaConfig& config);

struct GaTracePoint {
    int generation = 0;
    std::int64_t evaluations = 0;  // cumulative distinct fitness evaluations
    double best_fitness = 0.0;
    std::array<double, 6> best_genes{};
};

struct GaRun {
    GaConfig config;
    std::vector<GaTracePoint> trace;  // one point per generation, gen 0 included
    Chromosome best;
    std::int64_t total_evaluations = 0;
};

// Memoizes fitness by exact gene vector so evaluation counts stay honest
// under elitism.
class FitnessCache {
public:
    explicit FitnessCache(FitnessFn fn) : fn_(std::move(fn)) {}

    double operator()(const std::array<double, 6>& genes);
    std::int64_t evaluations() const { return evaluations_; }

private:
    FitnessFn fn_;
    std::map<std::array<double, 6>, double> memo_;
    std::int64_t evaluations_ = 0;
};

std::vector<Chromosome> init_population(const GaConfig& config, const GeneBounds& bounds,
                                        std::mt19937_64& rng);

// Fills in missing fitness values through the cache.
void evaluate(std::vector<Chromosome>& population, FitnessCache& fitness);

// Top elite_count by fitness, descending; ties keep the earlier index.
std::vector<Chromosome> select_elites(const std::vector<Chromosome>& population, int elite_count);

// SBX spread factor: (2u)^(1/(eta+1)) for u <= 0.5, else its reciprocal
// mirror. u = 0.5 gives exactly 1, which reproduces the parents.
double sbx_spread_factor(double u, double eta);

// Per-gene simulated binary crossover: spread drawn from the eta-indexed
// polynomial distribution, children mean-preserving before the bound clip.
std::pair<Chromosome, Chromosome> sbx_crossover(const Chromosome& a, const Chromosome& b,
                                                double eta, const GeneBounds& bounds,
                                                std::mt19937_64& rng);

// Per-gene polynomial mutation, perturbation scaled by the gene range.
Chromosome mutate(const Chromosome& chromosome, double mutation_prob, double mutation_eta,
                  const GeneBounds& bounds, std::mt19937_64& rng);

// Generational loop: evaluate, select elites, pair consecutive elites, SBX,
// mutate, replace the worst members with the children. Stops after
// max_generations or stagnation_patience generations without improvement.
// When `lattice` is given every chromosome is snapped onto it, so the GA
// searches the grid the brute-force baseline scans.
GaRun run_ga(const FitnessFn& fitness, const GaConfig& config, const GeneBounds& bounds = {},
             const ParameterGrid* lattice = nullptr);

struct BruteForceResult {
    MobilityConfig best_config;  // first argmax in enumeration order
    double best_fitness = 0.0;
    std::int64_t evaluations = 0;  // equals the grid cardinality
};

BruteForceResult brute_force(const FitnessFn& fitness, const ParameterGrid& grid);

struct ConvergencePoint {
    std::int64_t evaluations = 0;
    double best_fitness = 0.0;
};

struct ComparisonReport {
    BruteForceResult brute;
    GaRun ga;
    double ga_best_raw = 0.0;         // fitness of the GA best as returned
    double ga_best_on_lattice = 0.0;  // fitness of the GA best snapped to the grid
    double gap_db = 0.0;              // brute best - GA lattice best
    double speedup = 0.0;             // brute evaluations / GA evaluations
    std::vector<ConvergencePoint> brute_trace;  // running best at improvements
    std::vector<ConvergencePoint> ga_trace;
};

// Runs both searches on the same fitness. With snap_ga_to_lattice the GA is
// confined to the grid, making its best directly comparable to brute force.
ComparisonReport compare(const FitnessFn& fitness, const ParameterGrid& grid,
                         const GaConfig& config, bool snap_ga_to_lattice = true);

}  // namespace copkit
