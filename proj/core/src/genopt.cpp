#include "copkit/genopt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "copkit/errors.hpp"
#include "copkit/surrogate.hpp"
#include "rng_util.hpp"

namespace copkit {

namespace {

void check_bounds(const GeneBounds& bounds) {
    for (std::size_t i = 0; i < 6; ++i)
        if (!(bounds.lower[i] <= bounds.upper[i]))
            throw ConfigError("gene bounds must satisfy lower <= upper");
}

std::size_t best_index(const std::vector<Chromosome>& population) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < population.size(); ++i)
        if (*population[i].fitness > *population[best].fitness) best = i;
    return best;
}

// Ascending by fitness, ties keep the earlier index; used to pick victims.
std::vector<std::size_t> worst_first(const std::vector<Chromosome>& population) {
    std::vector<std::size_t> order(population.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return *population[a].fitness < *population[b].fitness;
    });
    return order;
}

}  // namespace

void validate(const GaConfig& config) {
    if (config.population_size < 1) throw ConfigError("population_size must be positive");
    if (config.max_generations < 0) throw ConfigError("max_generations must be non-negative");
    if (config.elite_count < 2 || config.elite_count % 2 != 0)
        throw ConfigError("elite_count must be a positive even number");
    if (config.elite_count > config.population_size)
        throw ConfigError("elite_count cannot exceed population_size");
    if (!(config.sbx_eta > 0.0) || !(config.mutation_eta > 0.0))
        throw ConfigError("distribution indices must be positive");
    if (!(config.mutation_prob >= 0.0 && config.mutation_prob <= 1.0))
        throw ConfigError("mutation_prob must lie in [0, 1]");
    if (config.stagnation_patience < 1) throw ConfigError("stagnation_patience must be positive");
}

FitnessFn fitness_from_model(const TrainedModel& model) {
    return [&model](const std::array<double, 6>& genes) {
        return predict(model, to_config(genes));
    };
}

FitnessFn fitness_from_scenario(const NetworkScenario& scenario) {
    return [&scenario](const std::array<double, 6>& genes) {
        try {
            return evaluate_kpi(scenario, to_config(genes)).mean_sinr_db;
        } catch (const DegenerateKpiError&) {
            return -std::numeric_limits<double>::infinity();
        }
    };
}

double FitnessCache::operator()(const std::array<double, 6>& genes) {
    auto it = memo_.find(genes);
    if (it != memo_.end()) return it->second;
    const double value = fn_(genes);
    memo_.emplace(genes, value);
    ++evaluations_;
    return value;
}

std::vector<Chromosome> init_population(const GaConfig& config, const GeneBounds& bounds,
                                        std::mt19937_64& rng) {
    check_bounds(bounds);
    std::vector<Chromosome> population(static_cast<std::size_t>(config.population_size));
    for (Chromosome& c : population)
        for (std::size_t g = 0; g < 6; ++g)
            c.genes[g] = detail::uniform_in(rng, bounds.lower[g], bounds.upper[g]);
    return population;
}

void evaluate(std::vector<Chromosome>& population, FitnessCache& fitness) {
    for (Chromosome& c : population)
        if (!c.fitness) c.fitness = fitness(c.genes);
}

std::vector<Chromosome> select_elites(const std::vector<Chromosome>& population, int elite_count) {
    if (elite_count < 0 || static_cast<std::size_t>(elite_count) > population.size())
        throw ConfigError("elite_count out of range");
    std::vector<std::size_t> order(population.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return *population[a].fitness > *population[b].fitness;
    });
    std::vector<Chromosome> elites;
    elites.reserve(static_cast<std::size_t>(elite_count));
    for (int i = 0; i < elite_count; ++i) elites.push_back(population[order[static_cast<std::size_t>(i)]]);
    return elites;
}

double sbx_spread_factor(double u, double eta) {
    return u <= 0.5 ? std::pow(2.0 * u, 1.0 / (eta + 1.0))
                    : std::pow(1.0 / (2.0 * (1.0 - u)), 1.0 / (eta + 1.0));
}

std::pair<Chromosome, Chromosome> sbx_crossover(const Chromosome& a, const Chromosome& b,
                                                double eta, const GeneBounds& bounds,
                                                std::mt19937_64& rng) {
    check_bounds(bounds);
    Chromosome child_a, child_b;
    for (std::size_t g = 0; g < 6; ++g) {
        const double u = detail::uniform01(rng);
        const double x = a.genes[g];
        const double y = b.genes[g];
        if (x == y) {
            child_a.genes[g] = x;
            child_b.genes[g] = y;
            continue;
        }
        const double beta = sbx_spread_factor(u, eta);
        const double c1 = 0.5 * ((1.0 + beta) * x + (1.0 - beta) * y);
        const double c2 = 0.5 * ((1.0 - beta) * x + (1.0 + beta) * y);
        child_a.genes[g] = std::clamp(c1, bounds.lower[g], bounds.upper[g]);
        child_b.genes[g] = std::clamp(c2, bounds.lower[g], bounds.upper[g]);
    }
    return {child_a, child_b};
}

Chromosome mutate(const Chromosome& chromosome, double mutation_prob, double mutation_eta,
                  const GeneBounds& bounds, std::mt19937_64& rng) {
    check_bounds(bounds);
    Chromosome out;
    for (std::size_t g = 0; g < 6; ++g) {
        double value = chromosome.genes[g];
        if (detail::uniform01(rng) < mutation_prob) {
            const double u = detail::uniform01(rng);
            const double exponent = 1.0 / (mutation_eta + 1.0);
            const double delta = u < 0.5 ? std::pow(2.0 * u, exponent) - 1.0
                                         : 1.0 - std::pow(2.0 * (1.0 - u), exponent);
            value += delta * (bounds.upper[g] - bounds.lower[g]);
        }
        out.genes[g] = std::clamp(value, bounds.lower[g], bounds.upper[g]);
    }
    return out;
}

GaRun run_ga(const FitnessFn& fitness, const GaConfig& config, const GeneBounds& bounds,
             const ParameterGrid* lattice) {
    validate(config);
    check_bounds(bounds);

    std::mt19937_64 rng(config.seed);
    FitnessCache cache(fitness);
    auto snap = [&](Chromosome& c) {
        if (lattice) c.genes = to_features(snap_to_grid(*lattice, to_config(c.genes)));
    };

    std::vector<Chromosome> population = init_population(config, bounds, rng);
    for (Chromosome& c : population) snap(c);
    evaluate(population, cache);

    GaRun run;
    run.config = config;
    run.best = population[best_index(population)];
    run.trace.push_back({0, cache.evaluations(), *run.best.fitness, run.best.genes});

    int stale = 0;
    for (int gen = 1; gen <= config.max_generations; ++gen) {
        const std::vector<Chromosome> parents = select_elites(population, config.elite_count);

        std::vector<Chromosome> children;
        children.reserve(parents.size());
        for (std::size_t i = 0; i + 1 < parents.size(); i += 2) {
            auto [c1, c2] = sbx_crossover(parents[i], parents[i + 1], config.sbx_eta, bounds, rng);
            c1 = mutate(c1, config.mutation_prob, config.mutation_eta, bounds, rng);
            c2 = mutate(c2, config.mutation_prob, config.mutation_eta, bounds, rng);
            snap(c1);
            snap(c2);
            children.push_back(std::move(c1));
            children.push_back(std::move(c2));
        }
        evaluate(children, cache);

        // Elitist steady-state replacement: children take the worst slots.
        const std::vector<std::size_t> victims = worst_first(population);
        for (std::size_t i = 0; i < children.size() && i < victims.size(); ++i)
            population[victims[i]] = children[i];

        const Chromosome& generation_best = population[best_index(population)];
        if (*generation_best.fitness > *run.best.fitness) {
            run.best = generation_best;
            stale = 0;
        } else {
            ++stale;
        }
        run.trace.push_back({gen, cache.evaluations(), *run.best.fitness, run.best.genes});
        if (stale >= config.stagnation_patience) break;
    }
    run.total_evaluations = cache.evaluations();
    return run;
}

BruteForceResult brute_force(const FitnessFn& fitness, const ParameterGrid& grid) {
    validate(grid);
    if (grid.cardinality() > kEnumerationGuard)
        throw ConfigError("grid cardinality exceeds the enumeration guard");

    BruteForceResult result;
    result.best_fitness = -std::numeric_limits<double>::infinity();
    for_each_grid_config(grid, [&](const MobilityConfig& config) {
        const double value = fitness(to_features(config));
        ++result.evaluations;
        if (value > result.best_fitness) {  // strict: ties keep the first config
            result.best_fitness = value;
            result.best_config = config;
        }
    });
    return result;
}

ComparisonReport compare(const FitnessFn& fitness, const ParameterGrid& grid,
                         const GaConfig& config, bool snap_ga_to_lattice) {
    ComparisonReport report;

    std::int64_t evaluations = 0;
    report.brute.best_fitness = -std::numeric_limits<double>::infinity();
    for_each_grid_config(grid, [&](const MobilityConfig& c) {
        const double value = fitness(to_features(c));
        ++evaluations;
        if (value > report.brute.best_fitness) {
            report.brute.best_fitness = value;
            report.brute.best_config = c;
            report.brute_trace.push_back({evaluations, value});
        }
    });
    report.brute.evaluations = evaluations;
    report.brute_trace.push_back({evaluations, report.brute.best_fitness});

    report.ga = run_ga(fitness, config, GeneBounds{}, snap_ga_to_lattice ? &grid : nullptr);
    for (const GaTracePoint& p : report.ga.trace)
        report.ga_trace.push_back({p.evaluations, p.best_fitness});

    report.ga_best_raw = *report.ga.best.fitness;
    report.ga_best_on_lattice =
        fitness(to_features(snap_to_grid(grid, to_config(report.ga.best.genes))));
    report.gap_db = report.brute.best_fitness - report.ga_best_on_lattice;
    report.speedup = report.ga.total_evaluations > 0
                         ? static_cast<double>(report.brute.evaluations) /
                               static_cast<double>(report.ga.total_evaluations)
                         : 0.0;
    return report;
}

}  // namespace copkit
