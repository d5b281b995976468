#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "nrlb/dataset.hpp"
#include "nrlb/network.hpp"
#include "nrlb/rng.hpp"

namespace nrlb {

/// One genome with its cached fitness (solver softmax confidence of the target class).
struct Organism {
    std::vector<double> genome;  // in [0,1]^d
    double fitness = 0.0;
    bool fresh = false;  // fitness reflects the current solver
};

struct Population {
    std::vector<Organism> organisms;
    int target_class = 0;

    std::size_t size() const { return organisms.size(); }
};

enum class Selection { Linear, Roulette, Tournament };

enum class CrossoverKind { UniformMask, SinglePoint };

struct GaConfig {
    std::size_t population_size = 40;  // m; must be divisible by 4
    double fitness_threshold = 0.99;   // tau
    Selection selection = Selection::Linear;
    double tournament_extinction = 0.5;  // p, used by tournament selection
    CrossoverKind crossover = CrossoverKind::UniformMask;
    double mutation_rate = 0.05;
    double mutation_magnitude = 0.2;
    std::size_t max_generations = 500;
    std::size_t culture_count = 1;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Per-generation diversity row streamed out of the evolution loop.
struct GenerationStats {
    std::size_t generation = 0;
    int target_class = 0;
    std::size_t culture = 0;
    double min_fitness = 0.0;
    double mean_fitness = 0.0;
    double max_fitness = 0.0;
    std::size_t duplicates = 0;
    double mean_distance = 0.0;
};

using StatsSink = std::function<void(const GenerationStats&)>;

/// Refreshes every organism's fitness from the solver; order preserved.
void evaluate_fitness(const SolverNetwork& solver, Population& pop);

/// Top 25% by fitness, descending; ties keep original order.
std::vector<Organism> select_linear(const Population& pop);

/// m/4 distinct draws without replacement, probability proportional to fitness.
/// All-zero total fitness falls back to uniform sampling.
std::vector<Organism> select_roulette(const Population& pop, Rng& rng);

/// Random extinction of fraction p, then the fittest m/4 of the survivors.
std::vector<Organism> select_tournament(const Population& pop, double extinction, Rng& rng);

/// Dispatch on cfg.selection.
std::vector<Organism> select_elite(const Population& pop, const GaConfig& cfg, Rng& rng);

/// Child gene i comes from a or b (uniform mask or single point); fitness stale.
Organism crossover(const Organism& a, const Organism& b, CrossoverKind kind, Rng& rng);

/// Per-gene Bernoulli(rate) uniform noise in [-magnitude, magnitude], clamped to [0,1].
Organism mutate(const Organism& o, double rate, double magnitude, Rng& rng);

/// Elite + adjacent-pair children + mutants + adjacent mutant children, size m.
Population next_generation(const std::vector<Organism>& elite, int target_class,
                           const GaConfig& cfg, Rng& rng);

struct EvolveResult {
    Population population;
    bool converged = false;
    std::size_t generations = 0;  // evaluations after the initial one
};

/// Algorithm loop for one class and one culture: evaluate, then
/// select / breed / re-evaluate until min fitness > tau or the generation cap.
EvolveResult evolve_class(const SolverNetwork& solver, int target_class, const GaConfig& cfg,
                          Rng& rng, const StatsSink& stats = {}, std::size_t culture_index = 0);

/// All classes, all cultures, merged; labels are the GA target classes.
/// Per-class counts are equal by construction. Convergence failures are
/// reported through the result, not thrown.
struct GenerateResult {
    Dataset dataset;
    bool converged_all = true;
    std::vector<int> unconverged_classes;
};

GenerateResult generate_raw(const SolverNetwork& solver, int num_classes, const GaConfig& cfg,
                            const StatsSink& stats = {});

/// Organisms whose genome is within L-infinity `epsilon` of an earlier organism.
std::size_t duplicate_count(const Population& pop, double epsilon = 0.0);

/// Mean Euclidean distance over all unordered organism pairs; 0 for size < 2.
double mean_pairwise_distance(const Population& pop);

}  // namespace nrlb
