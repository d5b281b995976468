#include "nrlb/genetic.hpp"

#include <cmath>
#include <numeric>

namespace nrlb {

void GaConfig::validate() const {
    if (population_size == 0 || population_size % 4 != 0)
        throw std::invalid_argument("ga: population_size must be a positive multiple of 4");
    if (!(fitness_threshold > 0.0 && fitness_threshold < 1.0))
        throw std::invalid_argument("ga: fitness_threshold must be in (0,1)");
    if (selection == Selection::Tournament &&
        !(tournament_extinction >= 0.0 && tournament_extinction < 1.0))
        throw std::invalid_argument("ga: tournament_extinction must be in [0,1)");
    if (mutation_rate < 0.0 || mutation_rate > 1.0)
        throw std::invalid_argument("ga: mutation_rate must be in [0,1]");
    if (mutation_magnitude < 0.0)
        throw std::invalid_argument("ga: mutation_magnitude must be nonnegative");
    if (max_generations == 0) throw std::invalid_argument("ga: max_generations must be >= 1");
    if (culture_count == 0) throw std::invalid_argument("ga: culture_count must be >= 1");
}

void evaluate_fitness(const SolverNetwork& solver, Population& pop) {
    if (pop.organisms.empty()) throw std::invalid_argument("evaluate_fitness: empty population");
    const std::size_t d = pop.organisms[0].genome.size();
    require_shape(d == solver.input_dim, "genome dim vs solver input dim");
    if (pop.target_class < 0 || pop.target_class >= solver.num_classes)
        throw std::invalid_argument("evaluate_fitness: target class out of range");

    Matrix batch(pop.size(), d);
    for (std::size_t i = 0; i < pop.size(); ++i) {
        require_shape(pop.organisms[i].genome.size() == d, "genome dims uniform");
        std::copy(pop.organisms[i].genome.begin(), pop.organisms[i].genome.end(),
                  batch.row(i).begin());
    }
    Matrix probs = softmax_rows(forward(solver, batch));
    for (std::size_t i = 0; i < pop.size(); ++i) {
        pop.organisms[i].fitness = probs(i, static_cast<std::size_t>(pop.target_class));
        pop.organisms[i].fresh = true;
    }
}

namespace {

std::size_t elite_quota(std::size_t m) { return m / 4; }

std::vector<std::size_t> indices_by_fitness_desc(const std::vector<Organism>& organisms) {
    std::vector<std::size_t> idx(organisms.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return organisms[a].fitness > organisms[b].fitness;
    });
    return idx;
}

}  // namespace

std::vector<Organism> select_linear(const Population& pop) {
    if (pop.size() == 0 || pop.size() % 4 != 0)
        throw std::invalid_argument("select_linear: population size must be a positive multiple of 4");
    auto idx = indices_by_fitness_desc(pop.organisms);
    std::vector<Organism> elite;
    elite.reserve(elite_quota(pop.size()));
    for (std::size_t i = 0; i < elite_quota(pop.size()); ++i) elite.push_back(pop.organisms[idx[i]]);
    return elite;
}

std::vector<Organism> select_roulette(const Population& pop, Rng& rng) {
    if (pop.size() == 0 || pop.size() % 4 != 0)
        throw std::invalid_argument("select_roulette: population size must be a positive multiple of 4");
    const std::size_t quota = elite_quota(pop.size());

    std::vector<std::size_t> remaining(pop.size());
    std::iota(remaining.begin(), remaining.end(), 0);
    std::vector<Organism> elite;
    elite.reserve(quota);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    for (std::size_t draw = 0; draw < quota; ++draw) {
        double total = 0.0;
        for (std::size_t i : remaining) total += pop.organisms[i].fitness;
        std::size_t chosen_slot = 0;
        if (total <= 0.0) {
            // degenerate all-zero fitness: uniform draw
            std::uniform_int_distribution<std::size_t> uni(0, remaining.size() - 1);
            chosen_slot = uni(rng);
        } else {
            double ticket = unit(rng) * total;
            double acc = 0.0;
            chosen_slot = remaining.size() - 1;
            for (std::size_t slot = 0; slot < remaining.size(); ++slot) {
                acc += pop.organisms[remaining[slot]].fitness;
                if (ticket < acc) {
                    chosen_slot = slot;
                    break;
                }
            }
        }
        elite.push_back(pop.organisms[remaining[chosen_slot]]);
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(chosen_slot));
    }
    return elite;
}

std::vector<Organism> select_tournament(const Population& pop, double extinction, Rng& rng) {
    if (pop.size() == 0 || pop.size() % 4 != 0)
        throw std::invalid_argument("select_tournament: population size must be a positive multiple of 4");
    const std::size_t m = pop.size();
    const std::size_t quota = elite_quota(m);
    const std::size_t extinct = static_cast<std::size_t>(std::floor(extinction * double(m)));
    if (m - extinct < quota)
        throw std::invalid_argument("select_tournament: extinction fraction leaves fewer than m/4 survivors");

    std::vector<std::size_t> idx(m);
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(m - extinct);          // survivors
    std::sort(idx.begin(), idx.end());  // restore stable original order

    std::vector<Organism> survivors;
    survivors.reserve(idx.size());
    for (std::size_t i : idx) survivors.push_back(pop.organisms[i]);
    auto order = indices_by_fitness_desc(survivors);
    std::vector<Organism> elite;
    elite.reserve(quota);
    for (std::size_t i = 0; i < quota; ++i) elite.push_back(survivors[order[i]]);
    return elite;
}

std::vector<Organism> select_elite(const Population& pop, const GaConfig& cfg, Rng& rng) {
    switch (cfg.selection) {
        case Selection::Linear: return select_linear(pop);
        case Selection::Roulette: return select_roulette(pop, rng);
        case Selection::Tournament: return select_tournament(pop, cfg.tournament_extinction, rng);
    }
    throw std::logic_error("unknown selection");
}

Organism crossover(const Organism& a, const Organism& b, CrossoverKind kind, Rng& rng) {
    require_shape(a.genome.size() == b.genome.size(), "crossover genome dims");
    Organism child;
    child.genome.resize(a.genome.size());
    if (kind == CrossoverKind::UniformMask) {
        std::bernoulli_distribution coin(0.5);
        for (std::size_t i = 0; i < a.genome.size(); ++i)
            child.genome[i] = coin(rng) ? a.genome[i] : b.genome[i];
    } else {
        std::uniform_int_distribution<std::size_t> cut(0, a.genome.size());
        const std::size_t c = cut(rng);
        for (std::size_t i = 0; i < a.genome.size(); ++i)
            child.genome[i] = i < c ? a.genome[i] : b.genome[i];
    }
    child.fresh = false;
    return child;
}

Organism mutate(const Organism& o, double rate, double magnitude, Rng& rng) {
    Organism out = o;
    out.fresh = false;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> noise(-magnitude, magnitude);
    for (double& g : out.genome) {
        if (unit(rng) < rate) g = std::clamp(g + noise(rng), 0.0, 1.0);
    }
    return out;
}

Population next_generation(const std::vector<Organism>& elite, int target_class,
                           const GaConfig& cfg, Rng& rng) {
    const std::size_t q = elite_quota(cfg.population_size);
    if (elite.size() != q)
        throw std::invalid_argument("next_generation: elite size must be m/4");

    Population next;
    next.target_class = target_class;
    next.organisms.reserve(cfg.population_size);
    for (const auto& e : elite) next.organisms.push_back(e);  // elitism, verbatim
    for (std::size_t j = 0; j < q; ++j)  // adjacent pairs, wrapping
        next.organisms.push_back(crossover(elite[j], elite[(j + 1) % q], cfg.crossover, rng));
    std::vector<Organism> mutants;
    mutants.reserve(q);
    for (const auto& e : elite)
        mutants.push_back(mutate(e, cfg.mutation_rate, cfg.mutation_magnitude, rng));
    for (const auto& mu : mutants) next.organisms.push_back(mu);
    for (std::size_t j = 0; j < q; ++j)
        next.organisms.push_back(crossover(mutants[j], mutants[(j + 1) % q], cfg.crossover, rng));
    return next;
}

namespace {

GenerationStats stats_of(const Population& pop, std::size_t generation, std::size_t culture) {
    GenerationStats s;
    s.generation = generation;
    s.target_class = pop.target_class;
    s.culture = culture;
    s.min_fitness = 1.0;
    s.max_fitness = 0.0;
    double sum = 0.0;
    for (const auto& o : pop.organisms) {
        s.min_fitness = std::min(s.min_fitness, o.fitness);
        s.max_fitness = std::max(s.max_fitness, o.fitness);
        sum += o.fitness;
    }
    s.mean_fitness = sum / double(pop.size());
    s.duplicates = duplicate_count(pop);
    s.mean_distance = mean_pairwise_distance(pop);
    return s;
}

double min_fitness(const Population& pop) {
    double mn = 1.0;
    for (const auto& o : pop.organisms) mn = std::min(mn, o.fitness);
    return mn;
}

}  // namespace

EvolveResult evolve_class(const SolverNetwork& solver, int target_class, const GaConfig& cfg,
                          Rng& rng, const StatsSink& stats, std::size_t culture_index) {
    cfg.validate();

    Population pop;
    pop.target_class = target_class;
    pop.organisms.resize(cfg.population_size);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (auto& o : pop.organisms) {
        o.genome.resize(solver.input_dim);
        for (double& g : o.genome) g = unit(rng);
    }
    evaluate_fitness(solver, pop);
    if (stats) stats(stats_of(pop, 0, culture_index));

    EvolveResult result;
    std::size_t generation = 0;
    while (min_fitness(pop) <= cfg.fitness_threshold) {
        if (generation >= cfg.max_generations) {
            result.population = std::move(pop);
            result.converged = false;
            result.generations = generation;
            return result;
        }
        ++generation;
        auto elite = select_elite(pop, cfg, rng);
        pop = next_generation(elite, target_class, cfg, rng);
        evaluate_fitness(solver, pop);
        if (stats) stats(stats_of(pop, generation, culture_index));
    }
    result.population = std::move(pop);
    result.converged = true;
    result.generations = generation;
    return result;
}

GenerateResult generate_raw(const SolverNetwork& solver, int num_classes, const GaConfig& cfg,
                            const StatsSink& stats) {
    cfg.validate();
    if (num_classes < 1 || num_classes > solver.num_classes)
        throw std::invalid_argument("generate_raw: num_classes out of range for the solver head");

    GenerateResult out;
    out.dataset.num_classes = num_classes;
    for (int cls = 0; cls < num_classes; ++cls) {
        for (std::size_t culture = 0; culture < cfg.culture_count; ++culture) {
            Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(cls) * 1000003ULL + culture));
            EvolveResult ev = evolve_class(solver, cls, cfg, rng, stats, culture);
            if (!ev.converged) {
                out.converged_all = false;
                if (out.unconverged_classes.empty() || out.unconverged_classes.back() != cls)
                    out.unconverged_classes.push_back(cls);
            }
            Dataset chunk;
            chunk.num_classes = num_classes;
            chunk.features = Matrix(ev.population.size(), solver.input_dim);
            chunk.labels.assign(ev.population.size(), cls);
            for (std::size_t i = 0; i < ev.population.size(); ++i)
                std::copy(ev.population.organisms[i].genome.begin(),
                          ev.population.organisms[i].genome.end(), chunk.features.row(i).begin());
            append(out.dataset, chunk);
        }
    }
    return out;
}

std::size_t duplicate_count(const Population& pop, double epsilon) {
    std::size_t count = 0;
    for (std::size_t i = 1; i < pop.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            double linf = 0.0;
            const auto& a = pop.organisms[i].genome;
            const auto& b = pop.organisms[j].genome;
            for (std::size_t k = 0; k < a.size(); ++k)
                linf = std::max(linf, std::abs(a[k] - b[k]));
            if (linf <= epsilon) {
                ++count;
                break;
            }
        }
    }
    return count;
}

double mean_pairwise_distance(const Population& pop) {
    if (pop.size() < 2) return 0.0;
    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < pop.size(); ++i) {
        for (std::size_t j = i + 1; j < pop.size(); ++j) {
            const auto& a = pop.organisms[i].genome;
            const auto& b = pop.organisms[j].genome;
            double d2 = 0.0;
            for (std::size_t k = 0; k < a.size(); ++k) d2 += (a[k] - b[k]) * (a[k] - b[k]);
            sum += std::sqrt(d2);
            ++pairs;
        }
    }
    return sum / double(pairs);
}

}  // namespace nrlb
