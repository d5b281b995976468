#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "nrlb/genetic.hpp"

using namespace nrlb;

namespace {

Population pop_with_fitness(std::vector<double> fitness, std::size_t dim = 2) {
    Population pop;
    Rng rng(1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (double f : fitness) {
        Organism o;
        o.genome.resize(dim);
        for (double& g : o.genome) g = unit(rng);
        o.fitness = f;
        o.fresh = true;
        pop.organisms.push_back(std::move(o));
    }
    return pop;
}

GaConfig toy_config() {
    GaConfig cfg;
    cfg.population_size = 8;
    cfg.fitness_threshold = 0.9;
    cfg.max_generations = 50;
    return cfg;
}

/// Solver whose softmax always gives the target class confidence ~1 (huge bias).
SolverNetwork confident_solver(std::size_t dim, int k, int favored) {
    SolverNetwork net = make_solver(dim, 2, k, 0);
    net.params.w1.data.assign(net.params.w1.data.size(), 0.0);
    net.params.w2.data.assign(net.params.w2.data.size(), 0.0);
    net.params.b2.assign(std::size_t(k), 0.0);
    net.params.b2[std::size_t(favored)] = 100.0;
    return net;
}

SolverNetwork zero_solver(std::size_t dim, int k) {
    SolverNetwork net = make_solver(dim, 2, k, 0);
    net.params.w1.data.assign(net.params.w1.data.size(), 0.0);
    net.params.w2.data.assign(net.params.w2.data.size(), 0.0);
    return net;
}

bool in_unit_box(const Organism& o) {
    return std::all_of(o.genome.begin(), o.genome.end(),
                       [](double g) { return g >= 0.0 && g <= 1.0; });
}

}  // namespace

TEST_CASE("evaluate_fitness: zero solver gives uniform confidence") {
    Population pop = pop_with_fitness({0, 0, 0, 0}, 3);
    pop.target_class = 4;
    SolverNetwork net = zero_solver(3, 10);
    evaluate_fitness(net, pop);
    for (const auto& o : pop.organisms) CHECK(o.fitness == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("evaluate_fitness matches per-sample softmax oracle") {
    SolverNetwork net = make_solver(3, 5, 4, 77);
    Population pop = pop_with_fitness(std::vector<double>(8, 0.0), 3);
    pop.target_class = 2;
    evaluate_fitness(net, pop);
    for (const auto& o : pop.organisms) {
        Matrix one(1, 3);
        std::copy(o.genome.begin(), o.genome.end(), one.data.begin());
        auto probs = softmax(forward(net, one).row(0));
        CHECK(o.fitness == doctest::Approx(probs[2]).epsilon(1e-12));
        CHECK(o.fitness >= 0.0);
        CHECK(o.fitness <= 1.0);
    }
}

TEST_CASE("evaluate_fitness rejects empty population and dim mismatch") {
    SolverNetwork net = zero_solver(3, 4);
    Population empty;
    CHECK_THROWS_AS(evaluate_fitness(net, empty), std::invalid_argument);
    Population pop = pop_with_fitness({0, 0}, 5);
    CHECK_THROWS_AS(evaluate_fitness(net, pop), std::invalid_argument);
}

TEST_CASE("select_linear keeps the top quarter") {
    Population pop = pop_with_fitness({0.9, 0.8, 0.1, 0.2});
    auto elite = select_linear(pop);
    REQUIRE(elite.size() == 1);
    CHECK(elite[0].fitness == 0.9);
}

TEST_CASE("select_linear: stable order on ties") {
    Population pop = pop_with_fitness({0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5});
    auto elite = select_linear(pop);
    REQUIRE(elite.size() == 2);
    CHECK(elite[0].genome == pop.organisms[0].genome);
    CHECK(elite[1].genome == pop.organisms[1].genome);
}

TEST_CASE("select_linear equals sort-then-slice oracle") {
    Rng rng(9);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> fitness(20);
    for (double& f : fitness) f = unit(rng);
    Population pop = pop_with_fitness(fitness);
    auto elite = select_linear(pop);

    auto sorted = fitness;
    std::sort(sorted.rbegin(), sorted.rend());
    REQUIRE(elite.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) CHECK(elite[i].fitness == sorted[i]);
    // elite min fitness >= every non-elite fitness
    for (std::size_t i = 5; i < sorted.size(); ++i) CHECK(elite.back().fitness >= sorted[i]);
}

TEST_CASE("select_roulette: dominant organism always wins") {
    Population pop = pop_with_fitness({0.0, 1.0, 0.0, 0.0});
    for (int trial = 0; trial < 20; ++trial) {
        Rng rng{std::uint64_t(trial)};
        auto elite = select_roulette(pop, rng);
        REQUIRE(elite.size() == 1);
        CHECK(elite[0].fitness == 1.0);
    }
}

TEST_CASE("select_roulette: empirical 3:1 ratio passes chi-square") {
    // fitness 3 vs 1, one winner per draw; chi2 with 1 dof, p > 0.01 <=> chi2 < 6.635
    Population pop = pop_with_fitness({3.0, 1.0, 0.0, 0.0});
    pop.organisms[2].fitness = 0.0;
    pop.organisms[3].fitness = 0.0;
    Rng rng(1234);
    const int trials = 100000;
    int first = 0;
    for (int t = 0; t < trials; ++t) {
        auto elite = select_roulette(pop, rng);
        if (elite[0].fitness == 3.0) ++first;
    }
    const double e1 = trials * 0.75, e2 = trials * 0.25;
    const double o1 = first, o2 = trials - first;
    const double chi2 = (o1 - e1) * (o1 - e1) / e1 + (o2 - e2) * (o2 - e2) / e2;
    CHECK(chi2 < 6.635);
}

TEST_CASE("select_roulette: count is exactly m/4, all-zero falls back to uniform") {
    Population pop = pop_with_fitness(std::vector<double>(16, 0.0));
    Rng rng(5);
    auto elite = select_roulette(pop, rng);
    CHECK(elite.size() == 4);
}

TEST_CASE("select_tournament: p=0 equals select_linear") {
    Rng frng(3);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> fitness(12);
    for (double& f : fitness) f = unit(frng);
    Population pop = pop_with_fitness(fitness);
    Rng rng(8);
    auto a = select_tournament(pop, 0.0, rng);
    auto b = select_linear(pop);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].fitness == b[i].fitness);
        CHECK(a[i].genome == b[i].genome);
    }
}

TEST_CASE("select_tournament: extinction to exactly m/4 keeps all survivors") {
    Population pop = pop_with_fitness({0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8});
    Rng rng(2);
    auto elite = select_tournament(pop, 0.75, rng);  // 6 extinct, 2 survive = quota
    CHECK(elite.size() == 2);
}

TEST_CASE("select_tournament: quota violation and membership oracle") {
    Population pop = pop_with_fitness({0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8});
    Rng rng(2);
    CHECK_THROWS_AS(select_tournament(pop, 0.9, rng), std::invalid_argument);

    // elite genomes must come from the population
    auto elite = select_tournament(pop, 0.5, rng);
    CHECK(elite.size() == 2);
    for (const auto& e : elite) {
        bool member = false;
        for (const auto& o : pop.organisms)
            if (o.genome == e.genome && o.fitness == e.fitness) member = true;
        CHECK(member);
    }
}

TEST_CASE("crossover: identical parents give an identical child") {
    Population pop = pop_with_fitness({0.5, 0.5, 0.5, 0.5}, 6);
    Rng rng(4);
    auto child = crossover(pop.organisms[0], pop.organisms[0], CrossoverKind::UniformMask, rng);
    CHECK(child.genome == pop.organisms[0].genome);
    CHECK_FALSE(child.fresh);
}

TEST_CASE("crossover: each gene comes from one of the parents") {
    Population pop = pop_with_fitness({0.1, 0.9}, 12);
    Rng rng(6);
    for (auto kind : {CrossoverKind::UniformMask, CrossoverKind::SinglePoint}) {
        for (int t = 0; t < 50; ++t) {
            auto child = crossover(pop.organisms[0], pop.organisms[1], kind, rng);
            for (std::size_t i = 0; i < child.genome.size(); ++i) {
                const bool from_a = child.genome[i] == pop.organisms[0].genome[i];
                const bool from_b = child.genome[i] == pop.organisms[1].genome[i];
                CHECK((from_a || from_b));
            }
        }
    }
}

TEST_CASE("crossover: uniform mask picks each side about half the time") {
    Population pop = pop_with_fitness({0.1, 0.9}, 8);
    Rng rng(10);
    const int trials = 10000;
    std::vector<int> from_a(8, 0);
    for (int t = 0; t < trials; ++t) {
        auto child = crossover(pop.organisms[0], pop.organisms[1], CrossoverKind::UniformMask, rng);
        for (std::size_t i = 0; i < 8; ++i)
            if (child.genome[i] == pop.organisms[0].genome[i]) ++from_a[i];
    }
    for (int count : from_a) {
        CHECK(count > trials * 0.45);
        CHECK(count < trials * 0.55);
    }
}

TEST_CASE("mutate edge cases") {
    Population pop = pop_with_fitness({0.5}, 10);
    Rng rng(3);
    auto same1 = mutate(pop.organisms[0], 0.0, 0.5, rng);
    CHECK(same1.genome == pop.organisms[0].genome);
    auto same2 = mutate(pop.organisms[0], 1.0, 0.0, rng);
    CHECK(same2.genome == pop.organisms[0].genome);
    auto wild = mutate(pop.organisms[0], 1.0, 10.0, rng);
    CHECK(in_unit_box(wild));
}

TEST_CASE("next_generation: counting and elitism") {
    GaConfig cfg = toy_config();
    for (std::size_t m : {4u, 8u, 100u}) {
        cfg.population_size = m;
        std::vector<Organism> elite;
        Rng grng(m);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (std::size_t i = 0; i < m / 4; ++i) {
            Organism o;
            o.genome = {unit(grng), unit(grng)};
            o.fitness = unit(grng);
            elite.push_back(o);
        }
        Rng rng(7);
        Population next = next_generation(elite, 1, cfg, rng);
        CHECK(next.size() == m);
        CHECK(next.target_class == 1);
        // elite verbatim at the front
        for (std::size_t i = 0; i < elite.size(); ++i)
            CHECK(next.organisms[i].genome == elite[i].genome);
    }
}

TEST_CASE("evolve_class: fully confident solver converges immediately") {
    GaConfig cfg = toy_config();
    SolverNetwork net = confident_solver(3, 4, 2);
    Rng rng(1);
    auto result = evolve_class(net, 2, cfg, rng);
    CHECK(result.converged);
    CHECK(result.generations == 0);
    CHECK(result.population.size() == cfg.population_size);
}

TEST_CASE("evolve_class: impossible threshold hits the generation cap gracefully") {
    GaConfig cfg = toy_config();
    cfg.fitness_threshold = 0.9999989;  // zero solver K=4 gives exactly 0.25 everywhere
    cfg.max_generations = 1;
    SolverNetwork net = zero_solver(3, 4);
    Rng rng(1);
    auto result = evolve_class(net, 0, cfg, rng);
    CHECK_FALSE(result.converged);
    CHECK(result.population.size() == cfg.population_size);
}

TEST_CASE("evolve_class on a trained blobs solver: classify-back holds") {
    Rng drng(50);
    Dataset blobs = make_blobs(100, {{0.2, 0.2}, {0.8, 0.8}}, 0.05, drng);
    SolverNetwork net = make_solver(2, 16, 2, 5);
    TrainConfig tc;
    tc.epochs = 60;
    tc.seed = 5;
    train(net, blobs, tc);

    GaConfig cfg;
    cfg.population_size = 40;
    cfg.fitness_threshold = 0.95;
    cfg.max_generations = 200;
    Rng rng(3);
    auto result = evolve_class(net, 1, cfg, rng);
    REQUIRE(result.converged);
    Matrix genomes(result.population.size(), 2);
    for (std::size_t i = 0; i < result.population.size(); ++i)
        std::copy(result.population.organisms[i].genome.begin(),
                  result.population.organisms[i].genome.end(), genomes.row(i).begin());
    auto preds = predict(net, genomes);
    for (int p : preds) CHECK(p == 1);
    for (const auto& o : result.population.organisms) {
        CHECK(o.fitness > 0.95);
        CHECK(in_unit_box(o));
    }
}

TEST_CASE("evolution invariants: size constancy, elitist monotonicity, closure") {
    SolverNetwork net = make_solver(3, 6, 3, 13);
    GaConfig cfg;
    cfg.population_size = 16;
    cfg.fitness_threshold = 0.999;  // keep iterating; track invariants along the way
    cfg.max_generations = 30;
    Rng rng(11);

    Population pop;
    pop.target_class = 1;
    pop.organisms.resize(cfg.population_size);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (auto& o : pop.organisms) {
        o.genome = {unit(rng), unit(rng), unit(rng)};
    }
    evaluate_fitness(net, pop);
    double prev_max = 0.0;
    for (const auto& o : pop.organisms) prev_max = std::max(prev_max, o.fitness);

    for (int gen = 0; gen < 25; ++gen) {
        auto elite = select_linear(pop);
        pop = next_generation(elite, pop.target_class, cfg, rng);
        evaluate_fitness(net, pop);
        CHECK(pop.size() == cfg.population_size);
        double max_fit = 0.0;
        for (const auto& o : pop.organisms) {
            max_fit = std::max(max_fit, o.fitness);
            CHECK(in_unit_box(o));
        }
        CHECK(max_fit >= prev_max - 1e-15);
        prev_max = max_fit;
    }
}

TEST_CASE("evolve_class determinism under a fixed seed") {
    SolverNetwork net = make_solver(3, 6, 3, 13);
    GaConfig cfg;
    cfg.population_size = 8;
    cfg.fitness_threshold = 0.5;
    cfg.max_generations = 100;
    Rng rng_a(42), rng_b(42);
    auto a = evolve_class(net, 0, cfg, rng_a);
    auto b = evolve_class(net, 0, cfg, rng_b);
    REQUIRE(a.population.size() == b.population.size());
    for (std::size_t i = 0; i < a.population.size(); ++i)
        CHECK(a.population.organisms[i].genome == b.population.organisms[i].genome);
}

TEST_CASE("generate_raw: counts and classify-back") {
    SolverNetwork net = confident_solver(3, 2, 0);
    // make both classes reachable: symmetric solver biasing by first input dim
    net = make_solver(3, 4, 2, 91);
    GaConfig cfg;
    cfg.population_size = 4;
    cfg.fitness_threshold = 0.6;
    cfg.max_generations = 300;
    cfg.culture_count = 1;
    auto result = generate_raw(net, 2, cfg);
    CHECK(result.dataset.size() == 8);
    auto counts = class_counts(result.dataset);
    CHECK(counts[0] == 4);
    CHECK(counts[1] == 4);

    cfg.culture_count = 2;
    auto r3 = generate_raw(net, 2, cfg);
    CHECK(r3.dataset.size() == 16);
    auto c3 = class_counts(r3.dataset);
    CHECK(c3[0] == c3[1]);

    if (result.converged_all) {
        auto preds = predict(net, result.dataset.features);
        for (std::size_t i = 0; i < preds.size(); ++i) CHECK(preds[i] == result.dataset.labels[i]);
    }
}

TEST_CASE("generate_raw: equal class counts for K=3") {
    SolverNetwork net = make_solver(2, 6, 3, 17);
    GaConfig cfg;
    cfg.population_size = 8;
    cfg.fitness_threshold = 0.5;
    cfg.max_generations = 400;
    auto result = generate_raw(net, 3, cfg);
    auto counts = class_counts(result.dataset);
    CHECK(counts[0] == counts[1]);
    CHECK(counts[1] == counts[2]);
}

TEST_CASE("duplicate_count") {
    Population distinct = pop_with_fitness({0.1, 0.2, 0.3, 0.4}, 3);
    CHECK(duplicate_count(distinct) == 0);

    Population same;
    Organism o;
    o.genome = {0.5, 0.5};
    for (int i = 0; i < 6; ++i) same.organisms.push_back(o);
    CHECK(duplicate_count(same) == 5);
}

TEST_CASE("duplicate_count matches pairwise oracle on random pops") {
    Rng rng(77);
    std::uniform_int_distribution<int> grid(0, 3);  // coarse grid forces collisions
    for (int trial = 0; trial < 10; ++trial) {
        Population pop;
        for (int i = 0; i < 12; ++i) {
            Organism o;
            o.genome = {grid(rng) / 3.0, grid(rng) / 3.0};
            pop.organisms.push_back(o);
        }
        std::size_t expect = 0;
        for (std::size_t i = 1; i < pop.size(); ++i) {
            bool dup = false;
            for (std::size_t j = 0; j < i; ++j)
                if (pop.organisms[i].genome == pop.organisms[j].genome) dup = true;
            if (dup) ++expect;
        }
        CHECK(duplicate_count(pop) == expect);
    }
}

TEST_CASE("mean_pairwise_distance") {
    Population pop;
    Organism a, b;
    a.genome = {0.0, 0.0};
    b.genome = {3.0, 4.0};  // distance 5 (genomes out of box on purpose, pure geometry)
    pop.organisms = {a, b};
    CHECK(mean_pairwise_distance(pop) == doctest::Approx(5.0));

    Population same;
    for (int i = 0; i < 4; ++i) same.organisms.push_back(a);
    CHECK(mean_pairwise_distance(same) == 0.0);

    Population single;
    single.organisms = {a};
    CHECK(mean_pairwise_distance(single) == 0.0);
}

TEST_CASE("mean_pairwise_distance matches brute-force oracle") {
    Rng rng(31);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Population pop;
    for (int i = 0; i < 15; ++i) {
        Organism o;
        o.genome = {unit(rng), unit(rng), unit(rng)};
        pop.organisms.push_back(o);
    }
    double sum = 0.0;
    int pairs = 0;
    for (std::size_t i = 0; i < pop.size(); ++i)
        for (std::size_t j = i + 1; j < pop.size(); ++j) {
            double d2 = 0.0;
            for (std::size_t k = 0; k < 3; ++k) {
                const double diff = pop.organisms[i].genome[k] - pop.organisms[j].genome[k];
                d2 += diff * diff;
            }
            sum += std::sqrt(d2);
            ++pairs;
        }
    CHECK(mean_pairwise_distance(pop) == doctest::Approx(sum / pairs).epsilon(1e-9));
}

TEST_CASE("config validation") {
    GaConfig cfg = toy_config();
    cfg.population_size = 6;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = toy_config();
    cfg.fitness_threshold = 1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
