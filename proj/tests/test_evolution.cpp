#include "doctest.h"

#include "oneat/error.hpp"
#include "oneat/evolution.hpp"
#include "support.hpp"

#include <algorithm>
#include <numeric>
#include <set>

using namespace oneat;
namespace t = oneat::testing;

namespace {

Population population_of(std::vector<Genome> genomes) {
    Population pop;
    pop.registry.reserve_nodes(100);
    for (auto& g : genomes) {
        for (const auto& c : g.connections()) REQUIRE(pop.registry.connection_innovation(c.in_node, c.out_node) == c.innovation);
        pop.members.emplace_back(std::move(g));
    }
    pop.registry.new_generation();
    return pop;
}

// Genomes over one input that differ only in the input weight. The bias
// link matches with a zero gap, so distance is 0.2 * |dw| by default.
Genome weighted(double w) { return t::single_layer({w}, 0.0); }

std::vector<std::vector<std::size_t>> groups(const Population& pop) {
    std::vector<std::vector<std::size_t>> out;
    for (const auto& s : pop.species) out.push_back(s.member_ids);
    return out;
}

std::vector<LoanRecord> separable_window(std::mt19937_64& rng, std::size_t n) {
    auto records = t::random_records(rng, n, 2);
    for (auto& r : records) r.label = r.features[0] + r.features[1] > 1.0 ? Label::Positive : Label::Negative;
    return records;
}

} // namespace

TEST_SUITE("speciate") {
    TEST_CASE("identical genomes share one species") {
        Population pop = population_of(std::vector<Genome>(12, weighted(0.3)));
        Rng rng(1);
        speciate(pop, {}, rng);
        CHECK(pop.species.size() == 1);
        CHECK(pop.species[0].member_ids.size() == 12);
        for (const auto& m : pop.members) CHECK(m.species_id == pop.species[0].id);
    }

    TEST_CASE("everyone far apart founds their own species") {
        EvolutionConfig cfg;
        cfg.distance_threshold = 0.1;
        Population pop = population_of({weighted(-3), weighted(-1), weighted(1), weighted(3)});
        Rng rng(1);
        speciate(pop, cfg, rng);
        CHECK(pop.species.size() == 4);
    }

    TEST_CASE("first fit in member order") {
        // d(a,b) = 0.2, d(a,c) = 0.6, d(b,c) = 0.4 against a threshold of 0.3.
        EvolutionConfig cfg;
        cfg.distance_threshold = 0.3;
        Population pop = population_of({weighted(0.0), weighted(1.0), weighted(3.0)});
        Rng rng(1);
        speciate(pop, cfg, rng);
        CHECK(groups(pop) == std::vector<std::vector<std::size_t>>{{0, 1}, {2}});
    }

    TEST_CASE("strictly closer than the threshold joins") {
        EvolutionConfig cfg;
        cfg.distance_threshold = 0.2;  // exactly d(a,b)
        Population pop = population_of({weighted(0.0), weighted(1.0)});
        Rng rng(1);
        speciate(pop, cfg, rng);
        CHECK(pop.species.size() == 2);
    }

    TEST_CASE("representatives come from the current members") {
        EvolutionConfig cfg;
        cfg.distance_threshold = 0.5;
        Population pop = population_of({weighted(0.0), weighted(0.5), weighted(3.0)});
        Rng rng(2);
        speciate(pop, cfg, rng);
        pop.members[0].genome = weighted(0.25);
        pop.members[1].genome = weighted(0.75);
        speciate(pop, cfg, rng);
        for (const auto& s : pop.species) {
            const bool found = std::any_of(s.member_ids.begin(), s.member_ids.end(),
                                           [&](std::size_t id) { return pop.members[id].genome == s.representative; });
            CHECK(found);
        }
    }

    TEST_CASE("stagnation counts generations without a new best") {
        Population pop = population_of({weighted(0.0), weighted(0.1)});
        Rng rng(1);
        pop.members[0].raw_fitness = 1.0;
        speciate(pop, {}, rng);
        CHECK(pop.species[0].stagnation == 0);
        speciate(pop, {}, rng);
        speciate(pop, {}, rng);
        CHECK(pop.species[0].stagnation == 2);
        pop.members[1].raw_fitness = 2.0;
        speciate(pop, {}, rng);
        CHECK(pop.species[0].stagnation == 0);
        CHECK(pop.species[0].best_fitness_ever == 2.0);
    }
}

TEST_SUITE("shared fitness") {
    TEST_CASE("one species of four") {
        Population pop = population_of(std::vector<Genome>(4, weighted(0.0)));
        for (auto& m : pop.members) m.raw_fitness = 1.0;
        Rng rng(1);
        speciate(pop, {}, rng);
        CHECK(shared_fitness(pop) == std::vector<double>(4, 0.25));
    }

    TEST_CASE("negative fitness is floored at the lowest raw value") {
        EvolutionConfig cfg;
        cfg.distance_threshold = 0.1;
        Population pop = population_of({weighted(-2.0), weighted(2.0)});
        pop.members[0].raw_fitness = -10.0;
        pop.members[1].raw_fitness = 30.0;
        Rng rng(1);
        speciate(pop, cfg, rng);
        CHECK(shared_fitness(pop) == std::vector<double>{0.0, 40.0});
    }

    TEST_CASE("equal raw fitness shrinks with species size") {
        EvolutionConfig cfg;
        cfg.distance_threshold = 0.1;
        Population pop = population_of({weighted(0), weighted(0), weighted(0), weighted(5)});
        for (auto& m : pop.members) m.raw_fitness = 6.0;
        Rng rng(1);
        speciate(pop, cfg, rng);
        CHECK(shared_fitness(pop) == std::vector<double>{2.0, 2.0, 2.0, 6.0});
    }
}

TEST_SUITE("quotas") {
    TEST_CASE("largest remainder") {
        const std::vector<double> w{3.6, 2.4};
        CHECK(allocate_quotas(w, 6) == std::vector<std::size_t>{4, 2});
    }

    TEST_CASE("zero weights share equally") {
        const std::vector<double> w{0.0, 0.0, 0.0};
        CHECK(allocate_quotas(w, 7) == std::vector<std::size_t>{3, 2, 2});
    }

    TEST_CASE("quotas always sum to the total") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int trial = 0; trial < 2000; ++trial) {
            std::vector<double> w(1 + trial % 17);
            for (auto& x : w) x = u(rng) < 0.2 ? 0.0 : u(rng) * 1e3;
            const std::size_t total = 1 + static_cast<std::size_t>(u(rng) * 500);
            const auto q = allocate_quotas(w, total);
            CHECK(std::accumulate(q.begin(), q.end(), std::size_t{0}) == total);
            for (std::size_t i = 0; i < w.size(); ++i) {
                const double exact = std::accumulate(w.begin(), w.end(), 0.0) > 0
                                         ? w[i] / std::accumulate(w.begin(), w.end(), 0.0) * double(total)
                                         : double(total) / double(w.size());
                CHECK(double(q[i]) >= std::floor(exact) - 1e-9);
                CHECK(double(q[i]) <= std::floor(exact) + 1.0 + 1e-9);
            }
        }
    }
}

TEST_SUITE("reproduce") {
    TEST_CASE("parents come from the top fifth of a species") {
        std::vector<Genome> genomes;
        for (int i = 0; i < 10; ++i) genomes.push_back(weighted(0.01 * i));
        Population pop = population_of(genomes);
        for (std::size_t i = 0; i < 10; ++i) pop.members[i].raw_fitness = double(i);
        EvolutionConfig cfg;
        cfg.population_size = 10;
        Rng rng(4);
        speciate(pop, cfg, rng);
        reproduce(pop, cfg, rng);
        CHECK(pop.members.size() == 10);
        for (const auto& m : pop.members)
            for (std::size_t p : m.parents) CHECK((p == 8 || p == 9));
    }

    TEST_CASE("the champion survives unchanged") {
        Rng rng(5);
        EvolutionConfig cfg;
        cfg.population_size = 30;
        Population pop = Population::initial(3, cfg, rng);
        std::uniform_real_distribution<double> u(0, 1);
        for (auto& m : pop.members) m.raw_fitness = u(rng);
        pop.members[17].raw_fitness = 5.0;
        const Genome champion = pop.members[17].genome;
        speciate(pop, cfg, rng);
        reproduce(pop, cfg, rng);
        const bool kept = std::any_of(pop.members.begin(), pop.members.end(),
                                      [&](const Member& m) { return m.elite && m.genome == champion; });
        CHECK(kept);
    }

    TEST_CASE("every child is an elite copy or has a parent") {
        Rng rng(6);
        EvolutionConfig cfg;
        cfg.population_size = 50;
        Population pop = Population::initial(2, cfg, rng);
        std::uniform_real_distribution<double> u(-1, 1);
        for (int g = 0; g < 20; ++g) {
            for (auto& m : pop.members) m.raw_fitness = u(rng);
            speciate(pop, cfg, rng);
            reproduce(pop, cfg, rng);
            CHECK(pop.members.size() == 50);
            for (const auto& m : pop.members) {
                CHECK_FALSE(m.parents.empty());
                if (m.elite) CHECK(m.parents.size() == 1);
                for (std::size_t p : m.parents) CHECK(p < 50);
            }
        }
    }

    TEST_CASE("stagnant species hand their slots to the champion's") {
        EvolutionConfig cfg;
        cfg.population_size = 6;
        cfg.distance_threshold = 0.1;
        cfg.stagnation_limit = 2;
        Population pop = population_of({weighted(0), weighted(0), weighted(0), weighted(5), weighted(5), weighted(5)});
        for (std::size_t i = 0; i < 6; ++i) pop.members[i].raw_fitness = i < 3 ? 1.0 : 2.0;
        Rng rng(7);
        for (int g = 0; g < 4; ++g) speciate(pop, cfg, rng);
        REQUIRE(pop.species.size() == 2);
        CHECK(pop.species[0].stagnation > 2);
        CHECK(pop.species[1].stagnation > 2);
        reproduce(pop, cfg, rng);
        CHECK(pop.members.size() == 6);
        CHECK(pop.species.size() == 1);
        CHECK(pop.species[0].stagnation == 0);
        for (const auto& m : pop.members)
            for (std::size_t p : m.parents) CHECK(p >= 3);
    }

    TEST_CASE("needs a speciated, non-empty population") {
        Population empty;
        Rng rng(1);
        CHECK_THROWS_AS(reproduce(empty, {}, rng), Error);
        Population unspeciated = population_of({weighted(0)});
        CHECK_THROWS_AS(reproduce(unspeciated, {}, rng), Error);
    }
}

TEST_SUITE("evolve on window") {
    TEST_CASE("plateau of zero runs one generation") {
        EvolutionConfig cfg;
        cfg.population_size = 20;
        cfg.plateau_generations = 0;
        Rng rng(1);
        Population pop = Population::initial(2, cfg, rng);
        std::mt19937_64 data(1);
        const auto window = separable_window(data, 40);
        CHECK(evolve_on_window(pop, window, {FitnessKind::Acc}, cfg, rng).generations_run == 1);
    }

    TEST_CASE("constant fitness stops after plateau plus one") {
        // Threshold zero: every genome classifies every record positive.
        EvolutionConfig cfg;
        cfg.population_size = 20;
        cfg.plateau_generations = 4;
        Rng rng(1);
        Population pop = Population::initial(2, cfg, rng);
        std::mt19937_64 data(2);
        const auto window = separable_window(data, 40);
        FitnessSpec spec{FitnessKind::Acc};
        spec.threshold = 0.0;
        CHECK(evolve_on_window(pop, window, spec, cfg, rng).generations_run == 5);
    }

    TEST_CASE("the generation cap wins over the plateau") {
        EvolutionConfig cfg;
        cfg.population_size = 20;
        cfg.max_generations_per_window = 3;
        cfg.plateau_generations = 100;
        Rng rng(1);
        Population pop = Population::initial(2, cfg, rng);
        std::mt19937_64 data(3);
        const auto window = separable_window(data, 40);
        CHECK(evolve_on_window(pop, window, {FitnessKind::Acc}, cfg, rng).generations_run == 3);
    }

    TEST_CASE("best fitness never drops within a window") {
        EvolutionConfig cfg;
        cfg.population_size = 60;
        cfg.max_generations_per_window = 40;
        cfg.plateau_generations = 40;
        Rng rng(9);
        Population pop = Population::initial(2, cfg, rng);
        std::mt19937_64 data(4);
        const auto window = separable_window(data, 100);
        std::vector<double> bests;
        const auto result = evolve_on_window(pop, window, {FitnessKind::Pan}, cfg, rng, [&](const GenerationStats& s) {
            bests.push_back(s.best_fitness);
            return true;
        });
        CHECK(std::is_sorted(bests.begin(), bests.end()));
        CHECK(result.best_fitness == bests.back());
        CHECK(fitness_value(result.best_genome, window, {FitnessKind::Pan}) == result.best_fitness);
        CHECK(pop.members.size() == 60);
    }

    TEST_CASE("observer can stop early") {
        EvolutionConfig cfg;
        cfg.population_size = 20;
        Rng rng(1);
        Population pop = Population::initial(2, cfg, rng);
        std::mt19937_64 data(5);
        const auto window = separable_window(data, 30);
        const auto r = evolve_on_window(pop, window, {FitnessKind::Acc}, cfg, rng,
                                        [](const GenerationStats& s) { return s.generation_in_window < 2; });
        CHECK(r.generations_run == 2);
    }

    TEST_CASE("empty window has no data") {
        EvolutionConfig cfg;
        cfg.population_size = 5;
        Rng rng(1);
        Population pop = Population::initial(2, cfg, rng);
        try {
            (void)evolve_on_window(pop, std::vector<LoanRecord>{}, {FitnessKind::Acc}, cfg, rng);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::NoData);
        }
    }

    TEST_CASE("the same seed replays the same trajectory") {
        auto run = [](std::size_t threads) {
            EvolutionConfig cfg;
            cfg.population_size = 40;
            cfg.max_generations_per_window = 15;
            cfg.threads = threads;
            Rng rng(77);
            Population pop = Population::initial(2, cfg, rng);
            std::mt19937_64 data(6);
            const auto window = separable_window(data, 60);
            evolve_on_window(pop, window, {FitnessKind::Pro}, cfg, rng);
            std::vector<Genome> out;
            for (const auto& m : pop.members) out.push_back(m.genome);
            return out;
        };
        const auto a = run(1);
        CHECK(a == run(1));
        CHECK(a == run(3));
    }

    TEST_CASE("population size holds across generations") {
        EvolutionConfig cfg;
        cfg.population_size = 37;
        cfg.max_generations_per_window = 25;
        Rng rng(12);
        Population pop = Population::initial(3, cfg, rng);
        std::mt19937_64 data(7);
        auto window = t::random_records(data, 50, 3);
        evolve_on_window(pop, window, {FitnessKind::Pap, 1e-6, 0.5}, cfg, rng, [&](const GenerationStats&) {
            CHECK(pop.members.size() == 37);
            std::set<std::size_t> seen;
            for (const auto& s : pop.species)
                for (std::size_t id : s.member_ids) CHECK(seen.insert(id).second);
            CHECK(seen.size() == 37);
            return true;
        });
    }
}

TEST_CASE("evolution settings are validated") {
    EvolutionConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.crossover_prob = 1.5;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.population_size = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);
}
