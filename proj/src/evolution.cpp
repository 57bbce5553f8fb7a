#include "oneat/evolution.hpp"

#include "oneat/error.hpp"
#include "oneat/network.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <thread>

namespace oneat {

void EvolutionConfig::validate() const {
    if (population_size == 0) throw Error(ErrorKind::Config, "population_size must be positive");
    for (double p : {survival_fraction, interspecies_mating_prob, crossover_prob}) {
        if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::Config, "evolution probabilities must lie in [0,1]");
    }
    if (!(distance_threshold > 0.0)) throw Error(ErrorKind::Config, "distance_threshold must be positive");
    if (max_generations_per_window == 0) throw Error(ErrorKind::Config, "max_generations_per_window must be positive");
    if (!(plateau_epsilon >= 0.0)) throw Error(ErrorKind::Config, "plateau_epsilon must be >= 0");
    genome.validate();
}

Population Population::initial(std::size_t n_features, const EvolutionConfig& config, Rng& rng) {
    config.validate();
    Population pop;
    pop.members.reserve(config.population_size);
    for (std::size_t i = 0; i < config.population_size; ++i)
        pop.members.emplace_back(minimal_genome(n_features, pop.registry, rng, config.genome));
    return pop;
}

std::size_t Population::champion_index() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < members.size(); ++i)
        if (members[i].raw_fitness > members[best].raw_fitness) best = i;
    return best;
}

// ---------------------------------------------------------------------------

void evaluate(Population& population, std::span<const LoanRecord> window, const FitnessSpec& spec,
              std::size_t threads) {
    if (window.empty()) throw Error(ErrorKind::NoData, "empty window");
    auto& members = population.members;
    auto work = [&](std::size_t begin, std::size_t stride) {
        for (std::size_t i = begin; i < members.size(); i += stride) {
            const Network net = Network::compile(members[i].genome);
            members[i].raw_fitness = fitness_value(net, members[i].genome.historical_fitness(), window, spec);
        }
    };

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, members.size());
    if (threads <= 1) {
        work(0, 1);
        return;
    }
    std::vector<std::exception_ptr> errors(threads);
    {
        std::vector<std::jthread> workers;
        for (std::size_t t = 0; t < threads; ++t) {
            workers.emplace_back([&, t] {
                try {
                    work(t, threads);
                } catch (...) {
                    errors[t] = std::current_exception();
                }
            });
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

void speciate(Population& population, const EvolutionConfig& config, Rng& rng) {
    auto& species = population.species;
    for (auto& s : species) s.member_ids.clear();

    for (std::size_t i = 0; i < population.members.size(); ++i) {
        Member& m = population.members[i];
        auto home = std::find_if(species.begin(), species.end(), [&](const Species& s) {
            return compatibility_distance(s.representative, m.genome, config.genome) < config.distance_threshold;
        });
        if (home == species.end()) {
            Species founded{population.next_species_id++, m.genome, {}};
            species.push_back(std::move(founded));
            home = species.end() - 1;
        }
        home->member_ids.push_back(i);
        m.species_id = home->id;
    }

    std::erase_if(species, [](const Species& s) { return s.member_ids.empty(); });
    for (auto& s : species) {
        std::uniform_int_distribution<std::size_t> pick(0, s.member_ids.size() - 1);
        s.representative = population.members[s.member_ids[pick(rng)]].genome;

        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t id : s.member_ids) best = std::max(best, population.members[id].raw_fitness);
        if (best > s.best_fitness_ever) {
            s.best_fitness_ever = best;
            s.stagnation = 0;
        } else {
            ++s.stagnation;
        }
    }
}

std::vector<double> shared_fitness(const Population& population) {
    const auto& members = population.members;
    std::vector<double> adjusted(members.size(), 0.0);
    if (members.empty()) return adjusted;

    double floor = 0.0;
    for (const auto& m : members) floor = std::min(floor, m.raw_fitness);

    std::vector<std::size_t> species_size(members.size(), 1);
    for (const auto& s : population.species)
        for (std::size_t id : s.member_ids) species_size[id] = s.member_ids.size();

    for (std::size_t i = 0; i < members.size(); ++i)
        adjusted[i] = (members[i].raw_fitness - floor) / static_cast<double>(species_size[i]);
    return adjusted;
}

std::vector<std::size_t> allocate_quotas(std::span<const double> weights, std::size_t total) {
    std::vector<std::size_t> quotas(weights.size(), 0);
    if (weights.empty()) return quotas;

    double sum = 0.0;
    for (double w : weights) sum += std::max(0.0, w);
    std::vector<double> exact(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i) {
        exact[i] = sum > 0.0 ? std::max(0.0, weights[i]) / sum * static_cast<double>(total)
                             : static_cast<double>(total) / static_cast<double>(weights.size());
    }

    std::size_t assigned = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        quotas[i] = std::min(total, static_cast<std::size_t>(std::floor(exact[i])));
        assigned += quotas[i];
    }
    // Floating-point rounding can in principle overshoot; trim from the end.
    for (std::size_t i = weights.size(); assigned > total && i-- > 0;) {
        const std::size_t take = std::min(quotas[i], assigned - total);
        quotas[i] -= take;
        assigned -= take;
    }

    std::vector<std::size_t> order(weights.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return exact[a] - std::floor(exact[a]) > exact[b] - std::floor(exact[b]);
    });
    for (std::size_t k = 0; assigned < total; k = (k + 1) % order.size()) {
        ++quotas[order[k]];
        ++assigned;
    }
    return quotas;
}

namespace {

bool chance(Rng& rng, double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p; }

std::size_t pick_index(Rng& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

} // namespace

void reproduce(Population& population, const EvolutionConfig& config, Rng& rng) {
    auto& members = population.members;
    if (members.empty()) throw Error(ErrorKind::NoData, "cannot reproduce an empty population");
    if (population.species.empty()) throw Error(ErrorKind::Config, "reproduce needs a speciated population");
    population.registry.new_generation();

    for (auto& m : members) m.adjusted_fitness = 0.0;
    const std::vector<double> adjusted = shared_fitness(population);
    for (std::size_t i = 0; i < members.size(); ++i) members[i].adjusted_fitness = adjusted[i];

    const std::size_t champion = population.champion_index();
    auto holds_champion = [&](const Species& s) {
        return std::find(s.member_ids.begin(), s.member_ids.end(), champion) != s.member_ids.end();
    };

    // Stagnant species die out unless they hold the population champion.
    auto& species = population.species;
    const bool all_stagnant = std::all_of(species.begin(), species.end(), [&](const Species& s) {
        return s.stagnation > config.stagnation_limit;
    });
    if (all_stagnant) {
        std::erase_if(species, [&](const Species& s) { return !holds_champion(s); });
        for (auto& s : species) s.stagnation = 0;
    } else {
        std::erase_if(species, [&](const Species& s) {
            return s.stagnation > config.stagnation_limit && !holds_champion(s);
        });
    }

    std::vector<double> weights;
    std::size_t champion_species = 0;
    for (std::size_t k = 0; k < species.size(); ++k) {
        double w = 0.0;
        for (std::size_t id : species[k].member_ids) w += adjusted[id];
        weights.push_back(w);
        if (holds_champion(species[k])) champion_species = k;
    }
    std::vector<std::size_t> quotas = allocate_quotas(weights, config.population_size);
    if (quotas[champion_species] == 0) {
        const auto donor = std::max_element(quotas.begin(), quotas.end()) - quotas.begin();
        --quotas[static_cast<std::size_t>(donor)];
        ++quotas[champion_species];
    }

    // Parent pools: the top survival_fraction of each species by raw fitness.
    std::vector<std::vector<std::size_t>> pools(species.size());
    for (std::size_t k = 0; k < species.size(); ++k) {
        std::vector<std::size_t> ranked = species[k].member_ids;
        // Shuffle first so equal fitness is ranked at random rather than by
        // age; otherwise fresh structure never outranks the old elites.
        std::shuffle(ranked.begin(), ranked.end(), rng);
        std::stable_sort(ranked.begin(), ranked.end(), [&](std::size_t a, std::size_t b) {
            return members[a].raw_fitness > members[b].raw_fitness;
        });
        const auto keep = static_cast<std::size_t>(
            std::ceil(config.survival_fraction * static_cast<double>(ranked.size()) - 1e-9));
        ranked.resize(std::clamp<std::size_t>(keep, 1, ranked.size()));
        pools[k] = std::move(ranked);
    }

    const GenomeConfig& gc = config.genome;
    std::vector<Member> next;
    next.reserve(config.population_size);
    for (std::size_t k = 0; k < species.size(); ++k) {
        const std::size_t quota = quotas[k];
        if (quota == 0) continue;
        const auto& pool = pools[k];

        std::size_t elites = species[k].member_ids.size() >= config.elitism_min_species_size ? config.elitism : 0;
        if (k == champion_species) elites = std::max<std::size_t>(elites, 1);
        elites = std::min({elites, quota, pool.size()});
        for (std::size_t e = 0; e < elites; ++e) {
            const Member& source = members[pool[e]];
            Member copy(source.genome);
            copy.species_id = source.species_id;
            copy.elite = true;
            copy.parents = {pool[e]};
            next.push_back(std::move(copy));
        }

        for (std::size_t n = elites; n < quota; ++n) {
            const std::size_t first = pool[pick_index(rng, pool.size())];
            std::vector<std::size_t> parents{first};
            std::optional<Genome> child;
            if (species.size() > 1 && chance(rng, config.interspecies_mating_prob)) {
                std::size_t other = pick_index(rng, species.size() - 1);
                if (other >= k) ++other;
                const std::size_t second = pools[other][pick_index(rng, pools[other].size())];
                parents.push_back(second);
            } else if (pool.size() >= 2 && chance(rng, config.crossover_prob)) {
                std::size_t second = pool[pick_index(rng, pool.size() - 1)];
                if (second == first) second = pool.back();
                parents.push_back(second);
            }
            if (parents.size() == 2) {
                const Member& a = members[parents[0]];
                const Member& b = members[parents[1]];
                double fa = a.raw_fitness;
                double fb = b.raw_fitness;
                // On equal fitness the leaner parent counts as fitter. Coarse
                // fitness (accuracy on a few records) ties constantly, and the
                // take-both-sides tie rule would otherwise keep merging genomes.
                const std::size_t size_a = a.genome.connections().size();
                const std::size_t size_b = b.genome.connections().size();
                if (fa == fb && size_a != size_b) {
                    double& leaner = size_a < size_b ? fa : fb;
                    leaner = std::nextafter(leaner, std::numeric_limits<double>::infinity());
                }
                child = crossover(a.genome, b.genome, fa, fb, rng, gc);
            } else {
                child = members[first].genome;
            }

            *child = mutate_weights(*child, rng, gc);
            if (chance(rng, gc.p_add_node)) *child = mutate_add_node(*child, population.registry, rng);
            if (chance(rng, gc.p_add_connection))
                *child = mutate_add_connection(*child, population.registry, rng, gc);

            Member offspring(std::move(*child));
            offspring.parents = std::move(parents);
            next.push_back(std::move(offspring));
        }
    }

    members = std::move(next);
    for (auto& s : species) s.member_ids.clear();
    ++population.generation;
}

WindowEvolution evolve_on_window(Population& population, std::span<const LoanRecord> window,
                                 const FitnessSpec& spec, const EvolutionConfig& config, Rng& rng,
                                 const GenerationObserver& observer) {
    if (window.empty()) throw Error(ErrorKind::NoData, "cannot evolve on an empty window");
    if (population.members.empty()) throw Error(ErrorKind::NoData, "population is empty");

    // Fitness scales change from window to window, so stagnation is measured
    // within the window only.
    for (auto& s : population.species) {
        s.best_fitness_ever = -std::numeric_limits<double>::infinity();
        s.stagnation = 0;
    }

    std::size_t generations = 0;
    std::size_t stalled = 0;
    double best_so_far = -std::numeric_limits<double>::infinity();
    while (true) {
        evaluate(population, window, spec, config.threads);
        speciate(population, config, rng);
        ++generations;

        const double best = population.members[population.champion_index()].raw_fitness;
        if (best - best_so_far < config.plateau_epsilon)
            ++stalled;
        else
            stalled = 0;
        best_so_far = std::max(best_so_far, best);

        bool keep_going = true;
        if (observer) keep_going = observer({generations, best, population.species.size()});
        if (!keep_going || generations >= config.max_generations_per_window ||
            stalled >= config.plateau_generations)
            break;
        reproduce(population, config, rng);
    }

    const Member& champion = population.members[population.champion_index()];
    return {generations, champion.genome, champion.raw_fitness};
}

} // namespace oneat
