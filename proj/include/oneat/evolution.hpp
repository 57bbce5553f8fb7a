#pragma once

#include "oneat/data.hpp"
#include "oneat/fitness.hpp"
#include "oneat/genome.hpp"

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace oneat {

struct EvolutionConfig {
    std::size_t population_size = 200;
    double distance_threshold = 3.0;
    double survival_fraction = 0.2;
    std::size_t elitism = 1;                   // champions copied per species ...
    std::size_t elitism_min_species_size = 5;  // ... of at least this size
    std::size_t stagnation_limit = 15;
    double interspecies_mating_prob = 0.001;
    double crossover_prob = 0.75;
    std::size_t max_generations_per_window = 50;
    std::size_t plateau_generations = 10;
    double plateau_epsilon = 1e-6;
    std::size_t threads = 1;  // fitness evaluation workers; 0 = hardware concurrency
    GenomeConfig genome;

    void validate() const;
};

struct Member {
    explicit Member(Genome g) : genome(std::move(g)) {}

    Genome genome;
    double raw_fitness = 0.0;
    double adjusted_fitness = 0.0;
    std::optional<int> species_id;
    // Lineage of the generation that produced this member: indices into the
    // previous generation's member list.
    bool elite = false;
    std::vector<std::size_t> parents;
};

struct Species {
    int id = 0;
    Genome representative;
    std::vector<std::size_t> member_ids;  // indices into Population::members
    double best_fitness_ever = -std::numeric_limits<double>::infinity();
    std::size_t stagnation = 0;
};

struct Population {
    std::vector<Member> members;
    std::vector<Species> species;
    std::size_t generation = 0;
    InnovationRegistry registry;
    int next_species_id = 0;

    static Population initial(std::size_t n_features, const EvolutionConfig& config, Rng& rng);

    // Index of the highest raw fitness (lowest index on ties).
    std::size_t champion_index() const;
};

// Raw fitness of every member on the window. Members are independent, so
// the work is spread over config.threads workers; results do not depend on
// the worker count.
void evaluate(Population& population, std::span<const LoanRecord> window, const FitnessSpec& spec,
              std::size_t threads = 1);

// First-fit assignment against the current representatives (strictly closer
// than the threshold joins), new species otherwise; empty species vanish and
// each survivor draws a new representative from its members. Also updates
// per-species best fitness and stagnation from the current raw fitness.
void speciate(Population& population, const EvolutionConfig& config, Rng& rng);

// (raw - min(0, lowest raw)) / species size, per member.
std::vector<double> shared_fitness(const Population& population);

// Largest-remainder apportionment of `total` slots proportional to weights.
// Weights summing to zero share equally.
std::vector<std::size_t> allocate_quotas(std::span<const double> weights, std::size_t total);

void reproduce(Population& population, const EvolutionConfig& config, Rng& rng);

struct GenerationStats {
    std::size_t generation_in_window = 0;  // 1-based
    double best_fitness = 0.0;
    std::size_t species_count = 0;
};

// Return false to end the window early.
using GenerationObserver = std::function<bool(const GenerationStats&)>;

struct WindowEvolution {
    std::size_t generations_run = 0;
    Genome best_genome;
    double best_fitness = 0.0;
};

// Runs evaluate -> speciate -> share -> reproduce on one window until the
// generation cap is hit or the best raw fitness has improved by less than
// plateau_epsilon for plateau_generations consecutive generations. The
// population is left evaluated and speciated on the window.
WindowEvolution evolve_on_window(Population& population, std::span<const LoanRecord> window,
                                 const FitnessSpec& spec, const EvolutionConfig& config, Rng& rng,
                                 const GenerationObserver& observer = {});

} // namespace oneat
