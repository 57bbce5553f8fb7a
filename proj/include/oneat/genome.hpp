#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace oneat {

using Rng = std::mt19937_64;
using NodeId = std::int32_t;
using Innovation = std::int64_t;

enum class NodeKind : std::uint8_t { Input, Bias, Hidden, Output };

std::string_view to_string(NodeKind kind) noexcept;
NodeKind parse_node_kind(std::string_view text);

struct NodeGene {
    NodeId id = 0;
    NodeKind kind = NodeKind::Hidden;

    friend bool operator==(const NodeGene&, const NodeGene&) = default;
};

struct ConnectionGene {
    NodeId in_node = 0;
    NodeId out_node = 0;
    double weight = 0.0;
    bool enabled = true;
    Innovation innovation = 0;

    friend bool operator==(const ConnectionGene&, const ConnectionGene&) = default;
};

/// Mutation, crossover and compatibility parameters.
struct GenomeConfig {
    double p_weight_mutate = 0.8;
    double p_perturb = 0.9;
    double perturb_std = 0.5;
    double p_add_connection = 0.05;
    double p_add_node = 0.03;
    double p_keep_disabled = 0.75;
    double weight_init_range = 1.0;  // fresh weights ~ U[-range, range]
    double weight_limit = 8.0;       // mutated weights clamped to [-limit, limit]

    double c_excess = 1.0;
    double c_disjoint = 1.0;
    double c_weight = 0.4;
    std::size_t small_genome_size = 20;  // below this on both sides, N = 1

    void validate() const;
};

/// Hands out historical markings. Identical structural mutations inside one
/// generation are memoised so they receive identical innovation numbers;
/// call new_generation() to start a fresh memo. Not thread-safe: all
/// structural mutations of a generation must go through it serially.
class InnovationRegistry {
public:
    struct Split {
        NodeId node = 0;
        Innovation in_link = 0;   // split.in_node -> node
        Innovation out_link = 0;  // node -> split.out_node
    };

    Innovation connection_innovation(NodeId in_node, NodeId out_node);
    Split split(const ConnectionGene& connection);

    // Makes sure ids [0, count) are never handed out as new hidden nodes.
    void reserve_nodes(NodeId count);
    void new_generation();

    Innovation next_innovation() const noexcept { return next_innovation_; }
    NodeId next_node_id() const noexcept { return next_node_id_; }

private:
    Innovation next_innovation_ = 1;
    NodeId next_node_id_ = 0;
    std::map<std::pair<NodeId, NodeId>, Innovation> connection_memo_;
    std::map<Innovation, Split> split_memo_;
};

/// A NEAT genotype. Nodes are kept sorted by id and connections sorted by
/// innovation. The constructor rejects anything that breaks the structural
/// invariants (unique ids, one bias, one output, endpoints present,
/// no connection into an input or bias, acyclic connection graph).
class Genome {
public:
    Genome(std::vector<NodeGene> nodes, std::vector<ConnectionGene> connections,
           double historical_fitness = 0.0);

    const std::vector<NodeGene>& nodes() const noexcept { return nodes_; }
    const std::vector<ConnectionGene>& connections() const noexcept { return connections_; }

    // fitness(t-1) carried between windows by the PAP fitness.
    double historical_fitness() const noexcept { return historical_fitness_; }
    void set_historical_fitness(double value) noexcept { historical_fitness_ = value; }

    std::size_t n_inputs() const noexcept { return n_inputs_; }
    std::size_t hidden_count() const noexcept;
    NodeId bias_id() const noexcept { return bias_id_; }
    NodeId output_id() const noexcept { return output_id_; }

    std::optional<NodeKind> kind_of(NodeId id) const noexcept;
    bool has_connection(NodeId in_node, NodeId out_node) const noexcept;

    friend bool operator==(const Genome&, const Genome&) = default;

private:
    std::vector<NodeGene> nodes_;
    std::vector<ConnectionGene> connections_;
    double historical_fitness_ = 0.0;
    std::size_t n_inputs_ = 0;
    NodeId bias_id_ = 0;
    NodeId output_id_ = 0;
};

// True if the directed graph formed by `connections` contains a cycle.
bool has_cycle(std::span<const ConnectionGene> connections, bool enabled_only = false);

// Inputs get ids 0..n-1, the bias n and the output n+1.
Genome minimal_genome(std::size_t n_features, InnovationRegistry& registry, Rng& rng,
                      const GenomeConfig& config = {});

Genome mutate_weights(const Genome& genome, Rng& rng, const GenomeConfig& config);

// Adds one connection between previously unconnected nodes. Candidates that
// would close a directed cycle (over enabled and disabled genes alike) or
// target an input/bias are never chosen.
Genome mutate_add_connection(const Genome& genome, InnovationRegistry& registry, Rng& rng,
                             const GenomeConfig& config);

Genome mutate_add_node(const Genome& genome, InnovationRegistry& registry, Rng& rng);

Genome crossover(const Genome& parent_a, const Genome& parent_b, double fitness_a,
                 double fitness_b, Rng& rng, const GenomeConfig& config);

struct GeneAlignment {
    std::size_t matching = 0;
    std::size_t disjoint = 0;
    std::size_t excess = 0;
    double mean_weight_difference = 0.0;
};

GeneAlignment align(const Genome& a, const Genome& b);
double compatibility_distance(const Genome& a, const Genome& b, const GenomeConfig& config);

// Line format:
//   genome <n_nodes> <n_conns> <historical_fitness>
//   node <id> <kind>
//   conn <in> <out> <weight> <enabled> <innovation>
void write_genome(std::ostream& out, const Genome& genome);
Genome read_genome(std::istream& in);

void save_genome(const std::string& path, const Genome& genome);
Genome load_genome(const std::string& path);

} // namespace oneat
