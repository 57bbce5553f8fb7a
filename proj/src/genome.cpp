#include "oneat/genome.hpp"

#include "oneat/error.hpp"
#include "text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace oneat {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::InvalidDimension: return "invalid-dimension";
    case ErrorKind::IncompatibleGenome: return "incompatible-genome";
    case ErrorKind::CorruptGenome: return "corrupt-genome";
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::InvalidRecord: return "invalid-record";
    case ErrorKind::NoData: return "no-data";
    case ErrorKind::EmptyWindow: return "empty-window";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
    }
    return "unknown";
}

std::string_view to_string(NodeKind kind) noexcept {
    switch (kind) {
    case NodeKind::Input: return "input";
    case NodeKind::Bias: return "bias";
    case NodeKind::Hidden: return "hidden";
    case NodeKind::Output: return "output";
    }
    return "hidden";
}

NodeKind parse_node_kind(std::string_view text) {
    if (text == "input") return NodeKind::Input;
    if (text == "bias") return NodeKind::Bias;
    if (text == "hidden") return NodeKind::Hidden;
    if (text == "output") return NodeKind::Output;
    throw Error(ErrorKind::Parse, "unknown node kind '" + std::string(text) + "'");
}

namespace {

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

using Adjacency = std::unordered_map<NodeId, std::vector<NodeId>>;

Adjacency adjacency_of(std::span<const ConnectionGene> connections, bool enabled_only) {
    Adjacency adj;
    for (const auto& c : connections) {
        if (!enabled_only || c.enabled) adj[c.in_node].push_back(c.out_node);
    }
    return adj;
}

// Every node reachable from `from`, including itself.
std::unordered_set<NodeId> reachable_from(const Adjacency& adj, NodeId from) {
    std::vector<NodeId> stack{from};
    std::unordered_set<NodeId> seen{from};
    while (!stack.empty()) {
        NodeId n = stack.back();
        stack.pop_back();
        auto it = adj.find(n);
        if (it == adj.end()) continue;
        for (NodeId next : it->second)
            if (seen.insert(next).second) stack.push_back(next);
    }
    return seen;
}

double uniform_weight(Rng& rng, double range) {
    return std::uniform_real_distribution<double>(-range, range)(rng);
}

bool chance(Rng& rng, double p) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

} // namespace

void GenomeConfig::validate() const {
    for (double p : {p_weight_mutate, p_perturb, p_add_connection, p_add_node, p_keep_disabled}) {
        if (!is_probability(p)) throw Error(ErrorKind::Config, "genome probabilities must lie in [0,1]");
    }
    if (!(perturb_std >= 0.0)) throw Error(ErrorKind::Config, "perturb_std must be >= 0");
    if (!(weight_init_range > 0.0)) throw Error(ErrorKind::Config, "weight_init_range must be > 0");
    if (!(weight_limit >= weight_init_range))
        throw Error(ErrorKind::Config, "weight_limit must be >= weight_init_range");
    if (!(c_excess >= 0.0 && c_disjoint >= 0.0 && c_weight >= 0.0))
        throw Error(ErrorKind::Config, "distance coefficients must be >= 0");
}

// ---------------------------------------------------------------------------
// InnovationRegistry

Innovation InnovationRegistry::connection_innovation(NodeId in_node, NodeId out_node) {
    auto [it, inserted] = connection_memo_.try_emplace({in_node, out_node}, next_innovation_);
    if (inserted) ++next_innovation_;
    return it->second;
}

InnovationRegistry::Split InnovationRegistry::split(const ConnectionGene& connection) {
    auto it = split_memo_.find(connection.innovation);
    if (it != split_memo_.end()) return it->second;

    Split s;
    s.node = next_node_id_++;
    s.in_link = next_innovation_++;
    s.out_link = next_innovation_++;
    connection_memo_[{connection.in_node, s.node}] = s.in_link;
    connection_memo_[{s.node, connection.out_node}] = s.out_link;
    split_memo_.emplace(connection.innovation, s);
    return s;
}

void InnovationRegistry::reserve_nodes(NodeId count) {
    next_node_id_ = std::max(next_node_id_, count);
}

void InnovationRegistry::new_generation() {
    connection_memo_.clear();
    split_memo_.clear();
}

// ---------------------------------------------------------------------------
// Genome

bool has_cycle(std::span<const ConnectionGene> connections, bool enabled_only) {
    // Kahn's algorithm: a cycle leaves nodes with nonzero in-degree behind.
    std::unordered_map<NodeId, std::size_t> indegree;
    Adjacency adj = adjacency_of(connections, enabled_only);
    for (const auto& c : connections) {
        if (enabled_only && !c.enabled) continue;
        indegree.try_emplace(c.in_node, 0);
        ++indegree[c.out_node];
    }
    std::vector<NodeId> ready;
    for (const auto& [id, deg] : indegree)
        if (deg == 0) ready.push_back(id);
    std::size_t visited = 0;
    while (!ready.empty()) {
        NodeId n = ready.back();
        ready.pop_back();
        ++visited;
        auto it = adj.find(n);
        if (it == adj.end()) continue;
        for (NodeId next : it->second)
            if (--indegree[next] == 0) ready.push_back(next);
    }
    return visited != indegree.size();
}

Genome::Genome(std::vector<NodeGene> nodes, std::vector<ConnectionGene> connections,
               double historical_fitness)
    : nodes_(std::move(nodes)), connections_(std::move(connections)),
      historical_fitness_(historical_fitness) {
    std::sort(nodes_.begin(), nodes_.end(),
              [](const NodeGene& a, const NodeGene& b) { return a.id < b.id; });
    std::sort(connections_.begin(), connections_.end(),
              [](const ConnectionGene& a, const ConnectionGene& b) { return a.innovation < b.innovation; });

    std::size_t bias_count = 0;
    std::size_t output_count = 0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (i > 0 && nodes_[i].id == nodes_[i - 1].id)
            throw Error(ErrorKind::CorruptGenome, "duplicate node id " + std::to_string(nodes_[i].id));
        switch (nodes_[i].kind) {
        case NodeKind::Input: ++n_inputs_; break;
        case NodeKind::Bias: ++bias_count; bias_id_ = nodes_[i].id; break;
        case NodeKind::Output: ++output_count; output_id_ = nodes_[i].id; break;
        case NodeKind::Hidden: break;
        }
    }
    if (bias_count != 1 || output_count != 1)
        throw Error(ErrorKind::CorruptGenome, "genome needs exactly one bias and one output node");
    if (n_inputs_ == 0) throw Error(ErrorKind::CorruptGenome, "genome has no input nodes");

    std::set<std::pair<NodeId, NodeId>> pairs;
    for (std::size_t i = 0; i < connections_.size(); ++i) {
        const auto& c = connections_[i];
        if (c.innovation <= 0)
            throw Error(ErrorKind::CorruptGenome, "innovation numbers must be positive");
        if (i > 0 && c.innovation == connections_[i - 1].innovation)
            throw Error(ErrorKind::CorruptGenome, "duplicate innovation " + std::to_string(c.innovation));
        auto in_kind = kind_of(c.in_node);
        auto out_kind = kind_of(c.out_node);
        if (!in_kind || !out_kind)
            throw Error(ErrorKind::CorruptGenome, "connection references a missing node");
        if (*out_kind == NodeKind::Input || *out_kind == NodeKind::Bias)
            throw Error(ErrorKind::CorruptGenome, "connection targets an input or bias node");
        if (!pairs.emplace(c.in_node, c.out_node).second)
            throw Error(ErrorKind::CorruptGenome, "duplicate connection " + std::to_string(c.in_node) +
                                                      "->" + std::to_string(c.out_node));
        if (!std::isfinite(c.weight)) throw Error(ErrorKind::CorruptGenome, "non-finite weight");
    }
    if (has_cycle(connections_, false))
        throw Error(ErrorKind::CorruptGenome, "connection graph contains a cycle");
}

std::size_t Genome::hidden_count() const noexcept {
    return static_cast<std::size_t>(std::count_if(
        nodes_.begin(), nodes_.end(), [](const NodeGene& n) { return n.kind == NodeKind::Hidden; }));
}

std::optional<NodeKind> Genome::kind_of(NodeId id) const noexcept {
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), id,
                               [](const NodeGene& n, NodeId v) { return n.id < v; });
    if (it == nodes_.end() || it->id != id) return std::nullopt;
    return it->kind;
}

bool Genome::has_connection(NodeId in_node, NodeId out_node) const noexcept {
    return std::any_of(connections_.begin(), connections_.end(), [&](const ConnectionGene& c) {
        return c.in_node == in_node && c.out_node == out_node;
    });
}

// ---------------------------------------------------------------------------
// Operators

Genome minimal_genome(std::size_t n_features, InnovationRegistry& registry, Rng& rng,
                      const GenomeConfig& config) {
    if (n_features == 0) throw Error(ErrorKind::InvalidDimension, "genome needs at least one input");
    const auto n = static_cast<NodeId>(n_features);
    registry.reserve_nodes(n + 2);

    std::vector<NodeGene> nodes;
    nodes.reserve(n_features + 2);
    for (NodeId i = 0; i < n; ++i) nodes.push_back({i, NodeKind::Input});
    nodes.push_back({n, NodeKind::Bias});
    nodes.push_back({n + 1, NodeKind::Output});

    std::vector<ConnectionGene> connections;
    connections.reserve(n_features + 1);
    for (NodeId i = 0; i <= n; ++i) {
        connections.push_back({i, n + 1, uniform_weight(rng, config.weight_init_range), true,
                               registry.connection_innovation(i, n + 1)});
    }
    return Genome(std::move(nodes), std::move(connections));
}

Genome mutate_weights(const Genome& genome, Rng& rng, const GenomeConfig& config) {
    std::vector<ConnectionGene> connections = genome.connections();
    std::normal_distribution<double> noise(0.0, config.perturb_std > 0.0 ? config.perturb_std : 1.0);
    for (auto& c : connections) {
        if (!chance(rng, config.p_weight_mutate)) continue;
        if (chance(rng, config.p_perturb)) {
            if (config.perturb_std > 0.0) c.weight += noise(rng);
        } else {
            c.weight = uniform_weight(rng, config.weight_init_range);
        }
        c.weight = std::clamp(c.weight, -config.weight_limit, config.weight_limit);
    }
    return Genome(genome.nodes(), std::move(connections), genome.historical_fitness());
}

Genome mutate_add_connection(const Genome& genome, InnovationRegistry& registry, Rng& rng,
                             const GenomeConfig& config) {
    const Adjacency adj = adjacency_of(genome.connections(), false);

    std::vector<std::pair<NodeId, NodeId>> candidates;
    for (const auto& target : genome.nodes()) {
        if (target.kind != NodeKind::Hidden && target.kind != NodeKind::Output) continue;
        // source -> target closes a cycle iff target already reaches source
        const auto downstream = reachable_from(adj, target.id);
        for (const auto& source : genome.nodes()) {
            if (downstream.count(source.id) || genome.has_connection(source.id, target.id)) continue;
            candidates.emplace_back(source.id, target.id);
        }
    }
    if (candidates.empty()) return genome;

    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    auto [in_node, out_node] = candidates[pick(rng)];

    std::vector<ConnectionGene> connections = genome.connections();
    connections.push_back({in_node, out_node, uniform_weight(rng, config.weight_init_range), true,
                           registry.connection_innovation(in_node, out_node)});
    return Genome(genome.nodes(), std::move(connections), genome.historical_fitness());
}

Genome mutate_add_node(const Genome& genome, InnovationRegistry& registry, Rng& rng) {
    std::vector<std::size_t> enabled;
    for (std::size_t i = 0; i < genome.connections().size(); ++i)
        if (genome.connections()[i].enabled) enabled.push_back(i);
    if (enabled.empty()) return genome;

    std::uniform_int_distribution<std::size_t> pick(0, enabled.size() - 1);
    const std::size_t chosen = enabled[pick(rng)];
    const ConnectionGene old = genome.connections()[chosen];

    const auto split = registry.split(old);
    // Same split already present (can only come from a memo hit): leave as is.
    if (genome.kind_of(split.node)) return genome;

    std::vector<NodeGene> nodes = genome.nodes();
    nodes.push_back({split.node, NodeKind::Hidden});
    std::vector<ConnectionGene> connections = genome.connections();
    connections[chosen].enabled = false;
    connections.push_back({old.in_node, split.node, 1.0, true, split.in_link});
    connections.push_back({split.node, old.out_node, old.weight, true, split.out_link});
    return Genome(std::move(nodes), std::move(connections), genome.historical_fitness());
}

Genome crossover(const Genome& parent_a, const Genome& parent_b, double fitness_a,
                 double fitness_b, Rng& rng, const GenomeConfig& config) {
    if (parent_a.n_inputs() != parent_b.n_inputs() || parent_a.bias_id() != parent_b.bias_id() ||
        parent_a.output_id() != parent_b.output_id()) {
        throw Error(ErrorKind::IncompatibleGenome, "crossover parents have different input layouts");
    }
    const bool tie = fitness_a == fitness_b;
    const bool a_fitter = fitness_a >= fitness_b;
    const Genome& fitter = a_fitter ? parent_a : parent_b;

    auto inherit_enabled = [&](bool disabled_somewhere) {
        return !(disabled_somewhere && chance(rng, config.p_keep_disabled));
    };

    std::vector<ConnectionGene> child;
    Adjacency adj;  // only maintained in the tie case, where genes can clash
    std::set<std::pair<NodeId, NodeId>> pairs;
    auto accept = [&](ConnectionGene gene) {
        if (tie) {
            if (pairs.count({gene.in_node, gene.out_node}) || reachable_from(adj, gene.out_node).count(gene.in_node))
                return;
            pairs.emplace(gene.in_node, gene.out_node);
            adj[gene.in_node].push_back(gene.out_node);
        }
        child.push_back(gene);
    };

    const auto& ga = parent_a.connections();
    const auto& gb = parent_b.connections();
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < ga.size() || j < gb.size()) {
        if (i < ga.size() && j < gb.size() && ga[i].innovation == gb[j].innovation) {
            ConnectionGene gene = chance(rng, 0.5) ? ga[i] : gb[j];
            gene.enabled = inherit_enabled(!ga[i].enabled || !gb[j].enabled);
            accept(gene);
            ++i;
            ++j;
        } else if (j >= gb.size() || (i < ga.size() && ga[i].innovation < gb[j].innovation)) {
            if (tie || a_fitter) {
                ConnectionGene gene = ga[i];
                gene.enabled = inherit_enabled(!gene.enabled);
                accept(gene);
            }
            ++i;
        } else {
            if (tie || !a_fitter) {
                ConnectionGene gene = gb[j];
                gene.enabled = inherit_enabled(!gene.enabled);
                accept(gene);
            }
            ++j;
        }
    }

    std::vector<NodeGene> nodes;
    for (const auto& n : parent_a.nodes())
        if (n.kind != NodeKind::Hidden) nodes.push_back(n);
    std::set<NodeId> hidden;
    for (const auto& c : child) {
        for (NodeId id : {c.in_node, c.out_node}) {
            if (parent_a.kind_of(id).value_or(NodeKind::Hidden) == NodeKind::Hidden &&
                parent_b.kind_of(id).value_or(NodeKind::Hidden) == NodeKind::Hidden)
                hidden.insert(id);
        }
    }
    for (NodeId id : hidden) nodes.push_back({id, NodeKind::Hidden});

    return Genome(std::move(nodes), std::move(child), fitter.historical_fitness());
}

GeneAlignment align(const Genome& a, const Genome& b) {
    GeneAlignment result;
    const auto& ga = a.connections();
    const auto& gb = b.connections();
    const Innovation max_a = ga.empty() ? 0 : ga.back().innovation;
    const Innovation max_b = gb.empty() ? 0 : gb.back().innovation;
    const Innovation horizon = std::min(max_a, max_b);

    double weight_diff = 0.0;
    std::size_t i = 0;
    std::size_t j = 0;
    auto count_unmatched = [&](Innovation innovation) {
        if (innovation > horizon)
            ++result.excess;
        else
            ++result.disjoint;
    };
    while (i < ga.size() || j < gb.size()) {
        if (i < ga.size() && j < gb.size() && ga[i].innovation == gb[j].innovation) {
            ++result.matching;
            weight_diff += std::abs(ga[i].weight - gb[j].weight);
            ++i;
            ++j;
        } else if (j >= gb.size() || (i < ga.size() && ga[i].innovation < gb[j].innovation)) {
            count_unmatched(ga[i++].innovation);
        } else {
            count_unmatched(gb[j++].innovation);
        }
    }
    if (result.matching > 0) result.mean_weight_difference = weight_diff / static_cast<double>(result.matching);
    return result;
}

double compatibility_distance(const Genome& a, const Genome& b, const GenomeConfig& config) {
    const GeneAlignment al = align(a, b);
    const std::size_t larger = std::max(a.connections().size(), b.connections().size());
    double n = static_cast<double>(larger);
    if ((a.connections().size() < config.small_genome_size && b.connections().size() < config.small_genome_size) ||
        larger == 0)
        n = 1.0;
    return config.c_excess * static_cast<double>(al.excess) / n +
           config.c_disjoint * static_cast<double>(al.disjoint) / n +
           config.c_weight * al.mean_weight_difference;
}

// ---------------------------------------------------------------------------
// Serialization

void write_genome(std::ostream& out, const Genome& genome) {
    out << "genome " << genome.nodes().size() << ' ' << genome.connections().size() << ' '
        << detail::format_g17(genome.historical_fitness()) << '\n';
    for (const auto& n : genome.nodes()) out << "node " << n.id << ' ' << to_string(n.kind) << '\n';
    for (const auto& c : genome.connections()) {
        out << "conn " << c.in_node << ' ' << c.out_node << ' ' << detail::format_g17(c.weight) << ' '
            << (c.enabled ? 1 : 0) << ' ' << c.innovation << '\n';
    }
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (pos < line.size()) {
        while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t' || line[pos] == '\r')) ++pos;
        std::size_t end = pos;
        while (end < line.size() && line[end] != ' ' && line[end] != '\t' && line[end] != '\r') ++end;
        if (end > pos) fields.push_back(line.substr(pos, end - pos));
        pos = end;
    }
    return fields;
}

[[noreturn]] void genome_parse_error(std::size_t line_no, const std::string& what) {
    throw Error(ErrorKind::Parse, "genome line " + std::to_string(line_no) + ": " + what);
}

template <class T>
T field_as(std::string_view text, std::size_t line_no, const char* what) {
    std::optional<T> v;
    if constexpr (std::is_floating_point_v<T>)
        v = detail::parse_double(text);
    else
        v = detail::parse_integer<T>(text);
    if (!v) genome_parse_error(line_no, std::string("bad ") + what + " '" + std::string(text) + "'");
    return *v;
}

} // namespace

Genome read_genome(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    auto next_line = [&]() -> std::vector<std::string_view> {
        while (std::getline(in, line)) {
            ++line_no;
            auto fields = split_fields(line);
            if (!fields.empty()) return fields;
        }
        genome_parse_error(line_no + 1, "unexpected end of input");
    };

    auto header = next_line();
    if (header.size() != 4 || header[0] != "genome") genome_parse_error(line_no, "expected genome header");
    const auto n_nodes = field_as<std::size_t>(header[1], line_no, "node count");
    const auto n_conns = field_as<std::size_t>(header[2], line_no, "connection count");
    const auto historical = field_as<double>(header[3], line_no, "historical fitness");

    std::vector<NodeGene> nodes;
    for (std::size_t k = 0; k < n_nodes; ++k) {
        auto f = next_line();
        if (f.size() != 3 || f[0] != "node") genome_parse_error(line_no, "expected node line");
        NodeKind kind;
        try {
            kind = parse_node_kind(f[2]);
        } catch (const Error& e) {
            genome_parse_error(line_no, e.what());
        }
        nodes.push_back({field_as<NodeId>(f[1], line_no, "node id"), kind});
    }
    std::vector<ConnectionGene> connections;
    for (std::size_t k = 0; k < n_conns; ++k) {
        auto f = next_line();
        if (f.size() != 6 || f[0] != "conn") genome_parse_error(line_no, "expected conn line");
        ConnectionGene c;
        c.in_node = field_as<NodeId>(f[1], line_no, "node id");
        c.out_node = field_as<NodeId>(f[2], line_no, "node id");
        c.weight = field_as<double>(f[3], line_no, "weight");
        if (f[4] != "0" && f[4] != "1") genome_parse_error(line_no, "enabled flag must be 0 or 1");
        c.enabled = f[4] == "1";
        c.innovation = field_as<Innovation>(f[5], line_no, "innovation");
        connections.push_back(c);
    }
    return Genome(std::move(nodes), std::move(connections), historical);
}

void save_genome(const std::string& path, const Genome& genome) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write genome file " + path);
    write_genome(out, genome);
    if (!out) throw Error(ErrorKind::Io, "failed writing genome file " + path);
}

Genome load_genome(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open genome file " + path);
    return read_genome(in);
}

} // namespace oneat
