#pragma once

// Test-side helpers and independent oracles. Nothing here calls into the
// library's metric, profit or activation code.

#include "oneat/data.hpp"
#include "oneat/genome.hpp"
#include "oneat/network.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace oneat::testing {

struct OracleMetrics {
    double accuracy;
    double recall;
    double specificity;
};

// Counts by walking an explicit list of (actual, predicted) outcomes.
inline OracleMetrics oracle_metrics(const std::vector<std::pair<bool, bool>>& outcomes) {
    long double hit = 0, pos = 0, pos_hit = 0, neg = 0, neg_hit = 0;
    for (auto [actual, predicted] : outcomes) {
        if (actual == predicted) hit += 1;
        if (actual) {
            pos += 1;
            if (predicted) pos_hit += 1;
        } else {
            neg += 1;
            if (!predicted) neg_hit += 1;
        }
    }
    const long double n = static_cast<long double>(outcomes.size());
    return {static_cast<double>(hit / n), pos == 0 ? 1.0 : static_cast<double>(pos_hit / pos),
            neg == 0 ? 1.0 : static_cast<double>(neg_hit / neg)};
}

// Profit matrix as a lookup table indexed [actual][predicted].
inline double oracle_profit(bool actual, bool predicted, double loan, double interest) {
    const double table[2][2] = {{+loan, -loan}, {-interest, +interest}};
    return table[actual ? 1 : 0][predicted ? 1 : 0];
}

inline double oracle_sigmoid(double x) { return 1.0 / (1.0 + std::exp(-4.9 * x)); }

// Score of a genome with no hidden nodes, straight from its genes.
inline double oracle_single_layer(const Genome& g, const std::vector<double>& x) {
    double sum = 0.0;
    for (const auto& c : g.connections()) {
        if (!c.enabled) continue;
        const double source = c.in_node == g.bias_id() ? 1.0 : x[static_cast<std::size_t>(c.in_node)];
        sum += c.weight * source;
    }
    return oracle_sigmoid(sum);
}

inline std::vector<NodeGene> layer_nodes(std::size_t n_inputs, std::vector<NodeId> hidden = {}) {
    std::vector<NodeGene> nodes;
    for (std::size_t i = 0; i < n_inputs; ++i) nodes.push_back({static_cast<NodeId>(i), NodeKind::Input});
    nodes.push_back({static_cast<NodeId>(n_inputs), NodeKind::Bias});
    nodes.push_back({static_cast<NodeId>(n_inputs + 1), NodeKind::Output});
    for (NodeId h : hidden) nodes.push_back({h, NodeKind::Hidden});
    return nodes;
}

// Minimal-layout genome with the given weights on inputs then bias.
inline Genome single_layer(const std::vector<double>& input_weights, double bias_weight) {
    const auto n = input_weights.size();
    const auto out = static_cast<NodeId>(n + 1);
    std::vector<ConnectionGene> conns;
    for (std::size_t i = 0; i < n; ++i)
        conns.push_back({static_cast<NodeId>(i), out, input_weights[i], true, static_cast<Innovation>(i + 1)});
    conns.push_back({static_cast<NodeId>(n), out, bias_weight, true, static_cast<Innovation>(n + 1)});
    return Genome(layer_nodes(n), conns);
}

// Two inputs, bias 2, output 3, hidden 4. The hidden unit is an AND gate;
// the output fires for OR-but-not-AND.
inline Genome xor_genome() {
    std::vector<ConnectionGene> conns = {
        {0, 3, 10.0, true, 1}, {1, 3, 10.0, true, 2}, {2, 3, -5.0, true, 3},
        {0, 4, 10.0, true, 4}, {1, 4, 10.0, true, 5}, {2, 4, -15.0, true, 6},
        {4, 3, -20.0, true, 7},
    };
    return Genome(layer_nodes(2, {4}), conns);
}

inline std::vector<LoanRecord> xor_window() {
    std::vector<LoanRecord> w;
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            LoanRecord r;
            r.id = std::to_string(a) + std::to_string(b);
            r.label = (a ^ b) ? Label::Positive : Label::Negative;
            r.loan_amount = 1000.0;
            r.total_interest = 100.0;
            r.features = {static_cast<double>(a), static_cast<double>(b)};
            w.push_back(r);
        }
    }
    return w;
}

inline std::vector<LoanRecord> random_records(std::mt19937_64& rng, std::size_t n, std::size_t dim,
                                              double positive_share = 0.5) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> loan(1000.0, 35000.0);
    std::vector<LoanRecord> out;
    for (std::size_t i = 0; i < n; ++i) {
        LoanRecord r;
        r.id = "r" + std::to_string(i);
        r.label = unit(rng) < positive_share ? Label::Positive : Label::Negative;
        r.loan_amount = loan(rng);
        r.total_interest = r.loan_amount * (0.05 + 0.25 * unit(rng));
        for (std::size_t k = 0; k < dim; ++k) r.features.push_back(unit(rng));
        out.push_back(std::move(r));
    }
    return out;
}

inline std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("oneat-test-" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace oneat::testing
