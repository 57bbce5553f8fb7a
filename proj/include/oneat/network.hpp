#pragma once

#include "oneat/genome.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace oneat {

enum class Label : std::uint8_t { Negative = 0, Positive = 1 };

inline constexpr double kSigmoidSlope = 4.9;

// 1 / (1 + exp(-4.9 x)), kept strictly inside (0, 1).
double steep_sigmoid(double x) noexcept;

/// Executable feed-forward form of a genome. Immutable once compiled, so a
/// single instance can be activated from several threads at once.
class Network {
public:
    // Throws CorruptGenome if the enabled subgraph has a cycle.
    static Network compile(const Genome& genome);

    // Output-node activation for one feature vector; throws InvalidInput on a
    // dimension mismatch or a non-finite feature.
    double activate(std::span<const double> features) const;

    std::size_t n_inputs() const noexcept { return n_inputs_; }
    const std::vector<NodeId>& evaluation_order() const noexcept { return order_; }

private:
    struct Edge {
        std::uint32_t source;  // position in order_
        double weight;
    };

    std::size_t n_inputs_ = 0;
    std::vector<NodeId> order_;            // inputs (by id), bias, then topological
    std::vector<std::uint32_t> edge_begin_;  // per position, size order_.size() + 1
    std::vector<Edge> edges_;
    std::uint32_t output_pos_ = 0;
};

inline Network compile(const Genome& genome) { return Network::compile(genome); }

// Positive iff score >= threshold.
Label classify(double score, double threshold = 0.5) noexcept;

} // namespace oneat
