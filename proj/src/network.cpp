#include "oneat/network.hpp"

#include "oneat/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <unordered_map>

namespace oneat {

double steep_sigmoid(double x) noexcept {
    static const double lowest = std::numeric_limits<double>::min();
    static const double highest = std::nextafter(1.0, 0.0);
    const double y = 1.0 / (1.0 + std::exp(-kSigmoidSlope * x));
    return std::clamp(y, lowest, highest);
}

Label classify(double score, double threshold) noexcept {
    return score >= threshold ? Label::Positive : Label::Negative;
}

Network Network::compile(const Genome& genome) {
    Network net;
    net.n_inputs_ = genome.n_inputs();

    std::unordered_map<NodeId, std::vector<std::pair<NodeId, double>>> incoming;
    std::unordered_map<NodeId, std::vector<NodeId>> outgoing;
    std::unordered_map<NodeId, std::size_t> pending;
    for (const auto& n : genome.nodes()) pending[n.id] = 0;
    for (const auto& c : genome.connections()) {
        if (!c.enabled) continue;
        incoming[c.out_node].emplace_back(c.in_node, c.weight);
        outgoing[c.in_node].push_back(c.out_node);
        ++pending[c.out_node];
    }

    // Inputs and bias occupy the leading positions in id order; the rest
    // follow in topological order, lowest id first among ready nodes.
    for (const auto& n : genome.nodes())
        if (n.kind == NodeKind::Input) net.order_.push_back(n.id);
    net.order_.push_back(genome.bias_id());

    std::priority_queue<NodeId, std::vector<NodeId>, std::greater<>> ready;
    auto release = [&](NodeId id) {
        auto it = outgoing.find(id);
        if (it == outgoing.end()) return;
        for (NodeId next : it->second)
            if (--pending[next] == 0) ready.push(next);
    };
    for (const auto& n : genome.nodes()) {
        if ((n.kind == NodeKind::Hidden || n.kind == NodeKind::Output) && pending[n.id] == 0) ready.push(n.id);
    }
    for (NodeId id : net.order_) release(id);
    while (!ready.empty()) {
        NodeId id = ready.top();
        ready.pop();
        net.order_.push_back(id);
        release(id);
    }
    if (net.order_.size() != genome.nodes().size())
        throw Error(ErrorKind::CorruptGenome, "enabled connections form a cycle");

    std::unordered_map<NodeId, std::uint32_t> position;
    for (std::uint32_t p = 0; p < net.order_.size(); ++p) position[net.order_[p]] = p;
    net.output_pos_ = position.at(genome.output_id());

    net.edge_begin_.reserve(net.order_.size() + 1);
    for (NodeId id : net.order_) {
        net.edge_begin_.push_back(static_cast<std::uint32_t>(net.edges_.size()));
        auto it = incoming.find(id);
        if (it == incoming.end()) continue;
        for (auto [source, weight] : it->second) net.edges_.push_back({position.at(source), weight});
    }
    net.edge_begin_.push_back(static_cast<std::uint32_t>(net.edges_.size()));
    return net;
}

double Network::activate(std::span<const double> features) const {
    if (features.size() != n_inputs_) {
        throw Error(ErrorKind::InvalidInput, "expected " + std::to_string(n_inputs_) + " features, got " +
                                                 std::to_string(features.size()));
    }
    thread_local std::vector<double> values;
    values.resize(order_.size());
    for (std::size_t i = 0; i < n_inputs_; ++i) {
        if (!std::isfinite(features[i]))
            throw Error(ErrorKind::InvalidInput, "feature " + std::to_string(i) + " is not finite");
        values[i] = features[i];
    }
    values[n_inputs_] = 1.0;
    for (std::size_t p = n_inputs_ + 1; p < order_.size(); ++p) {
        double sum = 0.0;
        for (std::uint32_t e = edge_begin_[p]; e < edge_begin_[p + 1]; ++e)
            sum += edges_[e].weight * values[edges_[e].source];
        values[p] = steep_sigmoid(sum);
    }
    return values[output_pos_];
}

} // namespace oneat
