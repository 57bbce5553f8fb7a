#include "oneat/fitness.hpp"

#include "oneat/error.hpp"

#include <cmath>

namespace oneat {

void ConfusionCounts::add(Label actual, Label predicted) noexcept {
    if (actual == Label::Positive)
        ++(predicted == Label::Positive ? tp : fn);
    else
        ++(predicted == Label::Positive ? fp : tn);
}

Metrics classification_metrics(const ConfusionCounts& c) {
    const std::uint64_t total = c.total();
    if (total == 0) throw Error(ErrorKind::EmptyWindow, "no records were counted");
    Metrics m;
    m.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(total);
    m.recall = c.tp + c.fn == 0 ? 1.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    m.specificity = c.tn + c.fp == 0 ? 1.0 : static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp);
    return m;
}

double record_profit(Label actual, Label predicted, double loan_amount, double total_interest) {
    if (!(loan_amount >= 0.0) || !(total_interest >= 0.0))
        throw Error(ErrorKind::InvalidRecord, "loan amount and interest must be non-negative");
    const bool accepted = predicted == Label::Positive;
    if (actual == Label::Positive) return accepted ? total_interest : -total_interest;
    return accepted ? -loan_amount : loan_amount;
}

WindowScore score_window(const Network& network, std::span<const LoanRecord> window, double threshold) {
    WindowScore score;
    for (const auto& r : window) {
        const Label predicted = classify(network.activate(r.features), threshold);
        score.counts.add(r.label, predicted);
        score.profit += record_profit(r.label, predicted, r.loan_amount, r.total_interest);
    }
    return score;
}

ConfusionCounts confusion(const Genome& genome, std::span<const LoanRecord> window, double threshold) {
    if (window.empty()) throw Error(ErrorKind::NoData, "empty window");
    return score_window(Network::compile(genome), window, threshold).counts;
}

Metrics window_metrics(const Network& network, std::span<const LoanRecord> window, double threshold) {
    if (window.empty()) throw Error(ErrorKind::NoData, "empty window");
    const WindowScore score = score_window(network, window, threshold);
    Metrics m = classification_metrics(score.counts);
    m.profit = score.profit;
    return m;
}

std::string_view to_string(FitnessKind kind) noexcept {
    switch (kind) {
    case FitnessKind::Acc: return "acc";
    case FitnessKind::Pan: return "pan";
    case FitnessKind::Pro: return "pro";
    case FitnessKind::Pap: return "pap";
    }
    return "acc";
}

FitnessKind parse_fitness_kind(std::string_view text) {
    if (text == "acc") return FitnessKind::Acc;
    if (text == "pan") return FitnessKind::Pan;
    if (text == "pro") return FitnessKind::Pro;
    if (text == "pap") return FitnessKind::Pap;
    throw Error(ErrorKind::Config, "unknown fitness '" + std::string(text) + "' (acc|pan|pro|pap)");
}

void FitnessSpec::validate() const {
    if (kind == FitnessKind::Pap && !(alpha > 0.0)) throw Error(ErrorKind::Config, "PAP needs alpha > 0");
    if (!std::isfinite(beta)) throw Error(ErrorKind::Config, "beta must be finite");
    if (!(threshold >= 0.0 && threshold <= 1.0)) throw Error(ErrorKind::Config, "threshold must lie in [0,1]");
}

double fitness_from_score(const WindowScore& score, const FitnessSpec& spec, double historical) {
    switch (spec.kind) {
    case FitnessKind::Acc: return classification_metrics(score.counts).accuracy;
    case FitnessKind::Pan: {
        const Metrics m = classification_metrics(score.counts);
        return m.recall + m.specificity;
    }
    case FitnessKind::Pro: return score.profit;
    case FitnessKind::Pap: return spec.alpha * score.profit + spec.beta * historical;
    }
    return 0.0;
}

double fitness_value(const Network& network, double historical, std::span<const LoanRecord> window,
                     const FitnessSpec& spec) {
    if (window.empty()) throw Error(ErrorKind::NoData, "empty window");
    return fitness_from_score(score_window(network, window, spec.threshold), spec, historical);
}

double fitness_value(const Genome& genome, std::span<const LoanRecord> window, const FitnessSpec& spec) {
    return fitness_value(Network::compile(genome), genome.historical_fitness(), window, spec);
}

} // namespace oneat
