#pragma once

#include "oneat/data.hpp"
#include "oneat/genome.hpp"
#include "oneat/network.hpp"

#include <cstdint>
#include <span>
#include <string_view>

namespace oneat {

struct ConfusionCounts {
    std::uint64_t tp = 0;
    std::uint64_t fn = 0;
    std::uint64_t fp = 0;
    std::uint64_t tn = 0;

    std::uint64_t total() const noexcept { return tp + fn + fp + tn; }
    void add(Label actual, Label predicted) noexcept;

    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct Metrics {
    double accuracy = 0.0;
    double recall = 0.0;
    double specificity = 0.0;
    double profit = 0.0;
};

// Accuracy, recall and specificity of the counts (profit left at 0).
// A class absent from the counts scores 1.0 on its per-class ratio.
// Throws EmptyWindow on all-zero counts.
Metrics classification_metrics(const ConfusionCounts& counts);

// Profit matrix: a good loan earns I when accepted and costs I when
// rejected; a bad loan costs L when accepted and saves L when rejected.
double record_profit(Label actual, Label predicted, double loan_amount, double total_interest);

struct WindowScore {
    ConfusionCounts counts;
    double profit = 0.0;
};

WindowScore score_window(const Network& network, std::span<const LoanRecord> window, double threshold = 0.5);

ConfusionCounts confusion(const Genome& genome, std::span<const LoanRecord> window, double threshold = 0.5);

// Classification metrics plus summed profit. Throws NoData on an empty window.
Metrics window_metrics(const Network& network, std::span<const LoanRecord> window, double threshold = 0.5);

enum class FitnessKind : std::uint8_t { Acc, Pan, Pro, Pap };

std::string_view to_string(FitnessKind kind) noexcept;
FitnessKind parse_fitness_kind(std::string_view text);

struct FitnessSpec {
    FitnessKind kind = FitnessKind::Acc;
    double alpha = 1e-6;  // PAP profit scale
    double beta = 0.0;    // PAP weight on the previous window's fitness
    double threshold = 0.5;

    void validate() const;
};

//   ACC: accuracy
//   PAN: recall + specificity
//   PRO: window profit
//   PAP: alpha * profit + beta * historical
double fitness_from_score(const WindowScore& score, const FitnessSpec& spec, double historical);

double fitness_value(const Genome& genome, std::span<const LoanRecord> window, const FitnessSpec& spec);
double fitness_value(const Network& network, double historical, std::span<const LoanRecord> window,
                     const FitnessSpec& spec);

} // namespace oneat
