#pragma once

#include "oneat/genome.hpp"
#include "oneat/network.hpp"

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace oneat {

/// One labelled loan. Missing feature cells are stored as quiet NaN until
/// a Normalizer imputes them.
struct LoanRecord {
    std::string id;
    Label label = Label::Positive;  // positive = fully paid, negative = default
    double loan_amount = 0.0;       // L
    double total_interest = 0.0;    // I
    std::vector<double> features;

    friend bool operator==(const LoanRecord&, const LoanRecord&) = default;
};

bool is_missing(double feature) noexcept;

// CSV schema: id,label,loan_amount,total_interest,f1,...,fk (header first).
std::vector<LoanRecord> read_stream(std::istream& in, const std::string& source_name = "<stream>");
std::vector<LoanRecord> load_stream(const std::string& path);
void write_stream(std::ostream& out, std::span<const LoanRecord> records);
void save_stream(const std::string& path, std::span<const LoanRecord> records);

/// Causal min-max scaling: each record is scaled with the statistics of the
/// records before it, then folded into them.
class Normalizer {
public:
    explicit Normalizer(std::size_t n_features = 0);

    LoanRecord apply(const LoanRecord& record);

    std::size_t n_features() const noexcept { return stats_.size(); }

private:
    struct FeatureStats {
        double min = 0.0;
        double max = 0.0;
        double mean = 0.0;
        std::uint64_t count = 0;
    };
    std::vector<FeatureStats> stats_;
};

std::vector<LoanRecord> normalize_stream(std::span<const LoanRecord> records);

enum class DriftKind : std::uint8_t { BoundaryRotation, LabelFlip };

std::string_view to_string(DriftKind kind) noexcept;
DriftKind parse_drift_kind(std::string_view text);

struct SynthConfig {
    std::size_t n_records = 1000;
    std::size_t n_features = 4;
    double positive_fraction = 0.75;
    std::optional<std::size_t> drift_at;  // first record index of the new concept
    DriftKind drift_kind = DriftKind::LabelFlip;
    double loan_min = 1000.0;
    double loan_max = 35000.0;
    // Slope of the logistic label model; infinity gives a hard, noise-free
    // linear boundary.
    double steepness = std::numeric_limits<double>::infinity();
    std::uint64_t seed = 1;

    void validate() const;
};

/// Concept in force for a stretch of the stream: the label is positive with
/// probability sigma(steepness * (w.x - offset)), negated when inverted.
struct GroundTruth {
    std::vector<double> weights;
    double offset = 0.0;
    bool inverted = false;

    double margin(std::span<const double> features) const;
};

struct SyntheticStream {
    std::vector<LoanRecord> records;
    GroundTruth before;
    GroundTruth after;  // equals `before` when there is no drift
};

SyntheticStream synthesize_stream(const SynthConfig& config);
std::vector<LoanRecord> synthesize(const SynthConfig& config);

// Throws InvalidRecord if any record's feature count differs from the first.
std::size_t feature_dimension(std::span<const LoanRecord> records);

} // namespace oneat
