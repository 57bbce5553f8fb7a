#include "oneat/data.hpp"

#include "oneat/error.hpp"
#include "text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>

namespace oneat {

bool is_missing(double feature) noexcept { return std::isnan(feature); }

std::size_t feature_dimension(std::span<const LoanRecord> records) {
    if (records.empty()) return 0;
    const std::size_t dim = records.front().features.size();
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (records[i].features.size() != dim) {
            throw Error(ErrorKind::InvalidRecord, "record " + std::to_string(i) + " has " +
                                                      std::to_string(records[i].features.size()) +
                                                      " features, expected " + std::to_string(dim));
        }
    }
    return dim;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

constexpr std::string_view kFixedColumns[] = {"id", "label", "loan_amount", "total_interest"};

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            cells.push_back(line.substr(start));
            return cells;
        }
        cells.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

[[noreturn]] void csv_error(ErrorKind kind, const std::string& source, std::size_t line_no,
                            const std::string& what) {
    throw Error(kind, source + ":" + std::to_string(line_no) + ": " + what);
}

} // namespace

std::vector<LoanRecord> read_stream(std::istream& in, const std::string& source_name) {
    std::string line;
    if (!std::getline(in, line)) csv_error(ErrorKind::Parse, source_name, 1, "missing header");
    std::string_view header_view = line;
    if (header_view.starts_with("\xEF\xBB\xBF")) header_view.remove_prefix(3);
    const auto header = split_csv(detail::trim(header_view));
    if (header.size() < 5) {
        csv_error(ErrorKind::Parse, source_name, 1,
                  "header must be id,label,loan_amount,total_interest followed by at least one feature");
    }
    for (std::size_t c = 0; c < 4; ++c) {
        if (detail::trim(header[c]) != kFixedColumns[c]) {
            csv_error(ErrorKind::Parse, source_name, 1,
                      "header column " + std::to_string(c + 1) + " must be '" + std::string(kFixedColumns[c]) + "'");
        }
    }
    const std::size_t n_features = header.size() - 4;

    std::vector<LoanRecord> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view row = detail::trim(line);
        if (row.empty()) continue;
        const auto cells = split_csv(row);
        if (cells.size() != header.size()) {
            csv_error(ErrorKind::Parse, source_name, line_no,
                      "expected " + std::to_string(header.size()) + " cells, found " + std::to_string(cells.size()));
        }
        LoanRecord r;
        r.id = std::string(detail::trim(cells[0]));
        const auto label = detail::trim(cells[1]);
        if (label == "1")
            r.label = Label::Positive;
        else if (label == "0")
            r.label = Label::Negative;
        else
            csv_error(ErrorKind::Parse, source_name, line_no, "label '" + std::string(label) + "' is not 0 or 1");

        auto amount = [&](std::string_view cell, const char* name) {
            auto v = detail::parse_double(cell);
            if (!v || !std::isfinite(*v))
                csv_error(ErrorKind::Parse, source_name, line_no,
                          std::string(name) + " '" + std::string(detail::trim(cell)) + "' is not a number");
            if (*v < 0.0)
                csv_error(ErrorKind::InvalidRecord, source_name, line_no, std::string(name) + " is negative");
            return *v;
        };
        r.loan_amount = amount(cells[2], "loan_amount");
        r.total_interest = amount(cells[3], "total_interest");

        r.features.reserve(n_features);
        for (std::size_t f = 0; f < n_features; ++f) {
            std::string_view cell = detail::trim(cells[4 + f]);
            if (cell.empty()) {
                r.features.push_back(std::numeric_limits<double>::quiet_NaN());
                continue;
            }
            auto v = detail::parse_double(cell);
            if (!v || !std::isfinite(*v))
                csv_error(ErrorKind::Parse, source_name, line_no,
                          "feature " + std::string(detail::trim(header[4 + f])) + " '" + std::string(cell) +
                              "' is not a number");
            r.features.push_back(*v);
        }
        records.push_back(std::move(r));
    }
    return records;
}

std::vector<LoanRecord> load_stream(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open data file " + path);
    return read_stream(in, path);
}

void write_stream(std::ostream& out, std::span<const LoanRecord> records) {
    const std::size_t dim = feature_dimension(records);
    out << "id,label,loan_amount,total_interest";
    for (std::size_t f = 0; f < dim; ++f) out << ",f" << (f + 1);
    out << '\n';
    for (const auto& r : records) {
        out << r.id << ',' << (r.label == Label::Positive ? '1' : '0') << ','
            << detail::format_shortest(r.loan_amount) << ',' << detail::format_shortest(r.total_interest);
        for (double x : r.features) {
            out << ',';
            if (!is_missing(x)) out << detail::format_shortest(x);
        }
        out << '\n';
    }
}

void save_stream(const std::string& path, std::span<const LoanRecord> records) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write data file " + path);
    write_stream(out, records);
    if (!out) throw Error(ErrorKind::Io, "failed writing data file " + path);
}

// ---------------------------------------------------------------------------
// Normalizer

Normalizer::Normalizer(std::size_t n_features) : stats_(n_features) {}

LoanRecord Normalizer::apply(const LoanRecord& record) {
    if (stats_.empty()) stats_.resize(record.features.size());
    if (record.features.size() != stats_.size()) {
        throw Error(ErrorKind::InvalidRecord, "record " + record.id + " has " +
                                                  std::to_string(record.features.size()) + " features, expected " +
                                                  std::to_string(stats_.size()));
    }
    LoanRecord out = record;
    for (std::size_t f = 0; f < stats_.size(); ++f) {
        FeatureStats& s = stats_[f];
        const double raw = record.features[f];
        const double value = is_missing(raw) ? s.mean : raw;
        if (s.count == 0 || s.max == s.min)
            out.features[f] = 0.5;
        else
            out.features[f] = std::clamp((value - s.min) / (s.max - s.min), 0.0, 1.0);

        if (is_missing(raw)) continue;
        if (s.count == 0) {
            s.min = s.max = raw;
        } else {
            s.min = std::min(s.min, raw);
            s.max = std::max(s.max, raw);
        }
        ++s.count;
        s.mean += (raw - s.mean) / static_cast<double>(s.count);
    }
    return out;
}

std::vector<LoanRecord> normalize_stream(std::span<const LoanRecord> records) {
    Normalizer normalizer(feature_dimension(records));
    std::vector<LoanRecord> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(normalizer.apply(r));
    return out;
}

// ---------------------------------------------------------------------------
// Synthetic streams

std::string_view to_string(DriftKind kind) noexcept {
    return kind == DriftKind::BoundaryRotation ? "boundary_rotation" : "label_flip";
}

DriftKind parse_drift_kind(std::string_view text) {
    if (text == "boundary_rotation") return DriftKind::BoundaryRotation;
    if (text == "label_flip") return DriftKind::LabelFlip;
    throw Error(ErrorKind::Config, "unknown drift kind '" + std::string(text) + "'");
}

void SynthConfig::validate() const {
    if (n_records == 0) throw Error(ErrorKind::Config, "synth n must be positive");
    if (n_features == 0) throw Error(ErrorKind::Config, "synth features must be positive");
    if (!(positive_fraction > 0.0 && positive_fraction < 1.0))
        throw Error(ErrorKind::Config, "positive_fraction must lie strictly between 0 and 1");
    if (!(loan_min >= 0.0 && loan_max >= loan_min))
        throw Error(ErrorKind::Config, "loan range must satisfy 0 <= loan_min <= loan_max");
    if (!(steepness > 0.0)) throw Error(ErrorKind::Config, "steepness must be positive");
    if (drift_at && drift_kind == DriftKind::BoundaryRotation && n_features < 2)
        throw Error(ErrorKind::Config, "boundary_rotation needs at least two features");
}

double GroundTruth::margin(std::span<const double> features) const {
    return std::inner_product(weights.begin(), weights.end(), features.begin(), 0.0) - offset;
}

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::vector<double> unit_gaussian(Rng& rng, std::size_t k) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> v(k);
    double norm = 0.0;
    do {
        for (double& x : v) x = normal(rng);
        norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
    } while (norm < 1e-9);
    for (double& x : v) x /= norm;
    return v;
}

// Offset that makes the expected positive share over `margins` equal the
// target: an order statistic for a hard boundary, bisection otherwise.
double calibrate_offset(std::vector<double> margins, double positive_fraction, double steepness) {
    if (margins.empty()) return 0.0;
    std::sort(margins.begin(), margins.end());
    const std::size_t n = margins.size();
    if (std::isinf(steepness)) {
        const auto positives = static_cast<std::size_t>(std::llround(positive_fraction * static_cast<double>(n)));
        if (positives >= n) return margins.front() - 1.0;
        if (positives == 0) return margins.back() + 1.0;
        return 0.5 * (margins[n - positives - 1] + margins[n - positives]);
    }
    double lo = margins.front() - 60.0 / steepness;
    double hi = margins.back() + 60.0 / steepness;
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        double expected = 0.0;
        for (double m : margins) expected += logistic(steepness * (m - mid));
        if (expected / static_cast<double>(n) > positive_fraction)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

SyntheticStream synthesize_stream(const SynthConfig& config) {
    config.validate();
    Rng rng(config.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> loan(config.loan_min, config.loan_max);
    std::uniform_real_distribution<double> rate(0.05, 0.30);

    SyntheticStream out;
    out.records.resize(config.n_records);
    for (std::size_t i = 0; i < config.n_records; ++i) {
        LoanRecord& r = out.records[i];
        r.id = std::to_string(i);
        r.features.resize(config.n_features);
        for (double& x : r.features) x = unit(rng);
        r.loan_amount = loan(rng);
        r.total_interest = r.loan_amount * rate(rng);
    }

    const std::size_t drift_index = std::min(config.drift_at.value_or(config.n_records), config.n_records);
    auto margins_between = [&](const std::vector<double>& w, std::size_t begin, std::size_t end) {
        std::vector<double> m;
        m.reserve(end - begin);
        for (std::size_t i = begin; i < end; ++i)
            m.push_back(std::inner_product(w.begin(), w.end(), out.records[i].features.begin(), 0.0));
        return m;
    };

    out.before.weights = unit_gaussian(rng, config.n_features);
    out.before.offset = calibrate_offset(margins_between(out.before.weights, 0, drift_index),
                                         config.positive_fraction, config.steepness);
    out.after = out.before;
    if (config.drift_at && drift_index < config.n_records) {
        if (config.drift_kind == DriftKind::LabelFlip) {
            out.after.inverted = true;
        } else {
            // Orthogonal direction via one Gram-Schmidt step.
            std::vector<double> u;
            double norm = 0.0;
            do {
                u = unit_gaussian(rng, config.n_features);
                const double proj = std::inner_product(u.begin(), u.end(), out.before.weights.begin(), 0.0);
                for (std::size_t f = 0; f < u.size(); ++f) u[f] -= proj * out.before.weights[f];
                norm = std::sqrt(std::inner_product(u.begin(), u.end(), u.begin(), 0.0));
            } while (norm < 1e-6);
            for (double& x : u) x /= norm;
            out.after.weights = std::move(u);
            out.after.offset = calibrate_offset(margins_between(out.after.weights, drift_index, config.n_records),
                                                config.positive_fraction, config.steepness);
        }
    }

    for (std::size_t i = 0; i < config.n_records; ++i) {
        const GroundTruth& truth = i < drift_index ? out.before : out.after;
        const double margin = truth.margin(out.records[i].features);
        bool positive;
        if (std::isinf(config.steepness))
            positive = margin > 0.0;
        else
            positive = unit(rng) < logistic(config.steepness * margin);
        if (truth.inverted) positive = !positive;
        out.records[i].label = positive ? Label::Positive : Label::Negative;
    }
    return out;
}

std::vector<LoanRecord> synthesize(const SynthConfig& config) { return synthesize_stream(config).records; }

} // namespace oneat
