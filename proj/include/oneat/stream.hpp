#pragma once

#include "oneat/data.hpp"
#include "oneat/evolution.hpp"
#include "oneat/fitness.hpp"
#include "oneat/genome.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace oneat {

struct TimeWindow {
    std::size_t index = 0;
    std::span<const LoanRecord> records;
};

// floor(n / window_size) full windows plus one shorter window for any
// remainder, all in stream order.
std::vector<TimeWindow> partition(std::span<const LoanRecord> records, std::size_t window_size);

enum class RunMode : std::uint8_t {
    Online,
    FrozenInitial,  // train on window 0 only, then just test that champion
};

std::string_view to_string(RunMode mode) noexcept;
RunMode parse_run_mode(std::string_view text);

struct StreamConfig {
    std::size_t window_size = 500;
    FitnessSpec fitness;
    EvolutionConfig evolution;
    std::uint64_t seed = 1;
    RunMode mode = RunMode::Online;

    void validate() const;
};

struct WindowReport {
    std::size_t window_index = 0;
    std::size_t n_records = 0;
    // Prequential: the previous window's champion on this window, measured
    // before any training here. Empty for window 0.
    std::optional<Metrics> test;
    double best_fitness = 0.0;
    std::size_t generations_run = 0;
    std::size_t species_count = 0;
    std::size_t champion_nodes = 0;
    std::size_t champion_connections = 0;
    std::optional<double> champion_drift;  // empty for window 0
};

struct OnlineRun {
    std::vector<WindowReport> reports;
    Genome champion;
};

// Called after each window, e.g. for progress logging.
using WindowObserver = std::function<void(const WindowReport&)>;

OnlineRun run_online(std::span<const LoanRecord> records, const StreamConfig& config,
                     const WindowObserver& observer = {});

// Distance between consecutive champions.
double champion_drift(const Genome& previous, const Genome& current, const GenomeConfig& config);

// Tab-separated, one row per window, header line prefixed with '#'.
// Empty optionals are written as NA.
void write_report(std::ostream& out, std::span<const WindowReport> reports);

inline constexpr const char* kPlotMetrics[] = {"accuracy", "recall",      "specificity",
                                               "profit",   "best_fitness", "champion_drift"};

// "<window_index> <value>" lines for one metric; windows without a value are
// skipped.
void write_plot_data(std::ostream& out, std::span<const WindowReport> reports, std::string_view metric);

} // namespace oneat
