#include "oneat/stream.hpp"

#include "oneat/error.hpp"
#include "oneat/network.hpp"
#include "text.hpp"

#include <algorithm>
#include <iterator>
#include <ostream>

namespace oneat {

std::vector<TimeWindow> partition(std::span<const LoanRecord> records, std::size_t window_size) {
    if (records.empty()) throw Error(ErrorKind::NoData, "no records to partition");
    if (window_size == 0) throw Error(ErrorKind::Config, "window_size must be positive");
    std::vector<TimeWindow> windows;
    windows.reserve(records.size() / window_size + 1);
    for (std::size_t begin = 0; begin < records.size(); begin += window_size) {
        const std::size_t len = std::min(window_size, records.size() - begin);
        windows.push_back({windows.size(), records.subspan(begin, len)});
    }
    return windows;
}

std::string_view to_string(RunMode mode) noexcept {
    return mode == RunMode::Online ? "online" : "frozen-initial";
}

RunMode parse_run_mode(std::string_view text) {
    if (text == "online") return RunMode::Online;
    if (text == "frozen-initial") return RunMode::FrozenInitial;
    throw Error(ErrorKind::Config, "unknown mode '" + std::string(text) + "' (online|frozen-initial)");
}

void StreamConfig::validate() const {
    if (window_size < 2) throw Error(ErrorKind::Config, "window_size must be at least 2");
    fitness.validate();
    evolution.validate();
}

double champion_drift(const Genome& previous, const Genome& current, const GenomeConfig& config) {
    return compatibility_distance(previous, current, config);
}

OnlineRun run_online(std::span<const LoanRecord> records, const StreamConfig& config,
                     const WindowObserver& observer) {
    config.validate();
    if (records.empty()) throw Error(ErrorKind::NoData, "no records to learn from");
    const std::size_t dim = feature_dimension(records);
    const auto windows = partition(records, config.window_size);

    Rng rng(config.seed);
    Population population = Population::initial(dim, config.evolution, rng);
    std::optional<Genome> champion;
    std::vector<WindowReport> reports;
    reports.reserve(windows.size());

    for (const auto& window : windows) {
        WindowReport report;
        report.window_index = window.index;
        report.n_records = window.records.size();

        // Test first: nothing below may touch the population before this.
        if (champion)
            report.test = window_metrics(Network::compile(*champion), window.records, config.fitness.threshold);

        if (config.mode == RunMode::FrozenInitial && champion) {
            report.best_fitness = fitness_value(*champion, window.records, config.fitness);
            report.generations_run = 0;
            report.champion_drift = 0.0;
        } else {
            WindowEvolution result = evolve_on_window(population, window.records, config.fitness,
                                                      config.evolution, rng);
            if (config.fitness.kind == FitnessKind::Pap) {
                for (auto& m : population.members) m.genome.set_historical_fitness(m.raw_fitness);
                result.best_genome.set_historical_fitness(result.best_fitness);
            }
            report.best_fitness = result.best_fitness;
            report.generations_run = result.generations_run;
            if (champion)
                report.champion_drift = champion_drift(*champion, result.best_genome, config.evolution.genome);
            champion = std::move(result.best_genome);
        }
        report.species_count = population.species.size();
        report.champion_nodes = champion->nodes().size();
        report.champion_connections = champion->connections().size();
        if (observer) observer(report);
        reports.push_back(std::move(report));
    }
    return {std::move(reports), std::move(*champion)};
}

namespace {

std::string cell(const std::optional<double>& v) { return v ? detail::format_shortest(*v) : "NA"; }

std::optional<double> metric_value(const WindowReport& r, std::string_view metric) {
    if (std::find(std::begin(kPlotMetrics), std::end(kPlotMetrics), metric) == std::end(kPlotMetrics))
        throw Error(ErrorKind::Config, "unknown plot metric '" + std::string(metric) + "'");
    if (metric == "best_fitness") return r.best_fitness;
    if (metric == "champion_drift") return r.champion_drift;
    if (!r.test) return std::nullopt;
    if (metric == "accuracy") return r.test->accuracy;
    if (metric == "recall") return r.test->recall;
    if (metric == "specificity") return r.test->specificity;
    return r.test->profit;
}

} // namespace

void write_report(std::ostream& out, std::span<const WindowReport> reports) {
    out << "#window_index\tn_records\ttest_accuracy\ttest_recall\ttest_specificity\ttest_profit"
           "\tbest_fitness\tgenerations_run\tspecies_count\tchampion_nodes\tchampion_connections"
           "\tchampion_drift\n";
    for (const auto& r : reports) {
        auto test = [&](double Metrics::*field) {
            return r.test ? std::optional<double>((*r.test).*field) : std::nullopt;
        };
        out << r.window_index << '\t' << r.n_records << '\t' << cell(test(&Metrics::accuracy)) << '\t'
            << cell(test(&Metrics::recall)) << '\t' << cell(test(&Metrics::specificity)) << '\t'
            << cell(test(&Metrics::profit)) << '\t' << detail::format_shortest(r.best_fitness) << '\t'
            << r.generations_run << '\t' << r.species_count << '\t' << r.champion_nodes << '\t'
            << r.champion_connections << '\t' << cell(r.champion_drift) << '\n';
    }
}

void write_plot_data(std::ostream& out, std::span<const WindowReport> reports, std::string_view metric) {
    out << "# window_index " << metric << '\n';
    for (const auto& r : reports) {
        if (auto v = metric_value(r, metric)) out << r.window_index << ' ' << detail::format_shortest(*v) << '\n';
    }
}

} // namespace oneat
