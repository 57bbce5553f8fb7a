#include "oneat/cli.hpp"

#include "oneat/error.hpp"
#include "oneat/network.hpp"
#include "text.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>

namespace oneat {

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    return out;
}

void close_output(std::ofstream& out, const std::filesystem::path& path) {
    out.close();
    if (!out) throw Error(ErrorKind::Io, "failed writing " + path.string());
}

std::vector<LoanRecord> prepare_records(std::vector<LoanRecord> records, bool normalize) {
    if (records.empty()) throw Error(ErrorKind::NoData, "data source contains no records");
    feature_dimension(records);
    return normalize ? normalize_stream(records) : records;
}

} // namespace

void write_metrics(std::ostream& out, const Metrics& m) {
    out << "accuracy=" << detail::format_shortest(m.accuracy) << '\n'
        << "recall=" << detail::format_shortest(m.recall) << '\n'
        << "specificity=" << detail::format_shortest(m.specificity) << '\n'
        << "profit=" << detail::format_shortest(m.profit) << '\n';
}

OnlineRun cmd_run(const RunConfig& config, std::ostream* log) {
    config.validate();
    const auto records =
        prepare_records(config.data_path ? load_stream(*config.data_path) : synthesize(*config.synth), config.normalize);

    namespace fs = std::filesystem;
    const fs::path dir(config.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create output directory " + dir.string() + ": " + ec.message());

    // Manifest goes first so a crashed run still documents what it was.
    {
        const fs::path path = dir / "manifest.txt";
        auto out = open_output(path);
        out << "# oneat run manifest; reproduce with: oneat run --config " << path.string() << '\n';
        write_key_values(out, to_key_values(config));
        close_output(out, path);
    }

    WindowObserver observer;
    if (log) {
        observer = [log](const WindowReport& r) {
            *log << "window " << r.window_index << ": records=" << r.n_records;
            if (r.test) *log << " test_accuracy=" << detail::format_shortest(r.test->accuracy);
            *log << " best_fitness=" << detail::format_shortest(r.best_fitness)
                 << " generations=" << r.generations_run << " species=" << r.species_count << '\n';
        };
    }
    OnlineRun run = run_online(records, config.stream, observer);

    {
        const fs::path path = dir / "report.tsv";
        auto out = open_output(path);
        write_report(out, run.reports);
        close_output(out, path);
    }
    for (const char* metric : kPlotMetrics) {
        const fs::path path = dir / (std::string("plot_") + metric + ".dat");
        auto out = open_output(path);
        write_plot_data(out, run.reports, metric);
        close_output(out, path);
    }
    {
        const fs::path path = dir / "champion.genome";
        auto out = open_output(path);
        write_genome(out, run.champion);
        close_output(out, path);
    }
    {
        const fs::path path = dir / "champion_eval.txt";
        auto out = open_output(path);
        write_metrics(out, window_metrics(Network::compile(run.champion), records, config.stream.fitness.threshold));
        close_output(out, path);
    }
    return run;
}

void cmd_synth(const SynthConfig& config, const std::string& out_path) {
    config.validate();
    const auto records = synthesize(config);
    {
        auto out = open_output(out_path);
        write_stream(out, records);
        close_output(out, out_path);
    }
    const std::string manifest = out_path + ".manifest";
    auto out = open_output(manifest);
    out << "# oneat synth manifest\n";
    write_key_values(out, to_key_values(config));
    close_output(out, manifest);
}

Metrics cmd_eval(const std::string& genome_path, const std::string& data_path, double threshold, bool normalize) {
    if (!(threshold >= 0.0 && threshold <= 1.0)) throw Error(ErrorKind::Config, "threshold must lie in [0,1]");
    const Genome genome = load_genome(genome_path);
    const auto records = prepare_records(load_stream(data_path), normalize);
    const std::size_t dim = records.front().features.size();
    if (dim != genome.n_inputs()) {
        throw Error(ErrorKind::InvalidInput, "genome " + genome_path + " expects " + std::to_string(genome.n_inputs()) +
                                                 " features but " + data_path + " has " + std::to_string(dim));
    }
    return window_metrics(Network::compile(genome), records, threshold);
}

} // namespace oneat
