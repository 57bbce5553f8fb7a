#include "oneat/cli.hpp"

#include "oneat/error.hpp"

#include "CLI11.hpp"

#include <ostream>

namespace oneat {

namespace {

struct RunFlags {
    std::string config_path;
    std::string synth;
    std::vector<std::string> sets;
    std::map<std::string, std::string> direct;  // key -> value from dedicated flags
    bool quiet = false;
};

void add_key_option(CLI::App& cmd, RunFlags& flags, const std::string& flag, const std::string& key,
                    const std::string& help) {
    cmd.add_option_function<std::string>(
        flag, [&flags, key](const std::string& v) { flags.direct[key] = v; }, help);
}

int execute_run(const RunFlags& flags, std::ostream& out) {
    KeyValues values;
    if (!flags.config_path.empty()) values = read_key_values(flags.config_path);
    if (!flags.synth.empty()) {
        // A synthetic source on the command line replaces any file source.
        values.erase("data");
        for (auto& [k, v] : parse_inline_key_values(flags.synth, "synth.")) values[k] = v;
    }
    if (auto it = flags.direct.find("data"); it != flags.direct.end()) {
        std::erase_if(values, [](const auto& kv) { return kv.first.starts_with("synth."); });
    }
    for (const auto& [k, v] : flags.direct) values[k] = v;
    for (const auto& item : flags.sets)
        for (auto& [k, v] : parse_inline_key_values(item)) values[k] = v;

    const RunConfig config = run_config_from(values);
    const OnlineRun run = cmd_run(config, flags.quiet ? nullptr : &out);
    out << "wrote " << run.reports.size() << " window reports to " << config.out_dir << '\n';
    return 0;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Online NEAT: windowed neuroevolution of binary credit classifiers"};
    app.require_subcommand(1);

    RunFlags run_flags;
    auto* run = app.add_subcommand("run", "evolve classifiers over a record stream, window by window");
    run->add_option("--config", run_flags.config_path, "key=value configuration file (e.g. a previous manifest)");
    run->add_option("--synth", run_flags.synth, "synthetic source, e.g. n=5000,features=4,drift_at=2500");
    run->add_option("--set", run_flags.sets, "override any configuration key: key=value[,key=value...]");
    run->add_flag("--quiet", run_flags.quiet, "suppress per-window progress");
    add_key_option(*run, run_flags, "--data", "data", "CSV stream (id,label,loan_amount,total_interest,f1..fk)");
    add_key_option(*run, run_flags, "--window-size", "window_size", "records per time window");
    add_key_option(*run, run_flags, "--fitness", "fitness", "acc|pan|pro|pap");
    add_key_option(*run, run_flags, "--alpha", "alpha", "PAP profit scale (default 1e-6)");
    add_key_option(*run, run_flags, "--beta", "beta", "PAP weight on previous fitness");
    add_key_option(*run, run_flags, "--threshold", "threshold", "classification threshold (default 0.5)");
    add_key_option(*run, run_flags, "--seed", "seed", "random seed");
    add_key_option(*run, run_flags, "--out", "out", "output directory");
    add_key_option(*run, run_flags, "--mode", "mode", "online|frozen-initial");
    add_key_option(*run, run_flags, "--population-size", "population_size", "genomes per generation");
    add_key_option(*run, run_flags, "--max-generations", "max_generations_per_window", "generation cap per window");
    add_key_option(*run, run_flags, "--plateau-generations", "plateau_generations",
                   "stop a window after this many non-improving generations");
    add_key_option(*run, run_flags, "--threads", "threads", "fitness evaluation threads (0 = all cores)");
    add_key_option(*run, run_flags, "--normalize", "normalize", "causal min-max feature scaling (true|false)");

    KeyValues synth_values;
    std::string synth_out;
    auto* synth = app.add_subcommand("synth", "write a synthetic loan stream");
    auto synth_key = [&](const std::string& flag, const std::string& key, const std::string& help) {
        synth->add_option_function<std::string>(
            flag, [&synth_values, key](const std::string& v) { synth_values[key] = v; }, help);
    };
    synth_key("--n", "n", "number of records");
    synth_key("--features", "features", "feature dimension");
    synth_key("--positive-fraction", "positive_fraction", "share of fully-paid loans (default 0.75)");
    synth_key("--drift-at", "drift_at", "first record index of the drifted concept");
    synth_key("--drift-kind", "drift_kind", "label_flip|boundary_rotation");
    synth_key("--steepness", "steepness", "logistic label slope (inf = noise-free)");
    synth_key("--loan-min", "loan_min", "smallest loan amount");
    synth_key("--loan-max", "loan_max", "largest loan amount");
    synth_key("--seed", "seed", "random seed");
    synth->add_option("--out", synth_out, "output CSV path")->required();

    std::string eval_genome;
    std::string eval_data;
    double eval_threshold = 0.5;
    bool eval_raw = false;
    auto* eval = app.add_subcommand("eval", "score a saved genome on a data file");
    eval->add_option("--genome", eval_genome, "genome file")->required();
    eval->add_option("--data", eval_data, "CSV stream")->required();
    eval->add_option("--threshold", eval_threshold, "classification threshold");
    eval->add_flag("--no-normalize", eval_raw, "use raw features instead of causal min-max scaling");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (run->parsed()) return execute_run(run_flags, out);
        if (synth->parsed()) {
            const SynthConfig config = synth_config_from(synth_values);
            cmd_synth(config, synth_out);
            out << "wrote " << config.n_records << " records to " << synth_out << '\n';
            return 0;
        }
        if (eval->parsed()) {
            write_metrics(out, cmd_eval(eval_genome, eval_data, eval_threshold, !eval_raw));
            return 0;
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

} // namespace oneat
