#pragma once

#include "oneat/data.hpp"
#include "oneat/fitness.hpp"
#include "oneat/stream.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace oneat {

// Flat key=value configuration. Blank lines and lines starting with '#' are
// ignored; later keys override earlier ones.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(std::istream& in, const std::string& source_name = "<config>");
KeyValues read_key_values(const std::string& path);
void write_key_values(std::ostream& out, const KeyValues& values);
// "a=1,b=2" -> {prefix+"a": "1", prefix+"b": "2"}
KeyValues parse_inline_key_values(std::string_view text, std::string_view prefix = "");

struct RunConfig {
    std::optional<std::string> data_path;
    std::optional<SynthConfig> synth;
    StreamConfig stream;
    bool normalize = true;
    std::string out_dir = "oneat-out";

    void validate() const;
};

// Unknown keys and malformed values raise Config errors. Synthetic-source
// keys carry a "synth." prefix; synth.seed defaults to the run seed.
RunConfig run_config_from(const KeyValues& values);
KeyValues to_key_values(const RunConfig& config);

SynthConfig synth_config_from(const KeyValues& values);
KeyValues to_key_values(const SynthConfig& config);

// Runs the online loop and writes, under out_dir:
//   report.tsv, plot_<metric>.dat, champion.genome, champion_eval.txt,
//   manifest.txt (the fully resolved configuration).
OnlineRun cmd_run(const RunConfig& config, std::ostream* log = nullptr);

// Writes the stream to out_path and its settings to out_path + ".manifest".
void cmd_synth(const SynthConfig& config, const std::string& out_path);

Metrics cmd_eval(const std::string& genome_path, const std::string& data_path, double threshold = 0.5,
                 bool normalize = true);
void write_metrics(std::ostream& out, const Metrics& metrics);

// Full command-line entry point (subcommands run, synth, eval). Returns the
// process exit status; failures print a single "error: ..." line to err.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace oneat
