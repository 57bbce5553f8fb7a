#include "oneat/cli.hpp"

#include "oneat/error.hpp"
#include "text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <type_traits>
#include <vector>

namespace oneat {

KeyValues parse_key_values(std::istream& in, const std::string& source_name) {
    KeyValues values;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view text = detail::trim(line);
        if (text.empty() || text.front() == '#') continue;
        const auto eq = text.find('=');
        if (eq == std::string_view::npos || detail::trim(text.substr(0, eq)).empty()) {
            throw Error(ErrorKind::Config,
                        source_name + ":" + std::to_string(line_no) + ": expected key=value");
        }
        values[std::string(detail::trim(text.substr(0, eq)))] = std::string(detail::trim(text.substr(eq + 1)));
    }
    return values;
}

KeyValues read_key_values(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open config file " + path);
    return parse_key_values(in, path);
}

void write_key_values(std::ostream& out, const KeyValues& values) {
    for (const auto& [key, value] : values) out << key << '=' << value << '\n';
}

KeyValues parse_inline_key_values(std::string_view text, std::string_view prefix) {
    KeyValues values;
    while (!text.empty()) {
        const auto comma = text.find(',');
        std::string_view item = detail::trim(text.substr(0, comma));
        text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string_view::npos)
            throw Error(ErrorKind::Config, "expected key=value in '" + std::string(item) + "'");
        values[std::string(prefix) + std::string(detail::trim(item.substr(0, eq)))] =
            std::string(detail::trim(item.substr(eq + 1)));
    }
    return values;
}

namespace {

struct Field {
    std::string key;
    std::function<std::string()> get;
    std::function<void(std::string_view)> set;
};

[[noreturn]] void bad_value(const std::string& key, std::string_view value) {
    throw Error(ErrorKind::Config, "invalid value '" + std::string(value) + "' for " + key);
}

template <class T>
Field bind(std::string key, T& target) {
    Field f;
    f.key = key;
    if constexpr (std::is_same_v<T, bool>) {
        f.get = [&target] { return std::string(target ? "true" : "false"); };
        f.set = [&target, key](std::string_view v) {
            if (v == "true" || v == "1")
                target = true;
            else if (v == "false" || v == "0")
                target = false;
            else
                bad_value(key, v);
        };
    } else if constexpr (std::is_floating_point_v<T>) {
        f.get = [&target] { return detail::format_shortest(target); };
        f.set = [&target, key](std::string_view v) {
            auto parsed = detail::parse_double(v);
            if (!parsed || std::isnan(*parsed)) bad_value(key, v);
            target = *parsed;
        };
    } else {
        f.get = [&target] { return std::to_string(target); };
        f.set = [&target, key](std::string_view v) {
            auto parsed = detail::parse_integer<T>(v);
            if (!parsed) bad_value(key, v);
            target = *parsed;
        };
    }
    return f;
}

template <class Enum, class Parse>
Field bind_enum(std::string key, Enum& target, Parse parse) {
    return {key, [&target] { return std::string(to_string(target)); },
            [&target, parse](std::string_view v) { target = parse(v); }};
}

std::vector<Field> synth_fields(SynthConfig& c, const std::string& prefix) {
    return {
        bind(prefix + "n", c.n_records),
        bind(prefix + "features", c.n_features),
        bind(prefix + "positive_fraction", c.positive_fraction),
        bind_enum(prefix + "drift_kind", c.drift_kind, parse_drift_kind),
        bind(prefix + "loan_min", c.loan_min),
        bind(prefix + "loan_max", c.loan_max),
        bind(prefix + "steepness", c.steepness),
        bind(prefix + "seed", c.seed),
    };
}

std::vector<Field> run_fields(RunConfig& c) {
    StreamConfig& s = c.stream;
    EvolutionConfig& e = s.evolution;
    GenomeConfig& g = e.genome;
    return {
        bind("window_size", s.window_size),
        bind_enum("fitness", s.fitness.kind, parse_fitness_kind),
        bind("alpha", s.fitness.alpha),
        bind("beta", s.fitness.beta),
        bind("threshold", s.fitness.threshold),
        bind("seed", s.seed),
        bind_enum("mode", s.mode, parse_run_mode),
        bind("normalize", c.normalize),
        bind("population_size", e.population_size),
        bind("distance_threshold", e.distance_threshold),
        bind("survival_fraction", e.survival_fraction),
        bind("elitism", e.elitism),
        bind("elitism_min_species_size", e.elitism_min_species_size),
        bind("stagnation_limit", e.stagnation_limit),
        bind("interspecies_mating_prob", e.interspecies_mating_prob),
        bind("crossover_prob", e.crossover_prob),
        bind("max_generations_per_window", e.max_generations_per_window),
        bind("plateau_generations", e.plateau_generations),
        bind("plateau_epsilon", e.plateau_epsilon),
        bind("threads", e.threads),
        bind("p_weight_mutate", g.p_weight_mutate),
        bind("p_perturb", g.p_perturb),
        bind("perturb_std", g.perturb_std),
        bind("p_add_connection", g.p_add_connection),
        bind("p_add_node", g.p_add_node),
        bind("p_keep_disabled", g.p_keep_disabled),
        bind("weight_init_range", g.weight_init_range),
        bind("weight_limit", g.weight_limit),
        bind("c_excess", g.c_excess),
        bind("c_disjoint", g.c_disjoint),
        bind("c_weight", g.c_weight),
        bind("small_genome_size", g.small_genome_size),
    };
}

void apply_synth(SynthConfig& synth, const KeyValues& values, const std::string& prefix,
                 std::vector<std::string>& consumed) {
    for (auto& f : synth_fields(synth, prefix)) {
        if (auto it = values.find(f.key); it != values.end()) {
            f.set(it->second);
            consumed.push_back(f.key);
        }
    }
    if (auto it = values.find(prefix + "drift_at"); it != values.end()) {
        auto v = detail::parse_integer<std::size_t>(it->second);
        if (!v) bad_value(prefix + "drift_at", it->second);
        synth.drift_at = *v;
        consumed.push_back(prefix + "drift_at");
    }
}

void reject_unknown(const KeyValues& values, const std::vector<std::string>& consumed) {
    for (const auto& [key, value] : values) {
        if (std::find(consumed.begin(), consumed.end(), key) == consumed.end())
            throw Error(ErrorKind::Config, "unknown configuration key '" + key + "'");
    }
}

} // namespace

void RunConfig::validate() const {
    if (data_path.has_value() == synth.has_value())
        throw Error(ErrorKind::Config, "exactly one data source is required: data=<path> or synth.* settings");
    if (synth) synth->validate();
    if (out_dir.empty()) throw Error(ErrorKind::Config, "out directory must not be empty");
    stream.validate();
}

RunConfig run_config_from(const KeyValues& values) {
    RunConfig config;
    std::vector<std::string> consumed;
    for (auto& f : run_fields(config)) {
        if (auto it = values.find(f.key); it != values.end()) {
            f.set(it->second);
            consumed.push_back(f.key);
        }
    }
    if (auto it = values.find("data"); it != values.end()) {
        config.data_path = it->second;
        consumed.push_back("data");
    }
    if (auto it = values.find("out"); it != values.end()) {
        config.out_dir = it->second;
        consumed.push_back("out");
    }
    const bool any_synth = std::any_of(values.begin(), values.end(),
                                       [](const auto& kv) { return kv.first.starts_with("synth."); });
    if (any_synth) {
        SynthConfig synth;
        synth.seed = config.stream.seed;
        apply_synth(synth, values, "synth.", consumed);
        config.synth = synth;
    }
    reject_unknown(values, consumed);
    config.validate();
    return config;
}

KeyValues to_key_values(const RunConfig& config) {
    RunConfig copy = config;
    KeyValues values;
    for (auto& f : run_fields(copy)) values[f.key] = f.get();
    if (copy.data_path) values["data"] = *copy.data_path;
    values["out"] = copy.out_dir;
    if (copy.synth) {
        for (auto& f : synth_fields(*copy.synth, "synth.")) values[f.key] = f.get();
        if (copy.synth->drift_at) values["synth.drift_at"] = std::to_string(*copy.synth->drift_at);
    }
    return values;
}

SynthConfig synth_config_from(const KeyValues& values) {
    SynthConfig config;
    std::vector<std::string> consumed;
    apply_synth(config, values, "", consumed);
    reject_unknown(values, consumed);
    config.validate();
    return config;
}

KeyValues to_key_values(const SynthConfig& config) {
    SynthConfig copy = config;
    KeyValues values;
    for (auto& f : synth_fields(copy, "")) values[f.key] = f.get();
    if (copy.drift_at) values["drift_at"] = std::to_string(*copy.drift_at);
    return values;
}

} // namespace oneat
