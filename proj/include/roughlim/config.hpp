#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "analysis.hpp"
#include "ideal.hpp"
#include "sequence.hpp"
#include "space.hpp"

namespace roughlim {

/// Raised on malformed or invalid experiment configs; the message carries
/// the offending field. Maps to exit code 3 in the CLI.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GridSpec {
    double lo = 0.0, hi = 0.0, step = 1.0;

    std::vector<double> materialize(const Space& space) const {
        std::vector<double> out;
        const auto count = static_cast<std::size_t>((hi - lo) / step + 1e-9) + 1;
        for (std::size_t i = 0; i < count; ++i) {
            const double v = lo + static_cast<double>(i) * step;
            if (space.in_carrier(v)) out.push_back(v);
        }
        return out;
    }

    static GridSpec from_json(const json& j, const std::string& where) {
        GridSpec g;
        try {
            g.lo = j.at("lo").get<double>();
            g.hi = j.at("hi").get<double>();
            g.step = j.at("step").get<double>();
        } catch (const json::exception& e) {
            throw ConfigError(where + ": grid needs numeric lo/hi/step (" + e.what() + ")");
        }
        if (!(g.step > 0)) throw ConfigError(where + ": grid step must be > 0");
        if (!(g.hi >= g.lo)) throw ConfigError(where + ": grid hi must be >= lo");
        return g;
    }

    json to_json() const { return {{"lo", lo}, {"hi", hi}, {"step", step}}; }
};

/// One requested analysis; `params` keeps the raw JSON for the report.
struct AnalysisSpec {
    std::string op;
    json params;
    std::optional<std::string> expect; // holds|fails|unknown|hypothesisFailure
};

struct ExperimentConfig {
    Space space = Space::shifted_metric(0.0);
    Ideal ideal = Ideal::fin();
    PiecewiseSequence sequence{
        {{SetDescriptor::naturals(), PointRule::constant(0.0)}}, 1};
    std::uint64_t window = 10'000;
    Schedule schedule = Schedule::standard();
    std::uint64_t seed = 0;
    std::vector<AnalysisSpec> analyses;
    json raw; // parsed config, canonical source for hashing and round-trips

    DeciderOptions decider_options() const {
        DeciderOptions o;
        o.schedule = schedule;
        o.window = window;
        return o;
    }
};

namespace detail {

inline const json& require(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw ConfigError(where + ": missing field \"" + key + "\"");
    return j.at(key);
}

inline double require_number(const json& j, const char* key, const std::string& where) {
    const json& v = require(j, key, where);
    if (!v.is_number()) throw ConfigError(where + ": field \"" + key + "\" must be a number");
    return v.get<double>();
}

} // namespace detail

inline const std::vector<std::string>& known_analysis_ops() {
    static const std::vector<std::string> ops = {
        "roughIdealConverges",   "roughConverges",
        "idealConverges",        "estimateRoughLimitSet",
        "checkDiameterBound",    "checkBallInclusion",
        "checkClosedness",       "isIdealBounded",
        "checkBoundednessEquivalence", "checkSubsequenceInclusion",
        "checkPerturbationTransfer",   "clusterPoints",
        "checkClusterBall"};
    return ops;
}

inline ExperimentConfig parse_config(const json& j,
                                     std::uint64_t window_cap = kDefaultWindowCap) {
    if (!j.is_object()) throw ConfigError("config root must be a JSON object");
    ExperimentConfig cfg;
    cfg.raw = j;
    try {
        cfg.space = space_from_json(detail::require(j, "space", "config"));
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config.space: ") + e.what());
    }
    try {
        cfg.ideal = Ideal::from_json(detail::require(j, "ideal", "config"));
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config.ideal: ") + e.what());
    }
    if (j.contains("window")) {
        if (!j.at("window").is_number_unsigned())
            throw ConfigError("config.window: must be a positive integer");
        cfg.window = j.at("window").get<std::uint64_t>();
    }
    if (cfg.window < 1 || cfg.window > window_cap)
        throw ConfigError("config.window: must be in [1, " + std::to_string(window_cap) +
                          "] (window cap)");
    try {
        cfg.sequence = PiecewiseSequence::from_json(detail::require(j, "sequence", "config"),
                                                    cfg.window);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config.sequence: ") + e.what());
    }
    if (j.contains("epsilons")) {
        const auto& eps = j.at("epsilons");
        if (!eps.is_array() || eps.empty())
            throw ConfigError("config.epsilons: must be a nonempty array of positive numbers");
        cfg.schedule.epsilons.clear();
        for (const auto& e : eps) {
            if (!e.is_number() || !(e.get<double>() > 0))
                throw ConfigError("config.epsilons: entries must be positive numbers");
            cfg.schedule.epsilons.push_back(e.get<double>());
        }
    }
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();

    const json& analyses = detail::require(j, "analyses", "config");
    if (!analyses.is_array() || analyses.empty())
        throw ConfigError("config.analyses: must be a nonempty array");
    std::size_t i = 0;
    for (const auto& a : analyses) {
        const std::string where = "config.analyses[" + std::to_string(i++) + "]";
        if (!a.is_object()) throw ConfigError(where + ": must be an object");
        AnalysisSpec spec;
        spec.op = detail::require(a, "op", where).get<std::string>();
        const auto& ops = known_analysis_ops();
        if (std::find(ops.begin(), ops.end(), spec.op) == ops.end())
            throw ConfigError(where + ": unknown op \"" + spec.op + "\"");
        spec.params = a;
        if (a.contains("expect")) {
            const std::string e = a.at("expect").get<std::string>();
            if (e != "holds" && e != "fails" && e != "unknown" && e != "hypothesisFailure")
                throw ConfigError(where + ": expect must be holds|fails|unknown|hypothesisFailure");
            spec.expect = e;
        }
        // grid-carrying ops validate the grid eagerly
        if (a.contains("grid")) GridSpec::from_json(a.at("grid"), where);
        cfg.analyses.push_back(std::move(spec));
    }
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path,
                                    std::uint64_t window_cap = kDefaultWindowCap) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file \"" + path + "\"");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config parse error in \"" + path + "\": " + e.what());
    }
    return parse_config(j, window_cap);
}

/// Canonical serialization: rebuilt from the parsed objects, so
/// parse(serialize(parse(x))) == parse(x).
inline json serialize_config(const ExperimentConfig& cfg) {
    json j;
    j["space"] = to_json(cfg.space);
    j["ideal"] = std::string(cfg.ideal.name());
    j["sequence"] = cfg.sequence.to_json();
    j["window"] = cfg.window;
    j["epsilons"] = cfg.schedule.epsilons;
    j["seed"] = cfg.seed;
    json arr = json::array();
    for (const auto& a : cfg.analyses) arr.push_back(a.params);
    j["analyses"] = arr;
    return j;
}

} // namespace roughlim
