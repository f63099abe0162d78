#pragma once

#include <chrono>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"

namespace roughlim {

inline constexpr const char* kVersion = "0.1.0";

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hash_hex(std::string_view s) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(s)));
    return buf;
}

/// Result of one experiment run: deterministic JSON (timing lives in its own
/// block so reports are byte-identical across runs once it is stripped),
/// plus the in-memory estimates for CSV emission.
struct Report {
    json document;
    int exit_code = 0;
    std::vector<std::optional<LimitSetEstimate>> estimates; // parallel to results

    const LimitSetEstimate* first_estimate() const {
        for (const auto& e : estimates)
            if (e) return &*e;
        return nullptr;
    }
};

/// CSV of a grid classification: one row per candidate with its verdict
/// class, the density upper bound of the certifying set, and a certificate
/// fingerprint.
inline void emit_grid_csv(const LimitSetEstimate& est, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write CSV to \"" + path + "\"");
    out << "candidate,classification,master_density_upper,certificate_id\n";
    for (const auto& e : est.entries) {
        const char* cls = e.outcome == Outcome::Holds    ? "accepted"
                          : e.outcome == Outcome::Fails  ? "rejected"
                                                         : "unknown";
        out << json(e.candidate).dump() << ',' << cls << ',' << json(e.density_upper).dump()
            << ',' << hash_hex(e.certificate.dump()) << '\n';
    }
    if (!out) throw std::runtime_error("failed writing CSV to \"" + path + "\"");
}

namespace detail {

struct AnalysisOutcome {
    json entry;
    std::string effective; // holds | fails | unknown, after expectations
    std::optional<LimitSetEstimate> estimate;
};

inline std::string effective_outcome(const AnalysisSpec& spec, const std::string& observed) {
    if (!spec.expect) return observed;
    return observed == *spec.expect ? "holds" : "fails";
}

inline AnalysisOutcome run_analysis(const ExperimentConfig& cfg, const AnalysisSpec& spec) {
    const auto& p = spec.params;
    const std::string where = "analysis \"" + spec.op + "\"";
    const DeciderOptions opts = cfg.decider_options();
    AnalysisOutcome out;
    out.entry = json{{"op", spec.op}, {"params", p}};
    if (spec.expect) out.entry["expect"] = *spec.expect;

    auto grid_of = [&](const char* key = "grid") {
        return GridSpec::from_json(detail::require(p, key, where), where)
            .materialize(cfg.space);
    };
    auto finish_verdict = [&](const Verdict& v) {
        out.entry["verdict"] = std::string(to_string(v.outcome));
        out.entry["certificate"] = v.certificate;
        out.effective = effective_outcome(spec, std::string(to_string(v.outcome)));
        out.entry["effective"] = out.effective;
    };
    auto finish_estimate = [&](LimitSetEstimate est) {
        out.entry["estimate"] = est.to_json();
        const std::string observed = est.unknown().empty() ? "holds" : "unknown";
        out.entry["verdict"] = observed;
        out.effective = effective_outcome(spec, observed);
        out.entry["effective"] = out.effective;
        out.estimate = std::move(est);
    };

    try {
        if (spec.op == "roughIdealConverges") {
            finish_verdict(rough_ideal_converges(cfg.sequence, cfg.space,
                                                 detail::require_number(p, "x", where),
                                                 detail::require_number(p, "r", where),
                                                 cfg.ideal, opts));
        } else if (spec.op == "roughConverges") {
            finish_verdict(rough_converges(cfg.sequence, cfg.space,
                                           detail::require_number(p, "x", where),
                                           detail::require_number(p, "r", where), opts));
        } else if (spec.op == "idealConverges") {
            finish_verdict(ideal_converges(cfg.sequence, cfg.space,
                                           detail::require_number(p, "x", where), cfg.ideal,
                                           opts));
        } else if (spec.op == "estimateRoughLimitSet") {
            finish_estimate(estimate_rough_limit_set(cfg.sequence, cfg.space, grid_of(),
                                                     detail::require_number(p, "r", where),
                                                     cfg.ideal, opts));
        } else if (spec.op == "checkDiameterBound") {
            const double r = detail::require_number(p, "r", where);
            auto est = estimate_rough_limit_set(cfg.sequence, cfg.space, grid_of(), r,
                                                cfg.ideal, opts);
            const Verdict v = check_diameter_bound(est, cfg.space, r);
            out.estimate = std::move(est);
            out.entry["estimate"] = out.estimate->to_json();
            finish_verdict(v);
        } else if (spec.op == "checkBallInclusion") {
            finish_verdict(check_ball_inclusion(cfg.sequence, cfg.space,
                                                detail::require_number(p, "x", where), grid_of(),
                                                detail::require_number(p, "r", where), cfg.ideal,
                                                opts));
        } else if (spec.op == "checkClosedness") {
            const double r = detail::require_number(p, "r", where);
            const auto grid = grid_of();
            auto est = estimate_rough_limit_set(cfg.sequence, cfg.space, grid, r, cfg.ideal,
                                                opts);
            const double h = p.contains("h")
                                 ? detail::require_number(p, "h", where)
                                 : GridSpec::from_json(p.at("grid"), where).step;
            const Verdict v = check_closedness(est, h);
            out.estimate = std::move(est);
            out.entry["estimate"] = out.estimate->to_json();
            finish_verdict(v);
        } else if (spec.op == "isIdealBounded") {
            finish_verdict(is_ideal_bounded(cfg.sequence, cfg.space,
                                            detail::require_number(p, "u", where),
                                            detail::require_number(p, "M", where), cfg.ideal,
                                            opts));
        } else if (spec.op == "checkBoundednessEquivalence") {
            finish_verdict(check_boundedness_equivalence(
                cfg.sequence, cfg.space, detail::require_number(p, "u", where),
                detail::require_number(p, "M", where), grid_of(), cfg.ideal, opts));
        } else if (spec.op == "checkSubsequenceInclusion") {
            finish_verdict(check_subsequence_inclusion(
                cfg.sequence, cfg.space,
                SetDescriptor::from_json(detail::require(p, "subindex", where)), grid_of(),
                detail::require_number(p, "r", where), cfg.ideal, opts));
        } else if (spec.op == "checkPerturbationTransfer") {
            const auto& variant = detail::require(p, "variant", where);
            TransferVariant tv = TransferVariant::EqualDegree;
            std::optional<double> c;
            if (variant.is_string() && variant.get<std::string>() == "equalDegree") {
                tv = TransferVariant::EqualDegree;
            } else if (variant.is_object() && variant.contains("plusC")) {
                tv = TransferVariant::DegreePlusC;
                c = variant.at("plusC").get<double>();
            } else {
                throw ConfigError(where + ": variant must be \"equalDegree\" or {\"plusC\": c}");
            }
            const auto seq_b = PiecewiseSequence::from_json(
                detail::require(p, "seqB", where), cfg.window);
            finish_verdict(check_perturbation_transfer(
                cfg.sequence, seq_b, cfg.space, detail::require_number(p, "x", where),
                detail::require_number(p, "r", where), cfg.ideal, tv, c, opts));
        } else if (spec.op == "clusterPoints") {
            finish_estimate(cluster_points(cfg.sequence, cfg.space, grid_of(), cfg.ideal, opts));
        } else if (spec.op == "checkClusterBall") {
            const double r = detail::require_number(p, "r", where);
            auto est = estimate_rough_limit_set(cfg.sequence, cfg.space, grid_of(), r,
                                                cfg.ideal, opts);
            const Verdict v = check_cluster_ball(cfg.sequence, cfg.space,
                                                 detail::require_number(p, "c", where), est, r,
                                                 cfg.ideal, opts);
            out.estimate = std::move(est);
            out.entry["estimate"] = out.estimate->to_json();
            finish_verdict(v);
        } else {
            throw ConfigError(where + ": unknown op");
        }
    } catch (const HypothesisError& e) {
        out.entry["error"] = {{"kind", "hypothesisFailure"},
                              {"which", e.which},
                              {"message", e.what()},
                              {"evidence", e.evidence}};
        out.effective = effective_outcome(spec, "hypothesisFailure");
        if (!spec.expect) out.effective = "fails";
        out.entry["effective"] = out.effective;
    } catch (const PreconditionError& e) {
        out.entry["error"] = {{"kind", "precondition"}, {"message", e.what()}};
        out.effective = spec.expect ? effective_outcome(spec, "error") : "fails";
        out.entry["effective"] = out.effective;
    }
    return out;
}

} // namespace detail

/// Run every analysis in the config and assemble the report. Verdicts are
/// deterministic functions of the config; two runs differ only in the
/// timing block. Exit code: 0 all effective verdicts hold, 1 any fails,
/// 2 any unknown with none failing (3, config errors, is raised upstream).
inline Report run_experiment(const ExperimentConfig& cfg) {
    using clock = std::chrono::steady_clock;
    Report report;
    json results = json::array();
    json timings = json::array();
    bool any_fails = false, any_unknown = false;

    const auto t0 = clock::now();
    for (const auto& spec : cfg.analyses) {
        const auto ta = clock::now();
        auto outcome = detail::run_analysis(cfg, spec);
        const auto tb = clock::now();
        timings.push_back(
            {{"op", spec.op},
             {"ms", std::chrono::duration<double, std::milli>(tb - ta).count()}});
        any_fails |= outcome.effective == "fails";
        any_unknown |= outcome.effective == "unknown";
        results.push_back(std::move(outcome.entry));
        report.estimates.push_back(std::move(outcome.estimate));
    }
    report.exit_code = any_fails ? 1 : any_unknown ? 2 : 0;

    report.document["environment"] = {
        {"configHash", hash_hex(serialize_config(cfg).dump())},
        {"version", kVersion},
        {"seed", cfg.seed}};
    report.document["results"] = std::move(results);
    report.document["exitCode"] = report.exit_code;
    report.document["timing"] = {
        {"totalMs",
         std::chrono::duration<double, std::milli>(clock::now() - t0).count()},
        {"perAnalysis", std::move(timings)}};
    return report;
}

/// The report with its timing block removed: the deterministic part that
/// must be byte-identical across runs of the same config and version.
inline json deterministic_view(const json& report_document) {
    json copy = report_document;
    copy.erase("timing");
    return copy;
}

} // namespace roughlim
