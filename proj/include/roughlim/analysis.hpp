#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "ideal.hpp"
#include "sequence.hpp"
#include "space.hpp"
#include "verdict.hpp"

namespace roughlim {

/// Epsilon schedule used to instantiate "for every eps > 0". Default is
/// geometric, 1 down to 1e-6.
struct Schedule {
    std::vector<double> epsilons;

    static Schedule standard() {
        Schedule s;
        for (double e = 1.0; e >= 1e-6 * 0.999; e /= 10.0) s.epsilons.push_back(e);
        return s;
    }

    double smallest() const {
        double m = epsilons.empty() ? 1e-6 : epsilons.front();
        for (double e : epsilons) m = std::min(m, e);
        return m;
    }
};

struct DeciderOptions {
    Schedule schedule = Schedule::standard();
    std::optional<SetDescriptor> mask; // restrict indices to a subsequence view
    std::uint64_t window = 10'000;     // enumeration window for fallbacks/evidence
};

namespace detail {

inline SetDescriptor apply_mask(const SetDescriptor& d, const DeciderOptions& opts) {
    return opts.mask ? SetDescriptor::intersection(d, *opts.mask) : d;
}

inline json window_violation_counts(const PiecewiseSequence& seq, const Space& space, double x,
                                    double r, const DeciderOptions& opts) {
    const DeviationFn dev{space, x, DeviationKind::CenteredAbs};
    json arr = json::array();
    for (double eps : opts.schedule.epsilons) {
        std::uint64_t count = 0;
        for (std::uint64_t n = 1; n <= opts.window; ++n) {
            if (opts.mask && !opts.mask->contains(n)) continue;
            if (dev(seq.at(n)) >= r + eps) ++count;
        }
        arr.push_back({{"epsilon", eps}, {"violations", count}});
    }
    return arr;
}

} // namespace detail

/// Decide whether x_n is rough ideal convergent to x of roughness degree r:
/// for every eps > 0, A(eps) = {n : |p(x_n,x)-p(x,x)| >= r+eps} must belong
/// to the ideal.
///
/// Holds routes (each certifies the full "for every eps" quantifier):
///   master  - the strict master set {n : deviation > r} = union of all
///             A(eps) has an exact descriptor certified in the ideal;
///   pieces  - every piece is individually harmless: a provably finite
///             index set, a set certified in the ideal (any behavior on an
///             ideal member is absorbed), a constant deviation <= r, or a
///             deviation converging to a limit <= r (then every A(eps) meets
///             the piece in a finite set, and admissible ideals contain
///             finite sets).
/// Fails route: some A(eps) - for a scheduled eps or an eps derived from a
/// piece whose deviation stays above r - is certified NOT in the ideal.
/// Anything else is Unknown, with window evidence.
inline Verdict rough_ideal_converges(const PiecewiseSequence& seq, const Space& space, double x,
                                     double r, const Ideal& ideal,
                                     const DeciderOptions& opts = {}) {
    if (r < 0) throw std::invalid_argument("roughness degree must be nonnegative");
    if (!space.in_carrier(x)) throw std::domain_error("limit candidate outside the space carrier");

    const detail::DeviationFn dev{space, x, DeviationKind::CenteredAbs};
    json base{{"r", r}, {"x", x}, {"ideal", std::string(ideal.name())}};
    if (opts.mask) base["mask"] = opts.mask->to_json();

    // route 1: strict master set in the ideal
    const ThresholdSet master =
        threshold_set(seq, space, x, r, /*strict=*/true, DeviationKind::CenteredAbs, opts.window);
    const SetDescriptor master_masked = detail::apply_mask(master.descriptor, opts);
    if (master.exact) {
        const Verdict mv = ideal.in_ideal(master_masked);
        if (mv.is_holds()) {
            json cert = base;
            cert["route"] = "master";
            cert["strictMasterSet"] = master_masked.to_json();
            cert["idealCertificate"] = mv.certificate;
            return Verdict::holds(std::move(cert));
        }
    }

    // route 2: per-piece certificates; also collect derived epsilons for the
    // Fails route from pieces whose deviation stays above r
    bool all_pieces_ok = true;
    json piece_facts = json::array();
    std::vector<double> derived_epsilons;
    std::size_t index = 0;
    for (const auto& piece : seq.pieces()) {
        json fact{{"pieceIndex", index++}, {"set", piece.set.to_json()}};
        const SetDescriptor pset = detail::apply_mask(piece.set, opts);

        if (pset.prove_finite().is_holds()) {
            fact["fact"] = "finitePiece";
            piece_facts.push_back(std::move(fact));
            continue;
        }
        const Verdict pv = ideal.in_ideal(pset);
        if (pv.is_holds()) {
            fact["fact"] = "pieceInIdeal";
            fact["idealCertificate"] = pv.certificate;
            piece_facts.push_back(std::move(fact));
            continue;
        }
        if (piece.rule.is_constant()) {
            const double d = dev(piece.rule.constant_value());
            if (d <= r) {
                fact["fact"] = "constantWithinR";
                fact["deviation"] = d;
                piece_facts.push_back(std::move(fact));
                continue;
            }
            derived_epsilons.push_back((d - r) / 2);
        } else if (space.is_builtin()) {
            const auto glimit = dev.at_limit(piece.rule.limit());
            if (glimit && *glimit <= r) {
                fact["fact"] = "deviationLimitWithinR";
                fact["deviationLimit"] = *glimit;
                piece_facts.push_back(std::move(fact));
                continue;
            }
            if (glimit && *glimit > r)
                derived_epsilons.push_back(std::isinf(*glimit) ? 1.0 : (*glimit - r) / 2);
        }
        fact["fact"] = "unresolved";
        all_pieces_ok = false;
        piece_facts.push_back(std::move(fact));
    }
    if (all_pieces_ok) {
        json cert = base;
        cert["route"] = "pieces";
        cert["pieces"] = piece_facts;
        return Verdict::holds(std::move(cert));
    }

    // route 3: a failing epsilon, scheduled first, then derived
    auto try_epsilon = [&](double eps, const char* source) -> std::optional<Verdict> {
        if (!(eps > 0)) return std::nullopt;
        const ThresholdSet a = threshold_set(seq, space, x, r + eps, /*strict=*/false,
                                             DeviationKind::CenteredAbs, opts.window);
        if (!a.exact) return std::nullopt;
        const SetDescriptor cond = detail::apply_mask(a.descriptor, opts);
        const Verdict av = ideal.in_ideal(cond);
        if (!av.is_fails()) return std::nullopt;
        json cert = base;
        cert["route"] = "epsilon";
        cert["epsilon"] = eps;
        cert["epsilonSource"] = source;
        cert["conditionSet"] = cond.to_json();
        cert["idealCertificate"] = av.certificate;
        return Verdict::fails(std::move(cert));
    };
    for (double eps : opts.schedule.epsilons)
        if (auto v = try_epsilon(eps, "schedule")) return *v;
    for (double eps : derived_epsilons)
        if (auto v = try_epsilon(eps, "derived")) return *v;

    json cert = base;
    cert["route"] = "window";
    cert["window"] = opts.window;
    cert["evidence"] = detail::window_violation_counts(seq, space, x, r, opts);
    cert["masterExact"] = master.exact;
    cert["pieces"] = piece_facts;
    return Verdict::unknown(std::move(cert));
}

/// Ordinary rough convergence of degree r: a threshold index exists for
/// every eps. Equivalent to rough ideal convergence under Fin.
inline Verdict rough_converges(const PiecewiseSequence& seq, const Space& space, double x,
                               double r, const DeciderOptions& opts = {}) {
    Verdict v = rough_ideal_converges(seq, space, x, r, Ideal::fin(), opts);
    v.certificate["notion"] = "roughConvergence";
    return v;
}

/// Ideal convergence is rough ideal convergence of degree 0.
inline Verdict ideal_converges(const PiecewiseSequence& seq, const Space& space, double x,
                               const Ideal& ideal, const DeciderOptions& opts = {}) {
    Verdict v = rough_ideal_converges(seq, space, x, 0.0, ideal, opts);
    v.certificate["notion"] = "idealConvergence";
    return v;
}

/// Re-evaluate the route recorded in a convergence certificate and report
/// the outcome it reproduces.
inline Outcome replay_certificate(const json& cert, const PiecewiseSequence& seq,
                                  const Space& space, const Ideal& ideal) {
    const std::string route = cert.value("route", "");
    if (route == "master") {
        const auto d = SetDescriptor::from_json(cert.at("strictMasterSet"));
        return ideal.in_ideal(d).is_holds() ? Outcome::Holds : Outcome::Unknown;
    }
    if (route == "epsilon") {
        const auto d = SetDescriptor::from_json(cert.at("conditionSet"));
        return ideal.in_ideal(d).is_fails() ? Outcome::Fails : Outcome::Unknown;
    }
    if (route == "pieces") {
        const double r = cert.at("r").get<double>();
        const double x = cert.at("x").get<double>();
        const detail::DeviationFn dev{space, x, DeviationKind::CenteredAbs};
        for (const auto& fact : cert.at("pieces")) {
            const auto idx = fact.at("pieceIndex").get<std::size_t>();
            if (idx >= seq.pieces().size()) return Outcome::Unknown;
            const auto& piece = seq.pieces()[idx];
            const std::string kind = fact.at("fact").get<std::string>();
            SetDescriptor pset = SetDescriptor::from_json(fact.at("set"));
            if (cert.contains("mask"))
                pset = SetDescriptor::intersection(pset,
                                                   SetDescriptor::from_json(cert.at("mask")));
            if (kind == "finitePiece") {
                if (!pset.prove_finite().is_holds()) return Outcome::Unknown;
            } else if (kind == "pieceInIdeal") {
                if (!ideal.in_ideal(pset).is_holds()) return Outcome::Unknown;
            } else if (kind == "constantWithinR") {
                if (!piece.rule.is_constant() || dev(piece.rule.constant_value()) > r)
                    return Outcome::Unknown;
            } else if (kind == "deviationLimitWithinR") {
                const auto gl = dev.at_limit(piece.rule.limit());
                if (!gl || *gl > r) return Outcome::Unknown;
            } else {
                return Outcome::Unknown;
            }
        }
        return Outcome::Holds;
    }
    return Outcome::Unknown;
}

/// Grid classification of candidate rough ideal limit points.
struct LimitSetEstimate {
    enum class Kind { LimitSet, ClusterSet };

    struct Entry {
        double candidate;
        Outcome outcome;
        json certificate;
        double density_upper; // of the strict master set (limit) / tightest near set (cluster)
    };

    Kind kind = Kind::LimitSet;
    double r = 0.0;
    std::vector<double> epsilons;
    std::vector<Entry> entries;

    std::vector<double> accepted() const { return with(Outcome::Holds); }
    std::vector<double> rejected() const { return with(Outcome::Fails); }
    std::vector<double> unknown() const { return with(Outcome::Unknown); }

    /// Grid step, when the candidates form a uniform 1-D grid.
    std::optional<double> uniform_step() const {
        if (entries.size() < 2) return std::nullopt;
        const double h = entries[1].candidate - entries[0].candidate;
        if (!(h > 0)) return std::nullopt;
        for (std::size_t i = 1; i < entries.size(); ++i) {
            const double d = entries[i].candidate - entries[i - 1].candidate;
            if (std::abs(d - h) > 1e-9 * std::max(1.0, std::abs(h))) return std::nullopt;
        }
        return h;
    }

    json to_json() const {
        json entries_json = json::array();
        for (const auto& e : entries)
            entries_json.push_back({{"candidate", e.candidate},
                                    {"outcome", std::string(to_string(e.outcome))},
                                    {"densityUpper", e.density_upper}});
        return {{"kind", kind == Kind::LimitSet ? "limitSet" : "clusterSet"},
                {"r", r},
                {"epsilons", epsilons},
                {"accepted", accepted()},
                {"rejected", rejected()},
                {"unknown", unknown()},
                {"entries", entries_json}};
    }

private:
    std::vector<double> with(Outcome o) const {
        std::vector<double> out;
        for (const auto& e : entries)
            if (e.outcome == o) out.push_back(e.candidate);
        return out;
    }
};

/// Classify every grid candidate by rough_ideal_converges. The estimate is a
/// grid classification of I-LIM^r, never a completeness claim off-grid.
inline LimitSetEstimate estimate_rough_limit_set(const PiecewiseSequence& seq, const Space& space,
                                                 std::span<const double> grid, double r,
                                                 const Ideal& ideal,
                                                 const DeciderOptions& opts = {}) {
    if (grid.empty()) throw std::invalid_argument("estimate_rough_limit_set needs a nonempty grid");
    LimitSetEstimate est;
    est.kind = LimitSetEstimate::Kind::LimitSet;
    est.r = r;
    est.epsilons = opts.schedule.epsilons;
    for (double y : grid) {
        Verdict v = rough_ideal_converges(seq, space, y, r, ideal, opts);
        const ThresholdSet master = threshold_set(seq, space, y, r, /*strict=*/true,
                                                  DeviationKind::CenteredAbs, opts.window);
        const double upper =
            detail::apply_mask(master.descriptor, opts).density_bounds().upper.to_double();
        est.entries.push_back({y, v.outcome, std::move(v.certificate), upper});
    }
    return est;
}

/// diam(I-LIM^r x_n) <= 2r + 2a for spaces with constant self-distance a.
/// Checked on the accepted grid set with one grid step's induced distance as
/// tolerance; accepted points are certified members, so the bound should
/// hold without slack up to that discretization.
inline Verdict check_diameter_bound(const LimitSetEstimate& est, const Space& space, double r) {
    const auto a = space.constant_self_distance();
    if (!a)
        throw std::invalid_argument(
            "diameter bound requires a space with constant self-distance");
    const auto accepted = est.accepted();
    double tol = 0.0;
    if (const auto h = est.uniform_step(); h && !accepted.empty())
        tol = space.eval_p(accepted.front(), accepted.front() + *h) -
              space.eval_p(accepted.front(), accepted.front());
    const double d = diam(space, accepted);
    const double bound = 2 * r + 2 * *a;
    json cert{{"diameter", d},
              {"bound", bound},
              {"tolerance", tol},
              {"a", *a},
              {"r", r},
              {"acceptedCount", accepted.size()},
              {"unknownCount", est.unknown().size()}};
    if (d <= bound + tol) return Verdict::holds(std::move(cert));
    return Verdict::fails(std::move(cert));
}

/// {y in closed ball B_r(x) : p(x,x) = p(y,y)} is contained in I-LIM^r,
/// given that x_n ideal-converges to x. Every qualifying grid point must be
/// accepted; Unknown classifications make the whole check Unknown.
inline Verdict check_ball_inclusion(const PiecewiseSequence& seq, const Space& space, double x,
                                    std::span<const double> grid, double r, const Ideal& ideal,
                                    const DeciderOptions& opts = {},
                                    double self_distance_tol = 1e-9) {
    const Verdict pre = ideal_converges(seq, space, x, ideal, opts);
    if (!pre.is_holds())
        throw PreconditionError("ball inclusion requires ideal_converges(x) = Holds (got " +
                                std::string(to_string(pre.outcome)) + ")");
    const double pxx = space.eval_p(x, x);
    std::size_t qualifying = 0, unknowns = 0;
    for (double y : grid) {
        if (!space.in_carrier(y)) continue;
        if (!in_closed_ball(space, x, r, y)) continue;
        if (std::abs(pxx - space.eval_p(y, y)) > self_distance_tol) continue;
        ++qualifying;
        const Verdict v = rough_ideal_converges(seq, space, y, r, ideal, opts);
        if (v.is_fails())
            return Verdict::fails({{"witness", y},
                                   {"x", x},
                                   {"r", r},
                                   {"verdict", to_json(v)}});
        if (v.is_unknown()) ++unknowns;
    }
    json cert{{"x", x}, {"r", r}, {"qualifyingGridPoints", qualifying}, {"unknown", unknowns}};
    if (unknowns > 0) return Verdict::unknown(std::move(cert));
    return Verdict::holds(std::move(cert));
}

/// Closedness at grid resolution: the accepted set may not have holes. A
/// hole is a rejected grid point within carrier distance h of an accepted
/// point with another accepted point on its far side. Unknown points
/// flanked by accepted points make the check Unknown.
inline Verdict check_closedness(const LimitSetEstimate& est, double h) {
    const auto step = est.uniform_step();
    if (est.entries.size() >= 2 && !step)
        throw std::invalid_argument("closedness check requires a uniform grid");
    if (step && *step > h + 1e-12)
        throw std::invalid_argument("closedness check requires grid step <= h");

    const auto& es = est.entries;
    std::size_t holes = 0, unknown_flanked = 0;
    json witnesses = json::array();
    for (std::size_t i = 0; i < es.size(); ++i) {
        if (es[i].outcome == Outcome::Holds) continue;
        bool acc_left = false, acc_right = false;
        double dist_left = 0, dist_right = 0;
        for (std::size_t j = i; j-- > 0;)
            if (es[j].outcome == Outcome::Holds) {
                acc_left = true;
                dist_left = es[i].candidate - es[j].candidate;
                break;
            }
        for (std::size_t j = i + 1; j < es.size(); ++j)
            if (es[j].outcome == Outcome::Holds) {
                acc_right = true;
                dist_right = es[j].candidate - es[i].candidate;
                break;
            }
        if (!acc_left || !acc_right) continue;
        if (std::min(dist_left, dist_right) > h) continue;
        if (es[i].outcome == Outcome::Fails) {
            ++holes;
            witnesses.push_back(es[i].candidate);
        } else {
            ++unknown_flanked;
        }
    }
    json cert{{"h", h},
              {"holes", holes},
              {"witnesses", witnesses},
              {"unknownFlanked", unknown_flanked},
              {"acceptedCount", est.accepted().size()}};
    if (holes > 0) return Verdict::fails(std::move(cert));
    if (unknown_flanked > 0) return Verdict::unknown(std::move(cert));
    return Verdict::holds(std::move(cert));
}

/// I-boundedness: {n : p(x_n,u) >= M} in I for the given bound M.
inline Verdict is_ideal_bounded(const PiecewiseSequence& seq, const Space& space, double u,
                                double M, const Ideal& ideal, const DeciderOptions& opts = {}) {
    if (!(M > 0)) throw std::invalid_argument("I-boundedness requires M > 0");
    const ThresholdSet ts = threshold_set(seq, space, u, M, /*strict=*/false,
                                          DeviationKind::RawDistance, opts.window);
    const SetDescriptor d = detail::apply_mask(ts.descriptor, opts);
    json base{{"u", u}, {"M", M}, {"set", d.to_json()}, {"exact", ts.exact}};
    if (!ts.exact) {
        base["note"] = "threshold set is a window enumeration; membership not certified";
        return Verdict::unknown(std::move(base));
    }
    Verdict v = ideal.in_ideal(d);
    base["idealCertificate"] = v.certificate;
    return {v.outcome, std::move(base)};
}

/// The boundedness equivalence: I-bounded iff I-LIM^r nonempty for some r,
/// via the proof's constructions r = M + a (forward) and M' = r + a + eps0
/// (backward). Both implications are checked; two negative sides are
/// consistent and count as Holds.
inline Verdict check_boundedness_equivalence(const PiecewiseSequence& seq, const Space& space,
                                             double u, double M, std::span<const double> grid,
                                             const Ideal& ideal, const DeciderOptions& opts = {},
                                             double eps0 = 1e-6) {
    const auto a = space.constant_self_distance();
    if (!a)
        throw std::invalid_argument(
            "boundedness equivalence requires a space with constant self-distance");
    const Verdict bounded = is_ideal_bounded(seq, space, u, M, ideal, opts);
    json cert{{"u", u}, {"M", M}, {"a", *a}, {"bounded", to_json(bounded)}};

    bool unknown = bounded.is_unknown();

    // forward: bounded at M  =>  u in I-LIM^{M+a}
    const double r_fwd = M + *a;
    cert["forwardR"] = r_fwd;
    if (bounded.is_holds()) {
        const Verdict fwd = rough_ideal_converges(seq, space, u, r_fwd, ideal, opts);
        cert["forward"] = to_json(fwd);
        if (fwd.is_fails()) return Verdict::fails(std::move(cert));
        if (fwd.is_unknown()) unknown = true;
    } else {
        cert["forward"] = "vacuous";
    }

    // backward: nonempty accepted set at r  =>  bounded at r + a + eps0
    const LimitSetEstimate est = estimate_rough_limit_set(seq, space, grid, r_fwd, ideal, opts);
    const auto accepted = est.accepted();
    cert["acceptedCount"] = accepted.size();
    if (!accepted.empty()) {
        const double witness = accepted.front();
        const double M_back = r_fwd + *a + eps0;
        const Verdict back = is_ideal_bounded(seq, space, witness, M_back, ideal, opts);
        cert["backwardWitness"] = witness;
        cert["backwardM"] = M_back;
        cert["backward"] = to_json(back);
        if (back.is_fails()) return Verdict::fails(std::move(cert));
        if (back.is_unknown()) unknown = true;
    } else {
        cert["backward"] = "vacuous";
        if (!est.unknown().empty()) unknown = true;
    }

    if (unknown) return Verdict::unknown(std::move(cert));
    return Verdict::holds(std::move(cert));
}

/// Subsequence theorem: for {n_1, n_2, ...} in F(I), every rough I-limit of
/// the sequence is a rough I-limit of the subsequence. The subsequence's
/// condition sets are the original ones intersected with the index set,
/// which is exact for Fin and sound for DensityZero because the index set
/// has density 1.
inline Verdict check_subsequence_inclusion(const PiecewiseSequence& seq, const Space& space,
                                           const SetDescriptor& subindex,
                                           std::span<const double> grid, double r,
                                           const Ideal& ideal, const DeciderOptions& opts = {}) {
    const Verdict filt = ideal.in_filter(subindex);
    if (!filt.is_holds())
        throw PreconditionError("subsequence index set is not certified in F(I) (got " +
                                std::string(to_string(filt.outcome)) + ")");
    DeciderOptions sub_opts = opts;
    sub_opts.mask = opts.mask ? SetDescriptor::intersection(*opts.mask, subindex) : subindex;

    std::size_t accepted_for_seq = 0, unknown_for_sub = 0;
    for (double y : grid) {
        if (!space.in_carrier(y)) continue;
        const Verdict v = rough_ideal_converges(seq, space, y, r, ideal, opts);
        if (!v.is_holds()) continue;
        ++accepted_for_seq;
        const Verdict sv = rough_ideal_converges(seq, space, y, r, ideal, sub_opts);
        if (sv.is_fails())
            return Verdict::fails({{"witness", y},
                                   {"r", r},
                                   {"subindex", subindex.to_json()},
                                   {"subsequenceVerdict", to_json(sv)}});
        if (sv.is_unknown()) ++unknown_for_sub;
    }
    return Verdict::holds({{"r", r},
                           {"subindex", subindex.to_json()},
                           {"acceptedForSequence", accepted_for_seq},
                           {"unknownForSubsequence", unknown_for_sub},
                           {"filterCertificate", filt.certificate}});
}

enum class TransferVariant { EqualDegree, DegreePlusC };

namespace detail {

/// Window + declared-limit evidence that p(a_n, b_n) -> 0.
inline json verify_pair_distance_vanishes(const PiecewiseSequence& a, const PiecewiseSequence& b,
                                          const Space& space, std::uint64_t window) {
    const double at_window = space.eval_p(a.at(window), b.at(window));
    json evidence{{"checkedAt", window}, {"value", at_window}};
    if (!(at_window <= 1e-3))
        throw HypothesisError("pairDistanceVanishes",
                              "p(a_n,b_n) at n=" + std::to_string(window) + " is " +
                                  std::to_string(at_window) + " > 1e-3",
                              evidence);
    // declared limits: infinite pieces that co-occur must meet at distance 0
    json pairs = json::array();
    for (const auto& pa : a.pieces()) {
        if (pa.set.prove_finite().is_holds()) continue;
        for (const auto& pb : b.pieces()) {
            if (pb.set.prove_finite().is_holds()) continue;
            const auto inter = SetDescriptor::intersection(pa.set, pb.set);
            bool co_occur = false;
            for (std::uint64_t n = window / 2; n <= window && !co_occur; ++n)
                co_occur = inter.contains(n);
            if (!co_occur) continue;
            const double la = pa.rule.is_constant() ? pa.rule.constant_value() : pa.rule.limit();
            const double lb = pb.rule.is_constant() ? pb.rule.constant_value() : pb.rule.limit();
            json entry{{"limitA", la}, {"limitB", lb}};
            if (std::isinf(la) || std::isinf(lb) || !space.in_carrier(la) ||
                !space.in_carrier(lb)) {
                entry["pairDistance"] = "divergent";
                pairs.push_back(entry);
                evidence["limitPairs"] = pairs;
                throw HypothesisError("pairDistanceVanishes",
                                      "declared limits do not vanish together", evidence);
            }
            const double d = space.eval_p(la, lb);
            entry["pairDistance"] = d;
            pairs.push_back(entry);
            if (!(d <= 1e-6)) {
                evidence["limitPairs"] = pairs;
                throw HypothesisError("pairDistanceVanishes",
                                      "declared limits meet at distance " + std::to_string(d) +
                                          " > 1e-6",
                                      evidence);
            }
        }
    }
    evidence["limitPairs"] = pairs;
    return evidence;
}

} // namespace detail

/// Perturbation transfer: with p(a_n,b_n) -> 0, rough-I convergence of a_n
/// to x transfers to b_n, at the same degree when p(a_n,a_n) -> 0, or at
/// degree r + c when p(a_n,a_n) <= c throughout. A failed hypothesis throws
/// HypothesisError rather than producing a verdict.
inline Verdict check_perturbation_transfer(const PiecewiseSequence& seq_a,
                                           const PiecewiseSequence& seq_b, const Space& space,
                                           double x, double r, const Ideal& ideal,
                                           TransferVariant variant,
                                           std::optional<double> c = std::nullopt,
                                           const DeciderOptions& opts = {}) {
    json hypothesis;
    hypothesis["pairDistance"] =
        detail::verify_pair_distance_vanishes(seq_a, seq_b, space, opts.window);

    if (variant == TransferVariant::EqualDegree) {
        hypothesis["selfDistance"] =
            detail::verify_pair_distance_vanishes(seq_a, seq_a, space, opts.window);
    } else {
        if (!c || !(*c > 0))
            throw std::invalid_argument("degree-plus-c transfer needs a positive c");
        double worst = 0.0;
        for (std::uint64_t n = 1; n <= opts.window; ++n)
            worst = std::max(worst, space.eval_p(seq_a.at(n), seq_a.at(n)));
        json evidence{{"window", opts.window}, {"maxSelfDistance", worst}, {"c", *c}};
        if (!(worst <= *c))
            throw HypothesisError("selfDistanceBounded",
                                  "p(a_n,a_n) reaches " + std::to_string(worst) + " > c",
                                  evidence);
        for (const auto& p : seq_a.pieces()) {
            if (p.set.prove_finite().is_holds()) continue;
            const double l = p.rule.is_constant() ? p.rule.constant_value() : p.rule.limit();
            if (std::isinf(l) || !space.in_carrier(l) || !(space.eval_p(l, l) <= *c + 1e-9)) {
                evidence["limit"] = std::isinf(l) ? json("infinity") : json(l);
                throw HypothesisError("selfDistanceBounded",
                                      "declared limit self-distance exceeds c", evidence);
            }
        }
        hypothesis["selfDistanceBound"] = evidence;
    }

    const double r_b = variant == TransferVariant::EqualDegree ? r : r + *c;
    const Verdict va = rough_ideal_converges(seq_a, space, x, r, ideal, opts);
    json cert{{"x", x},
              {"r", r},
              {"rB", r_b},
              {"variant", variant == TransferVariant::EqualDegree ? "equalDegree" : "degreePlusC"},
              {"hypothesis", hypothesis},
              {"premise", to_json(va)}};
    if (va.is_fails()) {
        cert["conclusion"] = "vacuous";
        return Verdict::holds(std::move(cert));
    }
    if (va.is_unknown()) return Verdict::unknown(std::move(cert));
    const Verdict vb = rough_ideal_converges(seq_b, space, x, r_b, ideal, opts);
    cert["conclusion"] = to_json(vb);
    return {vb.outcome, std::move(cert)};
}

/// I-cluster points on a grid: c is accepted when every scheduled eps has
/// its near set {n : |p(x_n,c)-p(c,c)| < eps} certified NOT in the ideal;
/// one eps whose near set IS in the ideal rejects c. When the complement of
/// the strict master set at r=0 (indices with deviation exactly 0) is
/// already certified outside the ideal, that single certificate covers every
/// eps at once.
inline LimitSetEstimate cluster_points(const PiecewiseSequence& seq, const Space& space,
                                       std::span<const double> grid, const Ideal& ideal,
                                       const DeciderOptions& opts = {}) {
    if (grid.empty()) throw std::invalid_argument("cluster_points needs a nonempty grid");
    LimitSetEstimate est;
    est.kind = LimitSetEstimate::Kind::ClusterSet;
    est.r = 0.0;
    est.epsilons = opts.schedule.epsilons;

    for (double cpt : grid) {
        if (!space.in_carrier(cpt))
            throw std::domain_error("cluster candidate outside the space carrier");
        json cert{{"c", cpt}, {"ideal", std::string(ideal.name())}};
        Outcome outcome = Outcome::Holds;
        double tightest_upper = 1.0;

        // all-eps shortcut: the indices with deviation exactly 0 sit inside
        // every near set
        const ThresholdSet core_ts = threshold_set(seq, space, cpt, 0.0, ThresholdMode::AtMost,
                                                   DeviationKind::CenteredAbs, opts.window);
        bool decided = false;
        if (core_ts.exact) {
            const Verdict cv = ideal.in_ideal(core_ts.descriptor);
            if (cv.is_fails()) {
                cert["route"] = "coreNearSet";
                cert["nearSet"] = core_ts.descriptor.to_json();
                cert["idealCertificate"] = cv.certificate;
                tightest_upper = core_ts.descriptor.density_bounds().upper.to_double();
                decided = true;
            }
        }
        if (!decided) {
            cert["route"] = "schedule";
            json per_eps = json::array();
            bool saw_inexact = false;
            for (double eps : opts.schedule.epsilons) {
                const ThresholdSet near_ts =
                    threshold_set(seq, space, cpt, eps, ThresholdMode::Below,
                                  DeviationKind::CenteredAbs, opts.window);
                if (!near_ts.exact) {
                    saw_inexact = true;
                    per_eps.push_back({{"epsilon", eps}, {"exact", false}});
                    continue;
                }
                const Verdict nv = ideal.in_ideal(near_ts.descriptor);
                per_eps.push_back({{"epsilon", eps},
                                   {"nearSet", near_ts.descriptor.to_json()},
                                   {"idealOutcome", std::string(to_string(nv.outcome))}});
                tightest_upper = near_ts.descriptor.density_bounds().upper.to_double();
                if (nv.is_holds()) { // near set negligible: not a cluster point
                    outcome = Outcome::Fails;
                    cert["rejectingEpsilon"] = eps;
                    break;
                }
                if (!nv.is_fails()) outcome = Outcome::Unknown;
            }
            if (outcome == Outcome::Holds && saw_inexact) outcome = Outcome::Unknown;
            cert["perEpsilon"] = per_eps;
        }
        est.entries.push_back({cpt, outcome, std::move(cert), tightest_upper});
    }
    return est;
}

/// Cluster-ball theorem: I-LIM^r x_n is contained in the closed ball of
/// radius r about any I-cluster point c (constant self-distance spaces).
inline Verdict check_cluster_ball(const PiecewiseSequence& seq, const Space& space, double c,
                                  const LimitSetEstimate& est, double r, const Ideal& ideal,
                                  const DeciderOptions& opts = {}) {
    const auto a = space.constant_self_distance();
    if (!a)
        throw std::invalid_argument(
            "cluster ball check requires a space with constant self-distance");
    const double cg[] = {c};
    const LimitSetEstimate cl = cluster_points(seq, space, cg, ideal, opts);
    if (cl.entries.front().outcome != Outcome::Holds)
        throw PreconditionError("c is not an accepted I-cluster point (got " +
                                std::string(to_string(cl.entries.front().outcome)) + ")");
    double tol = 0.0;
    if (const auto h = est.uniform_step())
        tol = space.eval_p(c, c + *h) - space.eval_p(c, c);
    const double pcc = space.eval_p(c, c);
    for (double w : est.accepted())
        if (space.eval_p(c, w) > pcc + r + tol)
            return Verdict::fails({{"witness", w},
                                   {"c", c},
                                   {"distance", space.eval_p(c, w)},
                                   {"bound", pcc + r + tol}});
    return Verdict::holds({{"c", c},
                           {"r", r},
                           {"tolerance", tol},
                           {"checkedAccepted", est.accepted().size()},
                           {"clusterCertificate", cl.entries.front().certificate}});
}

} // namespace roughlim
