#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "expr.hpp"
#include "index_set.hpp"
#include "space.hpp"
#include "verdict.hpp"

namespace roughlim {

enum class Monotone { Increasing, Decreasing };

inline std::string_view to_string(Monotone m) {
    return m == Monotone::Increasing ? "increasing" : "decreasing";
}

/// Raised when a sequence's pieces fail to partition N.
struct PartitionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// How a piece maps enumeration ranks k = 1, 2, ... to carrier values.
/// Indexed rules are restricted to four closed forms so that limits are
/// computable and threshold sets stay exact:
///   affine       a*k + b           (a >= 0)
///   reciprocal   a/(k+s) + b       (a != 0, integer shift s >= 0)
///   power        k^m               (m >= 1)
///   exponential  a^k               (a > 1)
/// Monotone direction and the limit are declared by the author and verified
/// against the closed form (within 1e-6) and against samples on k in
/// [1, 1000]; a lie is rejected at construction.
class PointRule {
public:
    struct Form {
        enum class Kind { Affine, Reciprocal, Power, Exponential } kind;
        double a = 0.0, b = 0.0;
        int m = 0;
        std::uint64_t shift = 0;
    };

    static PointRule constant(double value) {
        if (!std::isfinite(value)) throw std::invalid_argument("constant rule must be finite");
        PointRule r;
        r.constant_ = value;
        return r;
    }

    static PointRule indexed(Form form, Monotone declared, double declared_limit) {
        PointRule r;
        r.form_ = form;
        r.declared_dir_ = declared;
        r.declared_limit_ = declared_limit;
        r.validate();
        return r;
    }

    /// Convenience: derive the declarations from the closed form.
    static PointRule indexed(Form form) {
        PointRule r;
        r.form_ = form;
        r.declared_dir_ = derived_direction(form);
        r.declared_limit_ = derived_limit(form);
        r.validate();
        return r;
    }

    static Form affine(double a, double b) { return {Form::Kind::Affine, a, b, 0, 0}; }
    static Form reciprocal(double a, double b, std::uint64_t shift = 0) {
        return {Form::Kind::Reciprocal, a, b, 0, shift};
    }
    static Form power(int m) { return {Form::Kind::Power, 0, 0, m, 0}; }
    static Form exponential(double a) { return {Form::Kind::Exponential, a, 0, 0, 0}; }

    bool is_constant() const { return constant_.has_value(); }
    double constant_value() const { return *constant_; }
    Monotone direction() const { return declared_dir_; }

    double value_at(std::uint64_t k) const {
        if (constant_) return *constant_;
        const auto kd = static_cast<double>(k);
        switch (form_.kind) {
            case Form::Kind::Affine: return form_.a * kd + form_.b;
            case Form::Kind::Reciprocal:
                return form_.a / (kd + static_cast<double>(form_.shift)) + form_.b;
            case Form::Kind::Power: return std::pow(kd, form_.m);
            case Form::Kind::Exponential: return std::pow(form_.a, kd);
        }
        return 0.0;
    }

    /// Closed-form limit of the rule values as the rank grows; may be +inf.
    double limit() const { return constant_ ? *constant_ : derived_limit(form_); }

    json to_json() const {
        if (constant_) return {{"const", *constant_}};
        return {{"indexed", form_to_string(form_)},
                {"monotone", std::string(to_string(declared_dir_))},
                {"limit", std::isinf(declared_limit_) ? json("infinity") : json(declared_limit_)}};
    }

    static PointRule from_json(const json& j);

private:
    PointRule() = default;

    static double derived_limit(const Form& f) {
        switch (f.kind) {
            case Form::Kind::Affine:
                return f.a == 0.0 ? f.b : std::numeric_limits<double>::infinity();
            case Form::Kind::Reciprocal: return f.b;
            case Form::Kind::Power:
            case Form::Kind::Exponential: return std::numeric_limits<double>::infinity();
        }
        return 0.0;
    }

    static Monotone derived_direction(const Form& f) {
        switch (f.kind) {
            case Form::Kind::Affine: return Monotone::Increasing;
            case Form::Kind::Reciprocal:
                return f.a > 0 ? Monotone::Decreasing : Monotone::Increasing;
            case Form::Kind::Power:
            case Form::Kind::Exponential: return Monotone::Increasing;
        }
        return Monotone::Increasing;
    }

    void validate() const {
        switch (form_.kind) {
            case Form::Kind::Affine:
                if (form_.a < 0)
                    throw std::invalid_argument("affine rule needs slope >= 0 (limit must stay in [0, inf])");
                break;
            case Form::Kind::Reciprocal:
                if (form_.a == 0) throw std::invalid_argument("reciprocal rule needs a != 0");
                break;
            case Form::Kind::Power:
                if (form_.m < 1) throw std::invalid_argument("power rule needs exponent >= 1");
                break;
            case Form::Kind::Exponential:
                if (!(form_.a > 1)) throw std::invalid_argument("exponential rule needs base > 1");
                break;
        }
        const double truth = derived_limit(form_);
        if (!(std::isinf(truth) && std::isinf(declared_limit_)) &&
            !(std::abs(truth - declared_limit_) <= 1e-6))
            throw std::invalid_argument("declared limit " + std::to_string(declared_limit_) +
                                        " is inconsistent with the rule (limit " +
                                        std::to_string(truth) + ")");
        if (!std::isinf(declared_limit_) && declared_limit_ < 0)
            throw std::invalid_argument("declared limit must lie in [0, inf)");
        // sample-verify the declared direction on ranks 1..1000
        double prev = value_at(1);
        for (std::uint64_t k = 2; k <= 1000; ++k) {
            const double v = value_at(k);
            const bool ok = declared_dir_ == Monotone::Increasing ? v >= prev - 1e-12
                                                                  : v <= prev + 1e-12;
            if (!ok)
                throw std::invalid_argument("declared monotonicity (" +
                                            std::string(to_string(declared_dir_)) +
                                            ") violated at rank " + std::to_string(k));
            prev = v;
        }
    }

    static std::string form_to_string(const Form& f);

    std::optional<double> constant_;
    Form form_{};
    Monotone declared_dir_ = Monotone::Increasing;
    double declared_limit_ = 0.0;
};

namespace detail {

/// Classify a parsed rank expression into one of the supported rule forms.
/// Accepts sums of a constant part with at most one non-constant term.
inline PointRule::Form classify_rank_expr(const ExprPtr& root, const std::string& src) {
    using Op = Expr::Op;
    struct Acc {
        double constant = 0.0;
        std::optional<double> slope;             // a in a*k
        std::optional<std::pair<double, std::uint64_t>> recip; // a, shift in a/(k+s)
        std::optional<int> pow_m;                // k^m
        std::optional<double> exp_a;             // a^k
    } acc;

    auto fail = [&]() -> void {
        throw std::invalid_argument(
            "rule expression \"" + src +
            "\" is not one of the supported forms a*k+b, a/(k+s)+b, k^m, a^k");
    };

    auto const_of = [](const ExprPtr& e) -> std::optional<double> {
        if (!e) return std::nullopt;
        if (e->op == Op::Const) return e->value;
        if (e->op == Op::Neg && e->a && e->a->op == Op::Const) return -e->a->value;
        return std::nullopt;
    };
    auto is_k = [](const ExprPtr& e) { return e && e->op == Op::VarX; };

    // denominator shapes: k, c*k, k+s, (c*k)+s are reduced to (scale, shift)
    auto denom_of = [&](const ExprPtr& e) -> std::optional<std::pair<double, double>> {
        if (is_k(e)) return {{1.0, 0.0}};
        if (e->op == Op::Mul) {
            if (auto c = const_of(e->a); c && is_k(e->b)) return {{*c, 0.0}};
            if (auto c = const_of(e->b); c && is_k(e->a)) return {{*c, 0.0}};
        }
        if (e->op == Op::Add) {
            if (is_k(e->a))
                if (auto s = const_of(e->b)) return {{1.0, *s}};
            if (is_k(e->b))
                if (auto s = const_of(e->a)) return {{1.0, *s}};
        }
        return std::nullopt;
    };

    std::function<void(const ExprPtr&, double)> walk = [&](const ExprPtr& e, double sign) {
        if (e->op == Op::Add || e->op == Op::Sub) {
            walk(e->a, sign);
            walk(e->b, e->op == Op::Sub ? -sign : sign);
            return;
        }
        if (e->op == Op::Neg) { walk(e->a, -sign); return; }
        if (auto c = const_of(e)) { acc.constant += sign * *c; return; }
        if (is_k(e)) {
            if (acc.slope || acc.recip || acc.pow_m || acc.exp_a) fail();
            acc.slope = sign;
            return;
        }
        if (e->op == Op::Mul) {
            ExprPtr c, k;
            if (const_of(e->a) && is_k(e->b)) { c = e->a; k = e->b; }
            else if (const_of(e->b) && is_k(e->a)) { c = e->b; k = e->a; }
            else fail();
            if (acc.slope || acc.recip || acc.pow_m || acc.exp_a) fail();
            acc.slope = sign * *const_of(c);
            return;
        }
        if (e->op == Op::Div) {
            const auto num = const_of(e->a);
            const auto den = denom_of(e->b);
            if (!num || !den) fail();
            const auto [scale, shift] = *den;
            if (scale == 0.0 || shift < 0 || shift != std::floor(shift)) fail();
            if (shift != 0.0 && scale != 1.0) fail();
            if (acc.slope || acc.recip || acc.pow_m || acc.exp_a) fail();
            acc.recip = {sign * *num / scale, static_cast<std::uint64_t>(shift)};
            return;
        }
        if (e->op == Op::Pow) {
            if (acc.slope || acc.recip || acc.pow_m || acc.exp_a) fail();
            if (is_k(e->a)) {
                const auto m = const_of(e->b);
                if (!m || *m != std::floor(*m) || *m < 1) fail();
                if (sign != 1.0) fail();
                acc.pow_m = static_cast<int>(*m);
                return;
            }
            if (is_k(e->b)) {
                const auto a = const_of(e->a);
                if (!a) fail();
                if (sign != 1.0) fail();
                acc.exp_a = *a;
                return;
            }
            fail();
        }
        fail();
    };
    walk(root, 1.0);

    if (acc.pow_m) {
        if (acc.constant != 0.0) fail();
        return PointRule::power(*acc.pow_m);
    }
    if (acc.exp_a) {
        if (acc.constant != 0.0) fail();
        return PointRule::exponential(*acc.exp_a);
    }
    if (acc.recip) return PointRule::reciprocal(acc.recip->first, acc.constant, acc.recip->second);
    return PointRule::affine(acc.slope.value_or(0.0), acc.constant);
}

} // namespace detail

inline std::string PointRule::form_to_string(const Form& f) {
    auto num = [](double v) {
        json j = v;
        return j.dump();
    };
    switch (f.kind) {
        case Form::Kind::Affine:
            if (f.a == 0) return num(f.b);
            if (f.a == 1 && f.b == 0) return std::string("k");
            if (f.b == 0) return num(f.a) + "*k";
            return num(f.a) + "*k+" + num(f.b);
        case Form::Kind::Reciprocal: {
            std::string den = f.shift == 0 ? "k" : "(k+" + std::to_string(f.shift) + ")";
            std::string head = num(f.a) + "/" + den;
            return f.b == 0 ? head : head + "+" + num(f.b);
        }
        case Form::Kind::Power: return "k^" + std::to_string(f.m);
        case Form::Kind::Exponential: return num(f.a) + "^k";
    }
    return {};
}

inline PointRule PointRule::from_json(const json& j) {
    if (j.contains("const")) return constant(j.at("const").get<double>());
    if (!j.contains("indexed"))
        throw std::invalid_argument("rule must have \"const\" or \"indexed\"");
    const std::string src = j.at("indexed").get<std::string>();
    const Form form = detail::classify_rank_expr(parse_rank_expr(src), src);
    const std::string mono = j.at("monotone").get<std::string>();
    if (mono != "increasing" && mono != "decreasing")
        throw std::invalid_argument("rule monotone must be \"increasing\" or \"decreasing\"");
    double limit;
    const auto& lj = j.at("limit");
    if (lj.is_string()) {
        if (lj.get<std::string>() != "infinity")
            throw std::invalid_argument("rule limit must be a number or \"infinity\"");
        limit = std::numeric_limits<double>::infinity();
    } else {
        limit = lj.get<double>();
    }
    return indexed(form, mono == "increasing" ? Monotone::Increasing : Monotone::Decreasing,
                   limit);
}

/// A sequence over N given as finitely many (index set, rule) pieces. The
/// pieces must partition N; this is checked exhaustively on [1, window] at
/// construction. The value at n is the piece's rule evaluated at n's rank
/// within the piece.
class PiecewiseSequence {
public:
    struct Piece {
        SetDescriptor set;
        PointRule rule;
    };

    explicit PiecewiseSequence(std::vector<Piece> pieces, std::uint64_t check_window = 10'000)
        : pieces_(std::move(pieces)) {
        if (pieces_.empty()) throw PartitionError("a sequence needs at least one piece");
        for (std::uint64_t n = 1; n <= check_window; ++n) {
            int claims = 0;
            for (const auto& p : pieces_)
                if (p.set.contains(n)) ++claims;
            if (claims != 1)
                throw PartitionError("pieces do not partition N: index " + std::to_string(n) +
                                     " claimed by " + std::to_string(claims) + " pieces");
        }
    }

    const std::vector<Piece>& pieces() const { return pieces_; }

    double at(std::uint64_t n) const {
        for (const auto& p : pieces_)
            if (p.set.contains(n)) {
                if (p.rule.is_constant()) return p.rule.constant_value();
                return p.rule.value_at(p.set.count_up_to(n, std::numeric_limits<std::uint64_t>::max()));
            }
        // unreachable for a verified partition inside the window; trust the
        // structure beyond it but fail loudly if it breaks
        throw PartitionError("no piece contains index " + std::to_string(n));
    }

    std::vector<double> sample(std::uint64_t N, std::uint64_t cap = kDefaultWindowCap) const {
        if (N > cap)
            throw WindowCapError("sample window " + std::to_string(N) + " exceeds cap " +
                                 std::to_string(cap));
        std::vector<double> out;
        out.reserve(N);
        for (std::uint64_t n = 1; n <= N; ++n) out.push_back(at(n));
        return out;
    }

    json to_json() const {
        json arr = json::array();
        for (const auto& p : pieces_)
            arr.push_back({{"set", p.set.to_json()}, {"rule", p.rule.to_json()}});
        return {{"pieces", arr}};
    }

    static PiecewiseSequence from_json(const json& j, std::uint64_t check_window = 10'000) {
        if (!j.contains("pieces") || !j.at("pieces").is_array())
            throw std::invalid_argument("sequence must have a \"pieces\" array");
        std::vector<Piece> pieces;
        for (const auto& pj : j.at("pieces"))
            pieces.push_back({SetDescriptor::from_json(pj.at("set")),
                              PointRule::from_json(pj.at("rule"))});
        return PiecewiseSequence(std::move(pieces), check_window);
    }

private:
    std::vector<Piece> pieces_;
};

/// Which scalar is thresholded per index.
enum class DeviationKind {
    CenteredAbs, // |p(x_n, x) - p(x, x)|, the convergence deviation
    RawDistance  // p(x_n, x), used by ideal-boundedness
};

/// Comparison defining the qualifying set {n : deviation(n) <mode> t}.
enum class ThresholdMode { AtLeast, Above, Below, AtMost };

inline bool threshold_met(ThresholdMode mode, double g, double t) {
    switch (mode) {
        case ThresholdMode::AtLeast: return g >= t;
        case ThresholdMode::Above: return g > t;
        case ThresholdMode::Below: return g < t;
        case ThresholdMode::AtMost: return g <= t;
    }
    return false;
}

inline bool threshold_up_closed(ThresholdMode mode) {
    return mode == ThresholdMode::AtLeast || mode == ThresholdMode::Above;
}

struct ThresholdSet {
    SetDescriptor descriptor = SetDescriptor::empty();
    bool exact = true;
    json notes = json::array(); // per-piece decisions, for certificates
};

namespace detail {

struct DeviationFn {
    const Space& space;
    double center;
    DeviationKind kind;

    double operator()(double v) const {
        const double d = space.eval_p(v, center);
        return kind == DeviationKind::CenteredAbs
                   ? std::abs(d - space.eval_p(center, center))
                   : d;
    }

    double at_rank(const PointRule& rule, std::uint64_t k) const {
        return (*this)(rule.value_at(k));
    }

    /// Deviation limit induced by a rule-value limit, when computable.
    std::optional<double> at_limit(double value_limit) const {
        if (std::isinf(value_limit)) {
            const auto l = space.limit_p_first_to_infinity(center);
            if (!l) return std::nullopt;
            return *l; // infinite distance dominates any centering
        }
        if (!space.in_carrier(value_limit)) return std::nullopt;
        return (*this)(value_limit);
    }
};

/// Rank searches on a segment where the deviation is monotone. Predicates
/// are monotone along the segment, so bracketing + bisection is exact.
struct RankSearch {
    const DeviationFn& dev;
    const PointRule& rule;
    std::uint64_t rank_cap;

    template <class Pred>
    std::optional<std::uint64_t> first_true_unbounded(std::uint64_t klo, Pred pred) const {
        std::uint64_t hi = klo;
        while (hi <= rank_cap && !pred(dev.at_rank(rule, hi))) {
            if (hi > rank_cap / 2) return std::nullopt;
            hi *= 2;
        }
        if (hi > rank_cap) return std::nullopt;
        std::uint64_t lo = std::max(klo, hi / 2 + 1);
        while (lo < hi) {
            const std::uint64_t mid = lo + (hi - lo) / 2;
            if (pred(dev.at_rank(rule, mid))) hi = mid;
            else lo = mid + 1;
        }
        return lo;
    }

    template <class Pred>
    std::uint64_t first_true_bounded(std::uint64_t klo, std::uint64_t khi, Pred pred) const {
        std::uint64_t lo = klo, hi = khi;
        while (lo < hi) {
            const std::uint64_t mid = lo + (hi - lo) / 2;
            if (pred(dev.at_rank(rule, mid))) hi = mid;
            else lo = mid + 1;
        }
        return lo; // caller checks pred held somewhere
    }
};

} // namespace detail

/// {n in N : deviation(n) <mode> t}, as a descriptor. Constant pieces
/// contribute all-or-nothing from a single evaluation. Indexed pieces are
/// resolved by exact threshold search over the rank: for the built-in spaces
/// the composed deviation k -> dev(rule(k)) is monotone, or (ShiftedMetric,
/// when the rule values cross the center) V-shaped with a computable
/// crossing rank, so the qualifying ranks form a prefix, a tail, or a
/// prefix-plus-tail. Custom spaces give no shape guarantee and fall back to
/// a window enumeration with exactness=false; so do below-threshold queries
/// on V-shaped pieces.
inline ThresholdSet threshold_set(const PiecewiseSequence& seq, const Space& space, double center,
                                  double t, ThresholdMode mode, DeviationKind kind,
                                  std::uint64_t window = 10'000,
                                  std::uint64_t rank_cap = 1'000'000'000,
                                  std::uint64_t materialize_cap = 2'000'000) {
    const detail::DeviationFn dev{space, center, kind};
    const bool up_closed = threshold_up_closed(mode);
    const auto meets = [&](double g) { return threshold_met(mode, g, t); };
    const auto misses = [&](double g) { return !meets(g); };

    ThresholdSet out;
    SetDescriptor acc = SetDescriptor::empty();

    auto fallback_piece = [&](const PiecewiseSequence::Piece& piece, json& note) {
        // window enumeration; exactness is lost, not faked
        std::vector<std::uint64_t> hits;
        for (std::uint64_t n = 1; n <= window; ++n)
            if (piece.set.contains(n) && meets(dev(seq.at(n)))) hits.push_back(n);
        note["resolution"] = "windowEnumeration";
        note["window"] = window;
        out.exact = false;
        return SetDescriptor::finite(std::move(hits));
    };

    // materialize piece elements at ranks [klo, khi] as a Finite descriptor
    auto rank_range_of = [&](const PiecewiseSequence::Piece& piece, std::uint64_t klo,
                             std::uint64_t khi, json& note) -> std::optional<SetDescriptor> {
        if (khi < klo) return SetDescriptor::empty();
        if (khi > materialize_cap) return std::nullopt;
        auto elems = piece.set.first_elements(khi, std::max(window, materialize_cap));
        if (!elems || elems->size() != khi) return std::nullopt;
        note["ranks"] = {klo, khi};
        return SetDescriptor::finite(std::vector<std::uint64_t>(
            elems->begin() + static_cast<std::ptrdiff_t>(klo - 1), elems->end()));
    };

    for (const auto& piece : seq.pieces()) {
        json note{{"set", piece.set.to_json()}};
        SetDescriptor contrib = SetDescriptor::empty();

        if (piece.rule.is_constant()) {
            const double g = dev(piece.rule.constant_value());
            note["resolution"] = "constant";
            note["deviation"] = g;
            contrib = meets(g) ? piece.set : SetDescriptor::empty();
        } else if (!space.is_builtin()) {
            contrib = fallback_piece(piece, note);
        } else {
            const detail::RankSearch search{dev, piece.rule, rank_cap};
            const double g1 = dev.at_rank(piece.rule, 1);
            const double glimit = *dev.at_limit(piece.rule.limit()); // built-ins always compute
            const double v1 = piece.rule.value_at(1);
            const double vlimit = piece.rule.limit();

            // ShiftedMetric deviations are |v - center| (+ shift); a rule whose
            // values strictly cross the center makes them fall then rise
            const bool v_shaped = space.kind() == Space::Kind::ShiftedMetric &&
                                  ((v1 < center && vlimit > center) ||
                                   (v1 > center && vlimit < center));

            // resolve a segment of ranks [klo, inf) with monotone deviation.
            // The qualifying region is a suffix when the deviation moves
            // toward the threshold region (rising into an up-closed one or
            // falling into a down-closed one) and a prefix when it moves out.
            // The nonconstant rule forms are strictly monotone and never
            // attain their limits, which settles the boundary cases below.
            auto resolve_monotone = [&](std::uint64_t klo, double seg_g_first,
                                        double seg_g_limit,
                                        json& nt) -> std::optional<SetDescriptor> {
                const bool rising = seg_g_limit >= seg_g_first;
                const bool suffix = rising == up_closed;
                const bool limit_side =
                    up_closed ? seg_g_limit >= t : seg_g_limit <= t; // region at the limit
                if (suffix) {
                    nt["shape"] = "suffix";
                    if (meets(seg_g_first)) return SetDescriptor::tail(piece.set, klo);
                    if (!limit_side) return SetDescriptor::empty();
                    const auto k = search.first_true_unbounded(klo, meets);
                    if (!k) {
                        // approaches a threshold it never attains
                        if (seg_g_limit == t) return SetDescriptor::empty();
                        return std::nullopt;
                    }
                    nt["fromRank"] = *k;
                    return SetDescriptor::tail(piece.set, *k);
                }
                nt["shape"] = "prefix";
                if (!meets(seg_g_first)) return SetDescriptor::empty();
                if (limit_side) return SetDescriptor::tail(piece.set, klo); // never leaves
                const auto k = search.first_true_unbounded(klo, misses);
                if (!k) return std::nullopt;
                nt["untilRank"] = *k - 1;
                return rank_range_of(piece, klo, *k - 1, nt);
            };

            if (!v_shaped) {
                auto c = resolve_monotone(1, g1, glimit, note);
                note["resolution"] = "thresholdSearch";
                contrib = c ? *c : fallback_piece(piece, note);
            } else if (!up_closed) {
                // below-threshold region of a V is a middle interval; rare in
                // practice, resolved by enumeration
                contrib = fallback_piece(piece, note);
            } else {
                note["resolution"] = "thresholdSearchTwoSegment";
                // last rank on the starting side of the center: v is strictly
                // monotone, so bisect the sign change of v - center
                const bool start_below = v1 < center;
                const auto crossed = [&](std::uint64_t k) {
                    const double v = piece.rule.value_at(k);
                    return start_below ? v > center : v < center;
                };
                std::uint64_t hi = 1;
                bool found = false;
                while (hi <= rank_cap) {
                    if (crossed(hi)) { found = true; break; }
                    if (hi > rank_cap / 2) break;
                    hi *= 2;
                }
                if (!found) {
                    contrib = fallback_piece(piece, note); // crossing past the cap
                } else {
                    std::uint64_t lo = std::max<std::uint64_t>(1, hi / 2 + 1), h2 = hi;
                    while (lo < h2) {
                        const std::uint64_t mid = lo + (h2 - lo) / 2;
                        if (crossed(mid)) h2 = mid;
                        else lo = mid + 1;
                    }
                    const std::uint64_t k_cross = lo; // first rank past the center
                    note["crossRank"] = k_cross;
                    json n1 = json::object(), n2 = json::object();
                    // before the crossing the deviation falls toward its minimum
                    const double g_pre_end =
                        dev.at_rank(piece.rule, k_cross - 1 >= 1 ? k_cross - 1 : 1);
                    std::optional<SetDescriptor> part1;
                    if (k_cross == 1 || !meets(g1)) {
                        part1 = SetDescriptor::empty();
                    } else if (meets(g_pre_end)) {
                        part1 = rank_range_of(piece, 1, k_cross - 1, n1);
                    } else {
                        const std::uint64_t kq =
                            search.first_true_bounded(1, k_cross - 1, misses);
                        part1 = rank_range_of(piece, 1, kq - 1, n1);
                    }
                    // after the crossing it rises from the minimum toward glimit
                    const double g_post = dev.at_rank(piece.rule, k_cross);
                    std::optional<SetDescriptor> part2 =
                        resolve_monotone(k_cross, g_post, std::max(glimit, g_post), n2);
                    if (part1 && part2) {
                        note["preCrossing"] = n1;
                        note["postCrossing"] = n2;
                        contrib = SetDescriptor::union_of(*part1, *part2);
                    } else {
                        contrib = fallback_piece(piece, note);
                    }
                }
            }
        }
        note["contribution"] = contrib.to_json();
        out.notes.push_back(std::move(note));
        acc = SetDescriptor::union_of(acc, contrib);
    }
    out.descriptor = acc;
    return out;
}

inline ThresholdSet threshold_set(const PiecewiseSequence& seq, const Space& space, double center,
                                  double t, bool strict, DeviationKind kind,
                                  std::uint64_t window = 10'000) {
    return threshold_set(seq, space, center, t,
                         strict ? ThresholdMode::Above : ThresholdMode::AtLeast, kind, window);
}

/// The condition set {n : |p(x_n,x) - p(x,x)| >= t} (or > t when strict).
inline ThresholdSet condition_set(const PiecewiseSequence& seq, const Space& space, double x,
                                  double t, bool strict = false, std::uint64_t window = 10'000) {
    if (t < 0) throw std::invalid_argument("condition_set threshold must be nonnegative");
    return threshold_set(seq, space, x, t, strict, DeviationKind::CenteredAbs, window);
}

} // namespace roughlim
