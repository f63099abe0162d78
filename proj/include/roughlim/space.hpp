#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "expr.hpp"
#include "verdict.hpp"

namespace roughlim {

enum class Carrier { Reals, NonnegReals };

inline std::string_view to_string(Carrier c) {
    return c == Carrier::Reals ? "reals" : "nonneg";
}

class Space;

/// A validated carrier element. Construct through Space::point so the
/// finiteness and carrier invariants hold by construction.
class Point {
public:
    double value() const { return value_; }

private:
    friend class Space;
    explicit Point(double v) : value_(v) {}
    double value_;
};

/// A partial metric space: a distance p permitting nonzero self-distance,
/// subject to axioms p1-p4. Built-ins:
///   PowMax(a):        p(x,y) = a^max{x,y} on the nonnegative reals, a > 1
///   ShiftedMetric(a): p(x,y) = |x-y| + a on the reals, a >= 0 (constant
///                     self-distance a)
///   MaxOnNonnegReals: p(x,y) = max{x,y} on the nonnegative reals
/// Custom spaces evaluate a user expression; their axioms are only ever
/// sample-checked, never assumed.
class Space {
public:
    enum class Kind { PowMax, ShiftedMetric, MaxOnNonnegReals, Custom };

    static Space pow_max(double a) {
        if (!(a > 1.0)) throw std::invalid_argument("pow_max requires a > 1");
        Space s(Kind::PowMax, Carrier::NonnegReals);
        s.a_ = a;
        return s;
    }

    static Space shifted_metric(double a) {
        if (!(a >= 0.0)) throw std::invalid_argument("shifted_metric requires a >= 0");
        Space s(Kind::ShiftedMetric, Carrier::Reals);
        s.a_ = a;
        s.constant_self_distance_ = a;
        return s;
    }

    static Space max_on_nonneg() { return Space(Kind::MaxOnNonnegReals, Carrier::NonnegReals); }

    static Space custom(ExprPtr p, Carrier carrier, std::string source = {}) {
        if (!p) throw std::invalid_argument("custom space requires an expression");
        Space s(Kind::Custom, carrier);
        s.expr_ = std::move(p);
        s.source_ = std::move(source);
        return s;
    }

    static Space custom(std::string_view expression, Carrier carrier) {
        return custom(parse_space_expr(expression), carrier, std::string(expression));
    }

    Kind kind() const { return kind_; }
    Carrier carrier() const { return carrier_; }
    double parameter() const { return a_; }
    const std::string& source() const { return source_; }

    /// Present iff p(x,x) is the same value for every carrier point.
    std::optional<double> constant_self_distance() const { return constant_self_distance_; }

    bool in_carrier(double v) const {
        if (!std::isfinite(v)) return false;
        return carrier_ == Carrier::Reals || v >= 0.0;
    }

    Point point(double v) const {
        if (!in_carrier(v))
            throw std::domain_error("value " + std::to_string(v) + " outside the space carrier");
        return Point(v);
    }

    std::optional<Point> try_point(double v) const {
        if (!in_carrier(v)) return std::nullopt;
        return Point(v);
    }

    /// p(x,y). Throws std::domain_error on a carrier violation.
    double eval_p(double x, double y) const {
        if (!in_carrier(x) || !in_carrier(y))
            throw std::domain_error("eval_p: point outside the space carrier");
        return eval_unchecked(x, y);
    }
    double eval_p(Point x, Point y) const { return eval_unchecked(x.value(), y.value()); }

    double self_distance(double x) const { return eval_p(x, x); }

    /// Distance at infinity in the first argument, if the space's p(v, y)
    /// has a limit as v -> +inf (all built-ins diverge). nullopt for custom.
    std::optional<double> limit_p_first_to_infinity(double /*y*/) const {
        switch (kind_) {
            case Kind::PowMax:
            case Kind::ShiftedMetric:
            case Kind::MaxOnNonnegReals:
                return std::numeric_limits<double>::infinity();
            case Kind::Custom:
                return std::nullopt;
        }
        return std::nullopt;
    }

    bool is_builtin() const { return kind_ != Kind::Custom; }

private:
    Space(Kind k, Carrier c) : kind_(k), carrier_(c) {}

    double eval_unchecked(double x, double y) const {
        switch (kind_) {
            case Kind::PowMax: return std::pow(a_, std::max(x, y));
            case Kind::ShiftedMetric: return std::abs(x - y) + a_;
            case Kind::MaxOnNonnegReals: return std::max(x, y);
            case Kind::Custom: return eval(*expr_, x, y);
        }
        return 0.0;
    }

    Kind kind_;
    Carrier carrier_;
    double a_ = 0.0;
    std::optional<double> constant_self_distance_;
    ExprPtr expr_;
    std::string source_;
};

/// p(center,y) <= p(center,center) + r
inline bool in_closed_ball(const Space& space, double center, double r, double y) {
    if (r < 0) throw std::invalid_argument("ball radius must be nonnegative");
    return space.eval_p(center, y) <= space.eval_p(center, center) + r;
}

/// p(center,y) < p(center,center) + r
inline bool in_open_ball(const Space& space, double center, double r, double y) {
    if (r < 0) throw std::invalid_argument("ball radius must be nonnegative");
    return space.eval_p(center, y) < space.eval_p(center, center) + r;
}

/// sup{p(x,y) : x,y in pts}; pairs include x = y, so a singleton's diameter
/// is its self-distance. Empty set yields 0 by convention.
inline double diam(const Space& space, std::span<const double> pts) {
    double best = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i; j < pts.size(); ++j)
            best = std::max(best, space.eval_p(pts[i], pts[j]));
    return best;
}

/// Check axioms p1-p4 on every pair/triple drawn from the sample, within tol.
/// p2's "indistancy implies equality" is read numerically: if the three
/// distances agree within tol, the points must agree within tol.
inline Verdict check_axioms(const Space& space, std::span<const double> sample, double tol = 1e-9) {
    if (tol < 0) throw std::invalid_argument("check_axioms: tol must be nonnegative");
    for (double v : sample)
        if (!space.in_carrier(v))
            throw std::domain_error("check_axioms: sample point outside the space carrier");

    auto fail = [&](const char* axiom, json witness, json values) {
        witness["axiom"] = axiom;
        witness["values"] = std::move(values);
        return Verdict::fails(std::move(witness));
    };

    for (double x : sample) {
        for (double y : sample) {
            const double pxy = space.eval_p(x, y);
            const double pxx = space.eval_p(x, x);
            const double pyy = space.eval_p(y, y);
            if (pxx < -tol || pxx > pxy + tol)
                return fail("p1", {{"x", x}, {"y", y}}, {{"p_xx", pxx}, {"p_xy", pxy}});
            if (std::abs(pxy - space.eval_p(y, x)) > tol)
                return fail("p3", {{"x", x}, {"y", y}},
                            {{"p_xy", pxy}, {"p_yx", space.eval_p(y, x)}});
            if (std::abs(pxx - pxy) <= tol && std::abs(pyy - pxy) <= tol &&
                std::abs(x - y) > tol)
                return fail("p2", {{"x", x}, {"y", y}},
                            {{"p_xx", pxx}, {"p_xy", pxy}, {"p_yy", pyy}});
        }
    }
    for (double x : sample)
        for (double y : sample)
            for (double z : sample) {
                const double lhs = space.eval_p(x, y);
                const double rhs = space.eval_p(x, z) + space.eval_p(z, y) - space.eval_p(z, z);
                if (lhs > rhs + tol)
                    return fail("p4", {{"x", x}, {"y", y}, {"z", z}},
                                {{"p_xy", lhs}, {"bound", rhs}});
            }

    const auto n = sample.size();
    return Verdict::holds(json{{"axioms", {"p1", "p2", "p3", "p4"}},
                               {"sampleSize", n},
                               {"pairs", n * n},
                               {"triples", n * n * n},
                               {"tol", tol}});
}

inline json to_json(const Space& space) {
    switch (space.kind()) {
        case Space::Kind::PowMax: return {{"kind", "powmax"}, {"a", space.parameter()}};
        case Space::Kind::ShiftedMetric: return {{"kind", "shifted"}, {"a", space.parameter()}};
        case Space::Kind::MaxOnNonnegReals: return {{"kind", "maxnonneg"}};
        case Space::Kind::Custom:
            return {{"kind", "custom"},
                    {"p", space.source()},
                    {"carrier", std::string(to_string(space.carrier()))}};
    }
    return {};
}

inline Space space_from_json(const json& j) {
    if (!j.is_object() || !j.contains("kind"))
        throw std::invalid_argument("space spec must be an object with a \"kind\" field");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "powmax") return Space::pow_max(j.at("a").get<double>());
    if (kind == "shifted") return Space::shifted_metric(j.at("a").get<double>());
    if (kind == "maxnonneg") return Space::max_on_nonneg();
    if (kind == "custom") {
        const std::string carrier = j.value("carrier", "reals");
        if (carrier != "reals" && carrier != "nonneg")
            throw std::invalid_argument("space carrier must be \"reals\" or \"nonneg\"");
        return Space::custom(j.at("p").get<std::string>(),
                             carrier == "reals" ? Carrier::Reals : Carrier::NonnegReals);
    }
    throw std::invalid_argument("unknown space kind \"" + kind + "\"");
}

} // namespace roughlim
