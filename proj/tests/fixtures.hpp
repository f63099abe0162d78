#pragma once

// Shared fixture builders and independent oracles for the test suites.

#include <cstdint>
#include <vector>

#include "roughlim/roughlim.hpp"

namespace fixtures {

using namespace roughlim;

/// The square-supported sequence: value k on n = k^2, 0 elsewhere.
inline PiecewiseSequence square_supported() {
    return PiecewiseSequence({
        {SetDescriptor::power_image(2), PointRule::indexed(PointRule::affine(1, 0))},
        {SetDescriptor::complement(SetDescriptor::power_image(2)), PointRule::constant(0.0)},
    });
}

/// Alternating v_odd, v_even over odd/even indices.
inline PiecewiseSequence alternating(double v_odd, double v_even) {
    return PiecewiseSequence({
        {SetDescriptor::ap(1, 2), PointRule::constant(v_odd)},
        {SetDescriptor::ap(2, 2), PointRule::constant(v_even)},
    });
}

inline PiecewiseSequence constant_seq(double v) {
    return PiecewiseSequence({{SetDescriptor::naturals(), PointRule::constant(v)}});
}

/// x_n = a/(n+shift) + b on all of N.
inline PiecewiseSequence reciprocal_seq(double a, double b, std::uint64_t shift = 0) {
    return PiecewiseSequence(
        {{SetDescriptor::ap(1, 1), PointRule::indexed(PointRule::reciprocal(a, b, shift))}});
}

/// Three constants cycling with period 3.
inline PiecewiseSequence three_cycle(double v1, double v2, double v3) {
    return PiecewiseSequence({
        {SetDescriptor::ap(1, 3), PointRule::constant(v1)},
        {SetDescriptor::ap(2, 3), PointRule::constant(v2)},
        {SetDescriptor::ap(3, 3), PointRule::constant(v3)},
    });
}

/// x_n = n (unbounded): rank k on AP(1,1) is k.
inline PiecewiseSequence unbounded_seq() {
    return PiecewiseSequence(
        {{SetDescriptor::ap(1, 1), PointRule::indexed(PointRule::affine(1, 0))}});
}

/// Uniform grid helper (unfiltered; tests use carriers that admit it).
inline std::vector<double> grid(double lo, double hi, double step) {
    std::vector<double> g;
    for (double v = lo; v <= hi + step * 1e-9; v += step) g.push_back(v);
    return g;
}

/// Brute-force membership enumeration oracle for counting.
inline std::uint64_t brute_count(const SetDescriptor& s, std::uint64_t N) {
    std::uint64_t c = 0;
    for (std::uint64_t n = 1; n <= N; ++n)
        if (s.contains(n)) ++c;
    return c;
}

/// A corpus of descriptors exercising every node type.
inline std::vector<SetDescriptor> descriptor_corpus() {
    using SD = SetDescriptor;
    const auto sq = SD::power_image(2);
    return {
        SD::empty(),
        SD::naturals(),
        SD::finite({1, 2, 3}),
        SD::finite({3, 5, 1000}),
        SD::ap(1, 2),
        SD::ap(2, 2),
        SD::ap(1, 3),
        SD::ap(5, 4),
        sq,
        SD::power_image(3),
        SD::tail(sq, 2),
        SD::tail(SD::ap(1, 2), 10),
        SD::complement(sq),
        SD::complement(SD::finite({1, 2})),
        SD::union_of(sq, SD::ap(1, 2)),
        SD::intersection(sq, SD::ap(2, 2)),
        SD::union_of(SD::finite({1, 2}), SD::finite({2, 3})),
        SD::intersection(SD::ap(1, 2), SD::ap(1, 3)),
        SD::tail(SD::union_of(sq, SD::ap(1, 5)), 3),
        SD::complement(SD::ap(1, 2)),
    };
}

/// Window heuristic oracle for "A(eps) plausibly in the ideal", used to
/// cross-check symbolic verdicts. Enumerates deviations on [1, N].
struct BruteForceConvergenceOracle {
    const PiecewiseSequence& seq;
    const Space& space;
    const Ideal& ideal;
    std::uint64_t N = 100'000;

    // true when A(eps) restricted to the window clearly escapes the ideal
    bool epsilon_clearly_escapes(double x, double threshold) const {
        const double pxx = space.eval_p(x, x);
        std::uint64_t count = 0, late = 0;
        for (std::uint64_t n = 1; n <= N; ++n) {
            if (std::abs(space.eval_p(seq.at(n), x) - pxx) >= threshold) {
                ++count;
                if (n > N - N / 10) ++late;
            }
        }
        if (ideal.kind() == Ideal::Kind::Fin) return late > 0;
        return static_cast<double>(count) / static_cast<double>(N) >= 0.05;
    }

    // true when A(eps) on the window looks comfortably inside the ideal
    bool epsilon_clearly_member(double x, double threshold) const {
        const double pxx = space.eval_p(x, x);
        std::uint64_t count = 0, late = 0;
        for (std::uint64_t n = 1; n <= N; ++n) {
            if (std::abs(space.eval_p(seq.at(n), x) - pxx) >= threshold) {
                ++count;
                if (n > N - N / 10) ++late;
            }
        }
        if (ideal.kind() == Ideal::Kind::Fin) return late == 0;
        return static_cast<double>(count) / static_cast<double>(N) <= 0.005;
    }

    /// Contradiction check: a symbolic Holds must not coexist with a clear
    /// escape at any scheduled epsilon; a symbolic Fails must not coexist
    /// with every scheduled epsilon looking like a member. Epsilons below
    /// 1e-2 are skipped: the window cannot tell a slowly-thinning finite
    /// violation set from an infinite one there.
    bool contradicts(Outcome symbolic, double x, double r,
                     const std::vector<double>& epsilons) const {
        std::vector<double> informative;
        for (double e : epsilons)
            if (e >= 1e-2) informative.push_back(e);
        if (symbolic == Outcome::Holds) {
            for (double e : informative)
                if (epsilon_clearly_escapes(x, r + e)) return true;
            return false;
        }
        if (symbolic == Outcome::Fails) {
            for (double e : informative)
                if (!epsilon_clearly_member(x, r + e)) return false;
            return true;
        }
        return false;
    }
};

} // namespace fixtures
