#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "rational.hpp"
#include "verdict.hpp"

namespace roughlim {

/// Default cap on window enumeration; callers may pass a different cap.
inline constexpr std::uint64_t kDefaultWindowCap = 10'000'000;

struct DensityBounds {
    Rational lower;  // certified <= liminf |s & [1,N]| / N
    Rational upper;  // certified >= limsup |s & [1,N]| / N
    bool exact = false; // lower == upper and derived from closed form

    json to_json() const {
        return {{"lower", to_string(lower)},
                {"upper", to_string(upper)},
                {"lowerValue", lower.to_double()},
                {"upperValue", upper.to_double()},
                {"exact", exact}};
    }
};

/// Symbolic subset of N = {1, 2, 3, ...}. Immutable tree; every query is
/// pure. Membership is O(log n) per node (Finite by search, AP by
/// congruence, PowerImage by integer root, Tail by rank query), so boolean
/// combinations stay cheap to evaluate pointwise.
class SetDescriptor {
public:
    enum class Kind { Empty, Finite, AP, PowerImage, Tail, Complement, Union, Intersection };

    static SetDescriptor empty() { return SetDescriptor(std::make_shared<Node>(Kind::Empty)); }

    static SetDescriptor finite(std::vector<std::uint64_t> elems) {
        std::sort(elems.begin(), elems.end());
        elems.erase(std::unique(elems.begin(), elems.end()), elems.end());
        if (!elems.empty() && elems.front() == 0)
            throw std::invalid_argument("finite set elements must be >= 1");
        if (elems.empty()) return empty();
        auto n = std::make_shared<Node>(Kind::Finite);
        n->elems = std::move(elems);
        return SetDescriptor(std::move(n));
    }

    /// {first, first+step, first+2*step, ...}
    static SetDescriptor ap(std::uint64_t first, std::uint64_t step) {
        if (first < 1 || step < 1) throw std::invalid_argument("ap requires first >= 1, step >= 1");
        auto n = std::make_shared<Node>(Kind::AP);
        n->first = first;
        n->step = step;
        return SetDescriptor(std::move(n));
    }

    /// {k^m : k >= 1}
    static SetDescriptor power_image(int m) {
        if (m < 2) throw std::invalid_argument("power_image requires exponent >= 2");
        auto n = std::make_shared<Node>(Kind::PowerImage);
        n->exponent = m;
        return SetDescriptor(std::move(n));
    }

    /// The base set with its first from_rank-1 elements removed.
    static SetDescriptor tail(SetDescriptor base, std::uint64_t from_rank) {
        if (from_rank < 1) throw std::invalid_argument("tail requires from_rank >= 1");
        if (from_rank == 1) return base;
        auto n = std::make_shared<Node>(Kind::Tail);
        n->a = base.node_;
        n->from_rank = from_rank;
        return SetDescriptor(std::move(n));
    }

    static SetDescriptor complement(SetDescriptor s) {
        if (s.kind() == Kind::Complement) return SetDescriptor(s.node_->a); // involution
        auto n = std::make_shared<Node>(Kind::Complement);
        n->a = s.node_;
        return SetDescriptor(std::move(n));
    }

    static SetDescriptor union_of(SetDescriptor a, SetDescriptor b) {
        if (a.kind() == Kind::Empty) return b;
        if (b.kind() == Kind::Empty) return a;
        auto n = std::make_shared<Node>(Kind::Union);
        n->a = a.node_;
        n->b = b.node_;
        return SetDescriptor(std::move(n));
    }

    static SetDescriptor intersection(SetDescriptor a, SetDescriptor b) {
        if (a.kind() == Kind::Empty || b.kind() == Kind::Empty) return empty();
        auto n = std::make_shared<Node>(Kind::Intersection);
        n->a = a.node_;
        n->b = b.node_;
        return SetDescriptor(std::move(n));
    }

    static SetDescriptor naturals() { return complement(empty()); }

    Kind kind() const { return node_->kind; }

    bool contains(std::uint64_t n) const {
        if (n < 1) throw std::invalid_argument("membership queries start at n = 1");
        return contains_node(*node_, n);
    }

    /// |{n <= N : n in s}|, exact. Closed forms where the node admits one;
    /// boolean combinations enumerate, so N is capped.
    std::uint64_t count_up_to(std::uint64_t N, std::uint64_t cap = kDefaultWindowCap) const {
        if (N > cap)
            throw WindowCapError("count_up_to window " + std::to_string(N) +
                                 " exceeds cap " + std::to_string(cap));
        return count_node(*node_, N);
    }

    /// Certified density bounds from the structural interval calculus.
    DensityBounds density_bounds() const { return bounds_node(*node_); }

    /// Structural finiteness prover; deliberately conservative. Holds means
    /// provably finite, Fails means the set provably contains an infinite
    /// structural subset, anything else is Unknown.
    Verdict prove_finite() const;

    /// Value of the k-th smallest element (1-based), if it exists and can be
    /// located without scanning past `cap`. Closed forms for Finite/AP/
    /// PowerImage; combinations binary-search the counting function.
    std::optional<std::uint64_t> nth_element(std::uint64_t k,
                                             std::uint64_t cap = kDefaultWindowCap) const {
        if (k < 1) throw std::invalid_argument("nth_element ranks start at 1");
        return nth_node(*node_, k, cap);
    }

    /// First k elements in increasing order, or nullopt if the scan would
    /// pass `cap` before finding them.
    std::optional<std::vector<std::uint64_t>> first_elements(
        std::uint64_t k, std::uint64_t cap = kDefaultWindowCap) const;

    json to_json() const { return json_node(*node_); }
    static SetDescriptor from_json(const json& j);

    /// Structural equality (same tree after normalization).
    friend bool operator==(const SetDescriptor& a, const SetDescriptor& b) {
        return a.to_json() == b.to_json();
    }

private:
    struct Node {
        explicit Node(Kind k) : kind(k) {}
        Kind kind;
        std::vector<std::uint64_t> elems;       // Finite
        std::uint64_t first = 0, step = 0;      // AP
        int exponent = 0;                       // PowerImage
        std::uint64_t from_rank = 0;            // Tail
        std::shared_ptr<const Node> a, b;
    };

    explicit SetDescriptor(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

    static bool contains_node(const Node& node, std::uint64_t n) {
        switch (node.kind) {
            case Kind::Empty: return false;
            case Kind::Finite:
                return std::binary_search(node.elems.begin(), node.elems.end(), n);
            case Kind::AP:
                return n >= node.first && (n - node.first) % node.step == 0;
            case Kind::PowerImage: {
                const auto root = integer_root(n, node.exponent);
                return root.has_value();
            }
            case Kind::Tail:
                return contains_node(*node.a, n) && count_node(*node.a, n) >= node.from_rank;
            case Kind::Complement: return !contains_node(*node.a, n);
            case Kind::Union: return contains_node(*node.a, n) || contains_node(*node.b, n);
            case Kind::Intersection:
                return contains_node(*node.a, n) && contains_node(*node.b, n);
        }
        return false;
    }

    static std::uint64_t count_node(const Node& node, std::uint64_t N) {
        if (N == 0) return 0;
        switch (node.kind) {
            case Kind::Empty: return 0;
            case Kind::Finite:
                return static_cast<std::uint64_t>(
                    std::upper_bound(node.elems.begin(), node.elems.end(), N) -
                    node.elems.begin());
            case Kind::AP:
                return N < node.first ? 0 : (N - node.first) / node.step + 1;
            case Kind::PowerImage: return floor_root(N, node.exponent);
            case Kind::Tail: {
                const std::uint64_t base = count_node(*node.a, N);
                return base >= node.from_rank ? base - (node.from_rank - 1) : 0;
            }
            case Kind::Complement: return N - count_node(*node.a, N);
            case Kind::Union:
            case Kind::Intersection: {
                // no closed form for arbitrary combinations; enumerate
                std::uint64_t c = 0;
                for (std::uint64_t n = 1; n <= N; ++n)
                    if (contains_node(node, n)) ++c;
                return c;
            }
        }
        return 0;
    }

    static DensityBounds bounds_node(const Node& node) {
        switch (node.kind) {
            case Kind::Empty:
            case Kind::Finite: return {Rational(0), Rational(0), true};
            case Kind::AP:
                return {Rational(1, static_cast<std::int64_t>(node.step)),
                        Rational(1, static_cast<std::int64_t>(node.step)), true};
            case Kind::PowerImage: return {Rational(0), Rational(0), true};
            case Kind::Tail: return bounds_node(*node.a); // finitely many removed
            case Kind::Complement: {
                const auto c = bounds_node(*node.a);
                return {Rational(1) - c.upper, Rational(1) - c.lower, c.exact};
            }
            case Kind::Union: {
                const auto l = bounds_node(*node.a), r = bounds_node(*node.b);
                DensityBounds out{rat_max(l.lower, r.lower),
                                  clamp_unit(l.upper + r.upper), false};
                out.exact = l.exact && r.exact && out.lower == out.upper;
                return out;
            }
            case Kind::Intersection: {
                const auto l = bounds_node(*node.a), r = bounds_node(*node.b);
                DensityBounds out{clamp_unit(l.lower + r.lower - Rational(1)),
                                  rat_min(l.upper, r.upper), false};
                out.exact = l.exact && r.exact && out.lower == out.upper;
                return out;
            }
        }
        return {Rational(0), Rational(1), false};
    }

    enum class Finiteness { Finite, Infinite, Unknown };

    static Finiteness finiteness_node(const Node& node) {
        switch (node.kind) {
            case Kind::Empty:
            case Kind::Finite: return Finiteness::Finite;
            case Kind::AP:
            case Kind::PowerImage: return Finiteness::Infinite;
            case Kind::Tail: return finiteness_node(*node.a);
            case Kind::Complement:
                // only the cofinite direction is structural
                return finiteness_node(*node.a) == Finiteness::Finite ? Finiteness::Infinite
                                                                      : Finiteness::Unknown;
            case Kind::Union: {
                const auto l = finiteness_node(*node.a), r = finiteness_node(*node.b);
                if (l == Finiteness::Infinite || r == Finiteness::Infinite)
                    return Finiteness::Infinite;
                if (l == Finiteness::Finite && r == Finiteness::Finite)
                    return Finiteness::Finite;
                return Finiteness::Unknown;
            }
            case Kind::Intersection: {
                const auto l = finiteness_node(*node.a), r = finiteness_node(*node.b);
                if (l == Finiteness::Finite || r == Finiteness::Finite)
                    return Finiteness::Finite;
                return Finiteness::Unknown;
            }
        }
        return Finiteness::Unknown;
    }

    // true when count_up_to is closed-form all the way down (no enumeration)
    static bool count_is_cheap(const Node& node) {
        switch (node.kind) {
            case Kind::Union:
            case Kind::Intersection: return false;
            case Kind::Tail:
            case Kind::Complement: return count_is_cheap(*node.a);
            default: return true;
        }
    }

    static std::optional<std::uint64_t> nth_node(const Node& node, std::uint64_t k,
                                                 std::uint64_t cap) {
        switch (node.kind) {
            case Kind::Empty: return std::nullopt;
            case Kind::Finite:
                if (k > node.elems.size()) return std::nullopt;
                return node.elems[k - 1];
            case Kind::AP: {
                const std::uint64_t off = (k - 1) * node.step;
                if (node.step != 0 && off / node.step != k - 1) return std::nullopt; // overflow
                return node.first + off;
            }
            case Kind::PowerImage:
                return checked_pow(k, node.exponent, std::numeric_limits<std::uint64_t>::max());
            case Kind::Tail: return nth_node(*node.a, k + node.from_rank - 1, cap);
            default:
                break;
        }
        if (count_is_cheap(node)) {
            // binary search the monotone counting function over [1, cap]
            if (count_node(node, cap) < k) return std::nullopt;
            std::uint64_t lo = 1, hi = cap;
            while (lo < hi) {
                const std::uint64_t mid = lo + (hi - lo) / 2;
                if (count_node(node, mid) >= k) hi = mid;
                else lo = mid + 1;
            }
            return lo;
        }
        // single forward scan for enumeration-backed combinations
        std::uint64_t seen = 0;
        for (std::uint64_t n = 1; n <= cap; ++n)
            if (contains_node(node, n) && ++seen == k) return n;
        return std::nullopt;
    }

    static json json_node(const Node& node) {
        switch (node.kind) {
            case Kind::Empty: return {{"empty", true}};
            case Kind::Finite: return {{"finite", node.elems}};
            case Kind::AP: return {{"ap", {{"first", node.first}, {"step", node.step}}}};
            case Kind::PowerImage: return {{"powerImage", node.exponent}};
            case Kind::Tail:
                return {{"tail", {{"base", json_node(*node.a)}, {"fromRank", node.from_rank}}}};
            case Kind::Complement: return {{"complement", json_node(*node.a)}};
            case Kind::Union: return {{"union", {json_node(*node.a), json_node(*node.b)}}};
            case Kind::Intersection:
                return {{"intersection", {json_node(*node.a), json_node(*node.b)}}};
        }
        return {};
    }

    // integer r with r^m == n, if any
    static std::optional<std::uint64_t> integer_root(std::uint64_t n, int m) {
        if (n == 0) return std::nullopt;
        const auto guess = static_cast<std::uint64_t>(
            std::llround(std::pow(static_cast<double>(n), 1.0 / m)));
        for (std::uint64_t r = guess > 2 ? guess - 2 : 1; r <= guess + 2; ++r) {
            const auto p = checked_pow(r, m, n);
            if (p && *p == n) return r;
        }
        return std::nullopt;
    }

    // largest r with r^m <= N
    static std::uint64_t floor_root(std::uint64_t N, int m) {
        if (N == 0) return 0;
        auto r = static_cast<std::uint64_t>(
            std::llround(std::pow(static_cast<double>(N), 1.0 / m)));
        r += 2;
        while (r > 0) {
            const auto p = checked_pow(r, m, N);
            if (p && *p <= N) return r;
            --r;
        }
        return 0;
    }

    // r^m if it does not exceed limit, else nullopt
    static std::optional<std::uint64_t> checked_pow(std::uint64_t r, int m, std::uint64_t limit) {
        std::uint64_t v = 1;
        for (int i = 0; i < m; ++i) {
            if (r != 0 && v > limit / r) return std::nullopt;
            v *= r;
        }
        return v;
    }

    std::shared_ptr<const Node> node_;
};

inline Verdict SetDescriptor::prove_finite() const {
    switch (finiteness_node(*node_)) {
        case Finiteness::Finite:
            return Verdict::holds({{"finiteness", "finite"}, {"descriptor", to_json()}});
        case Finiteness::Infinite:
            return Verdict::fails({{"finiteness", "infinite"}, {"descriptor", to_json()}});
        case Finiteness::Unknown:
            break;
    }
    // a positive certified density lower bound is an infiniteness certificate
    const DensityBounds b = density_bounds();
    if (b.lower > Rational(0))
        return Verdict::fails({{"finiteness", "infinite"},
                               {"reason", "positiveDensityLowerBound"},
                               {"bounds", b.to_json()},
                               {"descriptor", to_json()}});
    return Verdict::unknown({{"finiteness", "unknown"}, {"descriptor", to_json()}});
}

inline std::optional<std::vector<std::uint64_t>> SetDescriptor::first_elements(
    std::uint64_t k, std::uint64_t cap) const {
    std::vector<std::uint64_t> out;
    out.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(k, 1 << 20)));
    if (kind() == Kind::Empty) return out;
    if (kind() == Kind::Finite || kind() == Kind::AP || kind() == Kind::PowerImage ||
        (kind() == Kind::Tail && count_is_cheap(*node_))) {
        for (std::uint64_t i = 1; i <= k; ++i) {
            const auto v = nth_node(*node_, i, cap);
            if (!v) {
                if (kind() == Kind::Finite) return out; // genuinely exhausted
                return std::nullopt;                    // overflowed the integer range
            }
            out.push_back(*v);
        }
        return out;
    }
    for (std::uint64_t n = 1; n <= cap && out.size() < k; ++n)
        if (contains_node(*node_, n)) out.push_back(n);
    if (out.size() < k) return std::nullopt; // may continue beyond the scan cap
    return out;
}

inline SetDescriptor SetDescriptor::from_json(const json& j) {
    if (!j.is_object() || j.size() != 1)
        throw std::invalid_argument("set descriptor must be a single-key object");
    const auto& [key, value] = *j.items().begin();
    if (key == "empty") return empty();
    if (key == "finite") return finite(value.get<std::vector<std::uint64_t>>());
    if (key == "ap")
        return ap(value.at("first").get<std::uint64_t>(), value.at("step").get<std::uint64_t>());
    if (key == "powerImage") return power_image(value.get<int>());
    if (key == "tail")
        return tail(from_json(value.at("base")), value.at("fromRank").get<std::uint64_t>());
    if (key == "complement") return complement(from_json(value));
    if (key == "union" || key == "intersection") {
        if (!value.is_array() || value.size() < 2)
            throw std::invalid_argument("\"" + key + "\" expects an array of >= 2 descriptors");
        SetDescriptor acc = from_json(value[0]);
        for (std::size_t i = 1; i < value.size(); ++i)
            acc = key == "union" ? union_of(acc, from_json(value[i]))
                                 : intersection(acc, from_json(value[i]));
        return acc;
    }
    throw std::invalid_argument("unknown set descriptor key \"" + key + "\"");
}

} // namespace roughlim
