#pragma once

#include <span>

#include "index_set.hpp"
#include "verdict.hpp"

namespace roughlim {

/// An ideal on N as a three-valued membership oracle over set descriptors.
/// Two kinds ship, covering every use in scope:
///   Fin         - the finite sets (membership via the structural
///                 finiteness prover)
///   DensityZero - sets of natural density zero (membership via certified
///                 density bounds)
/// Both are non-trivial and admissible. Verdicts are certificates, so
/// Unknown propagates instead of guessing.
class Ideal {
public:
    enum class Kind { Fin, DensityZero };

    static Ideal fin() { return Ideal(Kind::Fin); }
    static Ideal density_zero() { return Ideal(Kind::DensityZero); }

    Kind kind() const { return kind_; }
    std::string_view name() const { return kind_ == Kind::Fin ? "fin" : "densityZero"; }

    Verdict in_ideal(const SetDescriptor& s) const {
        if (kind_ == Kind::Fin) {
            Verdict fin = s.prove_finite();
            fin.certificate["ideal"] = "fin";
            return fin;
        }
        const DensityBounds b = s.density_bounds();
        json cert{{"ideal", "densityZero"},
                  {"bounds", b.to_json()},
                  {"descriptor", s.to_json()}};
        if (b.upper.is_zero()) return Verdict::holds(std::move(cert));
        if (b.lower > Rational(0)) return Verdict::fails(std::move(cert));
        return Verdict::unknown(std::move(cert));
    }

    /// Membership in the associated filter F(I) = {A : complement(A) in I}.
    Verdict in_filter(const SetDescriptor& s) const {
        return in_ideal(SetDescriptor::complement(s));
    }

    /// Both kinds contain every singleton; checked on a sample, as the
    /// structural provers should certify each one.
    bool is_admissible(std::span<const std::uint64_t> sample = {}) const {
        static constexpr std::uint64_t defaults[] = {1, 2, 97, 10'000, 1'000'000};
        auto pts = sample.empty() ? std::span<const std::uint64_t>(defaults) : sample;
        for (std::uint64_t n : pts)
            if (!in_ideal(SetDescriptor::finite({n})).is_holds()) return false;
        // non-trivial: N itself must not be a member
        return in_ideal(SetDescriptor::naturals()).is_fails();
    }

    static Ideal from_json(const json& j) {
        const std::string name = j.is_string() ? j.get<std::string>()
                                               : j.at("ideal").get<std::string>();
        if (name == "fin") return fin();
        if (name == "densityZero") return density_zero();
        throw std::invalid_argument("unknown ideal \"" + name + "\" (use \"fin\" or \"densityZero\")");
    }

private:
    explicit Ideal(Kind k) : kind_(k) {}
    Kind kind_;
};

} // namespace roughlim
