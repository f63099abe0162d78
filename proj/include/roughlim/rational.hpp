#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace roughlim {

/// Small exact rational for density bounds. Denominators stay tiny here
/// (products of progression steps), so int64 with gcd normalization is enough.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    Rational() = default;
    Rational(std::int64_t n, std::int64_t d = 1) {
        if (d == 0) throw std::invalid_argument("rational with zero denominator");
        if (d < 0) { n = -n; d = -d; }
        const std::int64_t g = std::gcd(n < 0 ? -n : n, d);
        num = g ? n / g : n;
        den = g ? d / g : d;
    }

    double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
    bool is_zero() const { return num == 0; }

    friend Rational operator+(Rational a, Rational b) {
        return Rational(a.num * b.den + b.num * a.den, a.den * b.den);
    }
    friend Rational operator-(Rational a, Rational b) {
        return Rational(a.num * b.den - b.num * a.den, a.den * b.den);
    }
    friend bool operator==(Rational a, Rational b) { return a.num == b.num && a.den == b.den; }
    friend bool operator!=(Rational a, Rational b) { return !(a == b); }
    friend bool operator<(Rational a, Rational b) { return a.num * b.den < b.num * a.den; }
    friend bool operator<=(Rational a, Rational b) { return a.num * b.den <= b.num * a.den; }
    friend bool operator>(Rational a, Rational b) { return b < a; }
    friend bool operator>=(Rational a, Rational b) { return b <= a; }
};

inline Rational rat_min(Rational a, Rational b) { return a <= b ? a : b; }
inline Rational rat_max(Rational a, Rational b) { return a >= b ? a : b; }

inline Rational clamp_unit(Rational x) {
    if (x < Rational(0)) return Rational(0);
    if (x > Rational(1)) return Rational(1);
    return x;
}

inline std::string to_string(Rational r) {
    return r.den == 1 ? std::to_string(r.num)
                      : std::to_string(r.num) + "/" + std::to_string(r.den);
}

} // namespace roughlim
