#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <future>
#include <random>

#include "fixtures.hpp"

using namespace roughlim;
using SD = SetDescriptor;

TEST_CASE("membership basics") {
    CHECK(SD::ap(1, 2).contains(7));
    CHECK_FALSE(SD::ap(1, 2).contains(8));
    CHECK(SD::power_image(2).contains(9));
    CHECK_FALSE(SD::power_image(2).contains(10));
    CHECK_FALSE(SD::complement(SD::finite({1, 2})).contains(2));
    CHECK(SD::complement(SD::finite({1, 2})).contains(3));
    CHECK(SD::tail(SD::power_image(2), 2).contains(4));
    CHECK_FALSE(SD::tail(SD::power_image(2), 2).contains(1));
    CHECK_FALSE(SD::empty().contains(1));
    CHECK(SD::naturals().contains(1));
}

TEST_CASE("count_up_to closed forms") {
    CHECK(SD::power_image(2).count_up_to(100) == 10);
    CHECK(SD::ap(2, 2).count_up_to(10) == 5);
    CHECK(SD::finite({3, 5, 1000}).count_up_to(10) == 2);
    CHECK(SD::tail(SD::power_image(2), 2).count_up_to(100) == 9);
    CHECK(SD::complement(SD::power_image(2)).count_up_to(100) == 90);
    CHECK(SD::empty().count_up_to(50) == 0);
}

TEST_CASE("count_up_to equals brute-force enumeration on the corpus") {
    for (const auto& s : fixtures::descriptor_corpus())
        for (std::uint64_t N : {1ull, 7ull, 100ull, 9999ull, 10000ull})
            CHECK(s.count_up_to(N) == fixtures::brute_count(s, N));
}

TEST_CASE("count_up_to window cap is enforced") {
    CHECK_THROWS_AS(SD::ap(1, 1).count_up_to(kDefaultWindowCap + 1), WindowCapError);
    CHECK_THROWS_AS(SD::ap(1, 1).count_up_to(100, 10), WindowCapError);
}

TEST_CASE("density bounds: closed forms") {
    auto b = SD::power_image(2).density_bounds();
    CHECK(b.lower == Rational(0));
    CHECK(b.upper == Rational(0));
    CHECK(b.exact);

    b = SD::ap(5, 4).density_bounds();
    CHECK(b.lower == Rational(1, 4));
    CHECK(b.upper == Rational(1, 4));
    CHECK(b.exact);

    b = SD::finite({1, 99}).density_bounds();
    CHECK(b.upper == Rational(0));
}

TEST_CASE("density bounds: combinations") {
    // squares union odds: interval collapses to 1/2
    auto b = SD::union_of(SD::power_image(2), SD::ap(1, 2)).density_bounds();
    CHECK(b.lower >= Rational(1, 2));
    CHECK(b.lower <= Rational(1, 2));
    CHECK(b.upper == Rational(1, 2));

    // complement flips and orders correctly
    b = SD::complement(SD::ap(1, 3)).density_bounds();
    CHECK(b.lower == Rational(2, 3));
    CHECK(b.upper == Rational(2, 3));

    // intersection bounds stay in [0,1] and contain the truth (1/6 here)
    b = SD::intersection(SD::ap(1, 2), SD::ap(1, 3)).density_bounds();
    CHECK(b.lower >= Rational(0));
    CHECK(b.upper <= Rational(1, 3));
    CHECK(b.lower <= Rational(1, 6));
    CHECK(Rational(1, 6) <= b.upper);

    // tail preserves the base bounds
    const auto base = SD::ap(1, 2).density_bounds();
    const auto tail = SD::tail(SD::ap(1, 2), 10).density_bounds();
    CHECK(base.lower == tail.lower);
    CHECK(base.upper == tail.upper);
}

TEST_CASE("tail density matches the base density on window counts") {
    const SD bases[] = {SD::ap(1, 2), SD::power_image(2),
                        SD::union_of(SD::power_image(2), SD::ap(1, 3))};
    for (const auto& base : bases) {
        const auto tail = SD::tail(base, 25);
        const double wb = static_cast<double>(base.count_up_to(100'000)) / 1e5;
        const double wt = static_cast<double>(tail.count_up_to(100'000)) / 1e5;
        CHECK(std::abs(wb - wt) <= 0.01);
        const auto b = tail.density_bounds();
        CHECK(wt >= b.lower.to_double() - 0.01);
        CHECK(wt <= b.upper.to_double() + 0.01);
    }
}

TEST_CASE("window density lies within the certified bounds (slack 0.01)") {
    for (const auto& s : fixtures::descriptor_corpus()) {
        const auto b = s.density_bounds();
        const double window =
            static_cast<double>(s.count_up_to(1'000'000)) / 1e6;
        CHECK(window >= b.lower.to_double() - 0.01);
        CHECK(window <= b.upper.to_double() + 0.01);
    }
}

TEST_CASE("squares density at N=1e6 is at most 1e-3") {
    const double d = static_cast<double>(SD::power_image(2).count_up_to(1'000'000)) / 1e6;
    CHECK(d <= 1e-3);
}

TEST_CASE("prove_finite structural verdicts") {
    CHECK(SD::finite({1, 2, 3}).prove_finite().is_holds());
    CHECK(SD::empty().prove_finite().is_holds());
    CHECK(SD::ap(1, 2).prove_finite().is_fails());
    CHECK(SD::power_image(2).prove_finite().is_fails());
    CHECK(SD::tail(SD::power_image(2), 5).prove_finite().is_fails());
    CHECK(SD::tail(SD::finite({1, 2, 3}), 2).prove_finite().is_holds());
    CHECK(SD::complement(SD::finite({1, 2})).prove_finite().is_fails());
    CHECK(SD::naturals().prove_finite().is_fails());
    CHECK(SD::union_of(SD::finite({1}), SD::finite({2})).prove_finite().is_holds());
    CHECK(SD::union_of(SD::finite({1}), SD::ap(1, 2)).prove_finite().is_fails());
    CHECK(SD::intersection(SD::power_image(2), SD::finite({4, 5})).prove_finite().is_holds());
    // the documented conservative verdict: even squares are infinite, but
    // the structural prover cannot see it
    CHECK(SD::intersection(SD::power_image(2), SD::ap(2, 2)).prove_finite().is_unknown());
    // double complement normalizes away
    CHECK(SD::complement(SD::complement(SD::finite({1}))).prove_finite().is_holds());
}

TEST_CASE("De Morgan consistency on the window") {
    const auto A = SD::power_image(2);
    const auto B = SD::ap(1, 3);
    const auto lhs = SD::complement(SD::union_of(A, B));
    const auto rhs = SD::intersection(SD::complement(A), SD::complement(B));
    for (std::uint64_t n = 1; n <= 10'000; ++n) CHECK(lhs.contains(n) == rhs.contains(n));
}

TEST_CASE("nth_element and first_elements agree with enumeration") {
    for (const auto& s : fixtures::descriptor_corpus()) {
        std::vector<std::uint64_t> brute;
        for (std::uint64_t n = 1; n <= 5000 && brute.size() < 40; ++n)
            if (s.contains(n)) brute.push_back(n);
        for (std::size_t i = 0; i < brute.size(); i += 7) {
            const auto v = s.nth_element(i + 1);
            REQUIRE(v.has_value());
            CHECK(*v == brute[i]);
        }
        if (!brute.empty()) {
            const auto head = s.first_elements(brute.size());
            REQUIRE(head.has_value());
            CHECK(*head == brute);
        }
    }
}

TEST_CASE("parallel window counting sums to the sequential count") {
    const auto s = SD::union_of(SD::power_image(2), SD::ap(1, 3));
    const std::uint64_t N = 200'000;
    auto chunk = [&](std::uint64_t lo, std::uint64_t hi) {
        std::uint64_t c = 0;
        for (std::uint64_t n = lo; n <= hi; ++n)
            if (s.contains(n)) ++c;
        return c;
    };
    auto f1 = std::async(std::launch::async, chunk, 1, N / 4);
    auto f2 = std::async(std::launch::async, chunk, N / 4 + 1, N / 2);
    auto f3 = std::async(std::launch::async, chunk, N / 2 + 1, 3 * N / 4);
    auto f4 = std::async(std::launch::async, chunk, 3 * N / 4 + 1, N);
    CHECK(f1.get() + f2.get() + f3.get() + f4.get() == s.count_up_to(N));
}

TEST_CASE("descriptor JSON round-trips structurally") {
    for (const auto& s : fixtures::descriptor_corpus()) {
        const auto j = s.to_json();
        CHECK(SD::from_json(j).to_json() == j);
    }
    // n-ary unions fold left
    const auto j = json::parse(R"({"union": [{"powerImage": 2}, {"ap": {"first":1,"step":2}},
                                             {"finite": [7]}]})");
    const auto s = SD::from_json(j);
    CHECK(s.contains(4));
    CHECK(s.contains(7));
    CHECK(s.contains(9));
    CHECK_FALSE(s.contains(8));
}

TEST_CASE("invalid constructions are rejected") {
    CHECK_THROWS_AS(SD::ap(0, 2), std::invalid_argument);
    CHECK_THROWS_AS(SD::ap(1, 0), std::invalid_argument);
    CHECK_THROWS_AS(SD::power_image(1), std::invalid_argument);
    CHECK_THROWS_AS(SD::finite({0, 1}), std::invalid_argument);
    CHECK_THROWS_AS(SD::tail(SD::ap(1, 1), 0), std::invalid_argument);
    CHECK_THROWS_AS(SD::from_json(json::parse(R"({"weird": 1})")), std::invalid_argument);
}
