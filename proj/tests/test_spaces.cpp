#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <thread>

#include "fixtures.hpp"

using namespace roughlim;

namespace {

std::vector<double> sample_for(const Space& s, std::mt19937& rng, int n) {
    std::uniform_real_distribution<double> dist(
        s.carrier() == Carrier::NonnegReals ? 0.0 : -5.0, 5.0);
    std::vector<double> out;
    for (int i = 0; i < n; ++i) out.push_back(dist(rng));
    return out;
}

const std::vector<Space>& builtins() {
    static const std::vector<Space> spaces = {
        Space::pow_max(2.0), Space::pow_max(1.5), Space::shifted_metric(1.0),
        Space::shifted_metric(0.5), Space::max_on_nonneg()};
    return spaces;
}

} // namespace

TEST_CASE("eval_p on the built-ins") {
    CHECK(Space::pow_max(2.0).eval_p(1, 2) == doctest::Approx(4.0));
    CHECK(Space::shifted_metric(1.0).eval_p(3, 3) == doctest::Approx(1.0));
    CHECK(Space::max_on_nonneg().eval_p(0, 0) == doctest::Approx(0.0));
}

TEST_CASE("carrier violations surface as domain errors") {
    CHECK_THROWS_AS(Space::pow_max(2.0).eval_p(-1.0, 2.0), std::domain_error);
    CHECK_THROWS_AS(Space::max_on_nonneg().point(-0.5), std::domain_error);
    CHECK(Space::shifted_metric(1.0).in_carrier(-3.0));
    CHECK_FALSE(Space::pow_max(2.0).try_point(-1.0).has_value());
    CHECK_THROWS_AS(Space::shifted_metric(1.0).point(
                        std::numeric_limits<double>::quiet_NaN()),
                    std::domain_error);
}

TEST_CASE("constant self-distance is exposed exactly where it exists") {
    CHECK(Space::shifted_metric(1.0).constant_self_distance() == 1.0);
    CHECK_FALSE(Space::pow_max(2.0).constant_self_distance().has_value());
    CHECK_FALSE(Space::max_on_nonneg().constant_self_distance().has_value());
}

TEST_CASE("check_axioms holds on built-ins") {
    const double sample[] = {0.0, 1.0, 2.0, 3.5};
    for (const auto& s : builtins()) {
        const auto v = check_axioms(s, sample, 1e-9);
        CHECK(v.is_holds());
    }
}

TEST_CASE("check_axioms rejects min(x,y) with a p1 witness") {
    const auto s = Space::custom("min(x, y)", Carrier::Reals);
    const double sample[] = {1.0, 2.0};
    const auto v = check_axioms(s, sample, 1e-9);
    REQUIRE(v.is_fails());
    CHECK(v.certificate.at("axiom") == "p1");
    // witness: p(2,2)=2 exceeds p(2,1)=1
    CHECK(v.certificate.at("values").at("p_xx").get<double>() >
          v.certificate.at("values").at("p_xy").get<double>());
}

TEST_CASE("check_axioms edge cases") {
    CHECK(check_axioms(Space::pow_max(2.0), {}, 1e-9).is_holds()); // vacuous
    const double bad[] = {-1.0};
    CHECK_THROWS_AS(check_axioms(Space::pow_max(2.0), bad, 1e-9), std::domain_error);
    const double ok[] = {1.0};
    CHECK_THROWS_AS(check_axioms(Space::pow_max(2.0), ok, -1.0), std::invalid_argument);
}

TEST_CASE("axiom properties on random samples") {
    std::mt19937 rng(42);
    for (const auto& s : builtins()) {
        const auto sample = sample_for(s, rng, 12);
        for (double x : sample)
            for (double y : sample) {
                CHECK(s.eval_p(x, y) == s.eval_p(y, x)); // exact symmetry
                CHECK(s.eval_p(x, x) <= s.eval_p(x, y) + 1e-12);
            }
        for (double x : sample)
            for (double y : sample)
                for (double z : sample)
                    CHECK(s.eval_p(x, y) <=
                          s.eval_p(x, z) + s.eval_p(z, y) - s.eval_p(z, z) + 1e-9);
    }
}

TEST_CASE("balls") {
    const auto shifted = Space::shifted_metric(1.0);
    CHECK(in_closed_ball(shifted, 0.0, 0.0, 0.0)); // center at radius 0
    CHECK(in_closed_ball(shifted, 0.0, 2.0, 2.0)); // p = 3 <= 1 + 2
    CHECK_FALSE(in_closed_ball(Space::pow_max(2.0), 1.0, 1.0, 2.0)); // 4 > 2 + 1
    CHECK_FALSE(in_open_ball(shifted, 0.0, 2.0, 2.0)); // boundary excluded
    CHECK(in_open_ball(shifted, 0.0, 2.1, 2.0));
    CHECK_THROWS_AS(in_closed_ball(shifted, 0.0, -1.0, 0.0), std::invalid_argument);
}

TEST_CASE("diam") {
    const auto shifted = Space::shifted_metric(1.0);
    const double single[] = {4.2};
    CHECK(diam(shifted, single) == doctest::Approx(1.0)); // self-distance
    const double three[] = {0.0, 1.0, 2.0};
    CHECK(diam(Space::max_on_nonneg(), three) == doctest::Approx(2.0));
    CHECK(diam(shifted, {}) == 0.0);
}

TEST_CASE("diam is monotone under inclusion and matches eval_p on pairs") {
    std::mt19937 rng(9);
    for (const auto& s : builtins()) {
        auto pts = sample_for(s, rng, 8);
        for (std::size_t k = 1; k <= pts.size(); ++k) {
            const auto sub = std::span<const double>(pts).subspan(0, k - 1);
            const auto super = std::span<const double>(pts).subspan(0, k);
            CHECK(diam(s, sub) <= diam(s, super) + 1e-12);
        }
        const double x = pts[0], y = pts[1];
        const double pair[] = {x, y};
        if (s.eval_p(x, y) >= std::max(s.eval_p(x, x), s.eval_p(y, y)))
            CHECK(diam(s, pair) == doctest::Approx(s.eval_p(x, y)));
    }
}

TEST_CASE("shifted metric self-distance is the constant, exactly") {
    const auto s = Space::shifted_metric(1.5);
    for (double x : {-3.0, 0.0, 0.25, 7.0}) CHECK(s.eval_p(x, x) == 1.5);
}

TEST_CASE("custom space expressions parse and evaluate") {
    const auto s = Space::custom("abs(x - y) + 2", Carrier::Reals);
    CHECK(s.eval_p(1.0, 4.0) == doctest::Approx(5.0));
    CHECK(check_axioms(s, std::vector<double>{-1.0, 0.0, 2.0, 3.0}, 1e-9).is_holds());
    CHECK_THROWS_AS(Space::custom("x + unknown(y)", Carrier::Reals), std::invalid_argument);
    CHECK_THROWS_AS(Space::custom("x + ", Carrier::Reals), std::invalid_argument);
}

TEST_CASE("space JSON codec") {
    for (const auto& s : builtins()) {
        const auto j = to_json(s);
        CHECK(to_json(space_from_json(j)) == j);
    }
    const auto c = space_from_json(
        json::parse(R"js({"kind":"custom","p":"min(x,y)","carrier":"nonneg"})js"));
    CHECK(c.eval_p(1.0, 2.0) == doctest::Approx(1.0));
    CHECK_THROWS(space_from_json(json::parse(R"({"kind":"nope"})")));
}

TEST_CASE("evaluation is safe from multiple threads") {
    const auto s = Space::pow_max(2.0);
    std::vector<std::thread> threads;
    std::vector<double> results(4);
    for (int i = 0; i < 4; ++i)
        threads.emplace_back([&, i] {
            double acc = 0;
            for (int k = 0; k < 1000; ++k) acc += s.eval_p(1.0, 2.0);
            results[static_cast<std::size_t>(i)] = acc;
        });
    for (auto& t : threads) t.join();
    for (double rv : results) CHECK(rv == doctest::Approx(4000.0));
}
