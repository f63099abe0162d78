#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fixtures.hpp"

using namespace roughlim;
using SD = SetDescriptor;

TEST_CASE("in_ideal: paper and derived examples") {
    const auto dz = Ideal::density_zero();
    const auto fin = Ideal::fin();
    CHECK(dz.in_ideal(SD::power_image(2)).is_holds()); // Q has density 0
    CHECK(fin.in_ideal(SD::ap(1, 2)).is_fails());
    CHECK(dz.in_ideal(SD::ap(1, 3)).is_fails()); // density 1/3 > 0
    CHECK(fin.in_ideal(SD::finite({5, 6})).is_holds());
    CHECK(dz.in_ideal(SD::empty()).is_holds());
    CHECK(fin.in_ideal(SD::intersection(SD::power_image(2), SD::ap(2, 2))).is_unknown());
}

TEST_CASE("in_filter is membership of the complement") {
    const auto dz = Ideal::density_zero();
    const auto fin = Ideal::fin();
    CHECK(dz.in_filter(SD::complement(SD::power_image(2))).is_holds());
    CHECK(fin.in_filter(SD::finite({1, 2, 3, 4, 5, 6, 7, 8, 9, 10})).is_fails());
    CHECK(fin.in_filter(SD::naturals()).is_holds());
    CHECK(dz.in_filter(SD::naturals()).is_holds());
    for (const auto& s : fixtures::descriptor_corpus()) {
        const auto direct = fin.in_ideal(SD::complement(s));
        const auto filt = fin.in_filter(s);
        CHECK(direct.outcome == filt.outcome);
    }
}

TEST_CASE("admissibility") {
    CHECK(Ideal::fin().is_admissible());
    CHECK(Ideal::density_zero().is_admissible());
    const std::uint64_t sampled[] = {1, 1'000'000};
    CHECK(Ideal::fin().is_admissible(sampled));
    CHECK(Ideal::density_zero().is_admissible(sampled));
}

TEST_CASE("Fin-membership implies DensityZero-membership") {
    for (const auto& s : fixtures::descriptor_corpus())
        if (Ideal::fin().in_ideal(s).is_holds())
            CHECK(Ideal::density_zero().in_ideal(s).is_holds());
}

TEST_CASE("union closure on certified members") {
    for (const auto& ideal : {Ideal::fin(), Ideal::density_zero()})
        for (const auto& a : fixtures::descriptor_corpus())
            for (const auto& b : fixtures::descriptor_corpus()) {
                if (!ideal.in_ideal(a).is_holds() || !ideal.in_ideal(b).is_holds()) continue;
                CHECK_FALSE(ideal.in_ideal(SD::union_of(a, b)).is_fails());
            }
}

TEST_CASE("subset soundness: window-verified subsets of members never fail") {
    const auto corpus = fixtures::descriptor_corpus();
    for (const auto& ideal : {Ideal::fin(), Ideal::density_zero()})
        for (const auto& big : corpus) {
            if (!ideal.in_ideal(big).is_holds()) continue;
            for (const auto& small : corpus) {
                bool subset = true;
                for (std::uint64_t n = 1; n <= 10'000 && subset; ++n)
                    if (small.contains(n) && !big.contains(n)) subset = false;
                if (!subset) continue;
                // not a proof of inclusion beyond the window, hence only the
                // one-sided soundness claim
                CHECK_FALSE(ideal.in_ideal(SD::intersection(small, big)).is_fails());
            }
        }
}

TEST_CASE("ideal JSON codec") {
    CHECK(Ideal::from_json(json("fin")).kind() == Ideal::Kind::Fin);
    CHECK(Ideal::from_json(json("densityZero")).kind() == Ideal::Kind::DensityZero);
    CHECK_THROWS_AS(Ideal::from_json(json("maximal")), std::invalid_argument);
}
