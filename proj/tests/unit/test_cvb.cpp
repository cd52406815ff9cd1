#include <doctest.h>

#include <cmath>

#include "cvblab/cvb.hpp"
#include "cvblab/em.hpp"
#include "cvblab/errors.hpp"

using namespace cvb;

namespace {

// Independent oracle: bisection for the volume where the bias budget is exhausted,
// exp(-gamma V) = 1 - eps + eps / sqrt(R).
double bare_volume_by_bisection(double gamma, double eps, double R) {
    const double target = 1 - eps + eps / std::sqrt(R);
    double lo = 0, hi = 1.0;
    while (std::exp(-gamma * hi) > target) {
        hi *= 2;
    }
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (std::exp(-gamma * mid) > target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("bare volume") {
    CHECK(v_bare(1e-3, 0.05, 4) == doctest::Approx(25.32).epsilon(1e-4));
    CHECK(v_bare(1e-3, 0.05, 4) == doctest::Approx(-1000 * std::log(0.975)));
    CHECK(v_bare(5e-4, 0.01, 1e300) == doctest::Approx(20).epsilon(0.01));
    CHECK(v_bare(1e-3, 0.3, 1) == 0);
    CHECK(v_bare(1e-3, 0.3, 0.5) == 0);
    for (double g : {1e-2, 1e-3}) {
        for (double e : {0.001, 0.05, 0.3}) {
            for (double R : {1.5, 10.0, 1e6}) {
                CHECK(v_bare(g, e, R) == doctest::Approx(bare_volume_by_bisection(g, e, R)).epsilon(1e-9));
            }
        }
    }
    CHECK(v_bare_approx(5e-4, 0.01, 4) == doctest::Approx(10));
}

TEST_CASE("em volume") {
    CHECK(v_em(1e-3, 2, 1) == 0);
    CHECK(v_em(1e-3, 2, 10) == doctest::Approx(1151.29).epsilon(1e-5));
    CHECK(v_em(1e-4, 2, 10) == doctest::Approx(11512.9).epsilon(1e-5));
    CHECK_THROWS_AS(v_em(1e-3, 2, 0.5), ConfigError);
}

TEST_CASE("em volume inverts the shot law") {
    for (double R : {2.0, 10.0, 1000.0}) {
        const double V = v_em(1e-3, 2, R);
        const double eps = 0.01;
        // required_shots rounds up; exp(lambda gamma V)/eps^2 is R/eps^2 up to rounding
        CHECK(required_shots(2, 1e-3, V, eps) == static_cast<std::size_t>(std::ceil(R / (eps * eps) - 1e-6)));
    }
}

TEST_CASE("boost thresholds") {
    const double targets[][3] = {{0.15, 10, 11.2}, {0.01, 100, 168}, {0.001, 1000, 1684}};
    for (const auto &t : targets) {
        const auto v = cvb::cvb(t[0], 10, 2);
        REQUIRE(!v.infinite());
        CHECK(*v.exact > t[1]);
        // closed form against the oracle ratio of volumes
        const double oracle = std::log(10.0) / 2e-3 / bare_volume_by_bisection(1e-3, t[0], 10);
        CHECK(*v.exact == doctest::Approx(oracle).epsilon(1e-6));
        CHECK(v.approx == doctest::Approx(t[2]).epsilon(0.005));
    }
    CHECK(cvb::cvb(0.3, 1, 2).infinite());
}

TEST_CASE("boost properties") {
    for (double e = 1e-4; e <= 0.01; e *= 1.7) {
        const auto v = cvb::cvb(e, 10, 2);
        CHECK(std::abs(*v.exact - v.approx) / v.approx < 0.01);
    }
    double prev = 1e300;
    for (double e = 1e-3; e < 0.9; e *= 1.3) {
        const double c = *cvb::cvb(e, 10, 2).exact;
        CHECK(c < prev);
        prev = c;
    }
    const double base = v_em(1e-2, 2, 10) / v_bare(1e-2, 0.05, 10);
    for (double g : {1e-3, 1e-4}) {
        CHECK(std::abs(v_em(g, 2, 10) / v_bare(g, 0.05, 10) - base) / base < 1e-12);
    }
    CHECK(std::abs(*cvb::cvb(0.05, 10, 2).exact - base) / base < 1e-12);
    double vb = 0;
    for (double R = 1.1; R < 1e6; R *= 3) {
        const double v = v_bare(1e-3, 0.05, R);
        CHECK(v > vb);
        vb = v;
    }
    vb = 0;
    for (double e = 0.01; e < 0.9; e += 0.05) {
        const double v = v_bare(1e-3, e, 10);
        CHECK(v > vb);
        vb = v;
    }
}

TEST_CASE("overhead factor range") {
    const auto r = overhead_factor_range(2, 1e9);
    CHECK(r.lo == doctest::Approx(std::log(2.0) / (1 - 1 / std::sqrt(2.0))));
    CHECK(r.lo == doctest::Approx(2.37).epsilon(0.005));
    CHECK(r.hi == doctest::Approx(20.7).epsilon(0.005));
    const auto same = overhead_factor_range(4, 4);
    CHECK(same.lo == doctest::Approx(2.77).epsilon(0.001));
    CHECK(same.hi == same.lo);
    CHECK(overhead_factor(1 + 1e-12) == doctest::Approx(2));
}

TEST_CASE("logical volumes") {
    CHECK(v_ec(9e-6, 0.01) == doctest::Approx(1e5 * 0.01).epsilon(0.12));
    CHECK(v_ec(1e-3, 0.05) == doctest::Approx(v_bare_approx(1e-3, 0.05, 1e300)));
    const auto band = v_lem_band(2e-8);
    CHECK(band.lo / 5e7 < 2);
    CHECK(band.lo / 5e7 > 0.5);
    CHECK(band.hi / 5e8 < 2);
    CHECK(band.hi / 5e8 > 0.5);
    CHECK(v_lem(1e-3, 10, 2) == v_em(1e-3, 2, 10));
}

TEST_CASE("classical bound") {
    CHECK(corollary_classical_bound(10, 1).value() == doctest::Approx(10));
    CHECK(corollary_classical_bound(10, 1e-3).log10 == doctest::Approx(1000));
    CHECK(std::isinf(corollary_classical_bound(10, 1e-3).value()));
    CHECK(corollary_classical_bound(1, 0.37).value() == 1);
    CHECK_THROWS_AS(corollary_classical_bound(10, 0), ConfigError);
}

TEST_CASE("code table") {
    CHECK(code_table({}, 0.1).empty());
    const auto rows = code_table(builtin_codes(), 0.1);
    REQUIRE(rows.size() == 6);
    // quoted V_EC per epsilon and lower V_LEM band edge
    const double quoted_ec[] = {1e5, 1e6, 2e5, 6e7, 8e5, 9e6};
    const double quoted_lem_lo[] = {1e5, 1e6, 2e5, 6e7, 8e5, 9e6};
    const double quoted_lem_hi[] = {1e6, 1e7, 2e6, 6e8, 8e6, 9e7};
    const double rate[] = {1.0 / 161, 1.0 / 241, 1.0 / 12, 1.0 / 24, 1.0 / 17, 1.0 / 15};
    for (std::size_t i = 0; i < 6; ++i) {
        const auto &r = rows[i];
        CAPTURE(r.code.label());
        CHECK(r.v_ec_per_epsilon / quoted_ec[i] < 2);
        CHECK(r.v_ec_per_epsilon / quoted_ec[i] > 0.5);
        CHECK(r.v_ec == doctest::Approx(0.1 * r.v_ec_per_epsilon));
        CHECK(r.v_lem.lo / quoted_lem_lo[i] < 2);
        CHECK(r.v_lem.lo / quoted_lem_lo[i] > 0.5);
        CHECK(r.v_lem.hi / quoted_lem_hi[i] < 2);
        CHECK(r.v_lem.hi / quoted_lem_hi[i] > 0.5);
        CHECK(r.code.net_rate() == doctest::Approx(rate[i]).epsilon(0.03));
    }
    CHECK(rows[1].code.label() == "[[121,1,11]]");
    CHECK(rows[4].code.label() == "[[544,80,<=12]]");
}

TEST_CASE("curve rows") {
    const auto rows = cvb_curve({0.001, 0.01, 0.15}, 10, 2);
    REQUIRE(rows.size() == 3);
    for (const auto &r : rows) {
        CHECK(r.v_em / r.v_bare == doctest::Approx(*r.cvb.exact));
    }
}
