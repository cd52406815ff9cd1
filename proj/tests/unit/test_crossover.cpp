#include <doctest.h>

#include <cmath>

#include "cvblab/active_volume.hpp"
#include "cvblab/crossover.hpp"
#include "cvblab/em.hpp"
#include "cvblab/errors.hpp"

using namespace cvb;

TEST_CASE("EM time lower bound") {
    HardwareTiming t{100e-9, 0, "custom"};
    CHECK(t_em_lower(100, 1e6, t) == doctest::Approx(10));
    CHECK(t_em_lower(100, 0, t) == 0);
    HardwareTiming ion = HardwareTiming::trapped_ion();
    ion.t_shot_fixed = 0;
    CHECK(t_em_lower(100, 1e4, ion) == doctest::Approx(1e3));
    CHECK(HardwareTiming::preset("sc").t_layer == 100e-9);
    CHECK(HardwareTiming::preset("sc").t_shot_fixed == 1e-3);
    CHECK(HardwareTiming::preset("ion").t_layer == 1e-3);
    CHECK(HardwareTiming::preset("ion").t_shot_fixed == 10e-3);
    CHECK_THROWS_AS(HardwareTiming::preset("photonic"), ConfigError);
}

TEST_CASE("classical time") {
    HpcModel m;
    CHECK(t_classical(1000, 40, m) == doctest::Approx(1000 * std::pow(2.0, 40) * 1e-18));
    CHECK(t_classical(1000, 40, m) == doctest::Approx(1.1e-3).epsilon(0.01));
    CHECK(t_classical(0, 40, m) == 0);
    CHECK(t_classical(1000, 71.1, m) == doctest::Approx(2.6e6).epsilon(0.05));
    for (double n = 0; n <= 500; n += 50) {
        CHECK(std::isfinite(t_classical_log10(1e6, n, m)));
    }
    CHECK(std::isfinite(t_classical_log10(1e6, 5000, m)));
    CHECK(std::isinf(t_classical(1e6, 5000, m)));
    HpcModel r = m;
    r.complex_op_factor = true;
    CHECK(t_classical(10, 10, r) == doctest::Approx(4 * t_classical(10, 10, m)));
    r.real_op_factor = true;
    CHECK(t_classical(10, 10, r) == doctest::Approx(30 * t_classical(10, 10, m)));
}

TEST_CASE("classical time from geometry") {
    HpcModel m;
    m.v = 0.1;
    m.d = 2;
    CHECK(qubits_of_volume(1000, 2, 0.1) == doctest::Approx(71.1).epsilon(1e-3));
    CHECK(t_classical_geometry(1000, m) == doctest::Approx(2.6e6).epsilon(0.05));
    for (double V : {1.0, 10.0, 1000.0, 1e5}) {
        CHECK(t_classical_geometry(V, m) == t_classical(V, qubits_of_volume(V, 2, 0.1), m));
    }
    HpcModel fast = m;
    fast.v = 0.2;
    CHECK(t_classical_geometry(1000, fast) > t_classical_geometry(1000, m));
    HpcModel line;
    line.d = 1;
    line.v = 1;
    CHECK(qubits_of_volume(50, 1, 1) == doctest::Approx(20));
    CHECK(t_classical_geometry(50, line) == doctest::Approx(5.24e-11).epsilon(0.01));
    HpcModel frozen = m;
    frozen.v = 0;
    CHECK_THROWS_AS(t_classical_geometry(10, frozen), GeometryError);
}

TEST_CASE("depth of volume") {
    // pyramid with n qubits holds V: check D against the direct formula
    const double V = 1000;
    const double n = qubits_of_volume(V, 2, 0.1);
    CHECK(depth_of_volume(V, 2, 0.1) == doctest::Approx(2 / 0.2 * std::sqrt(n)));
    CHECK(pyramid_qubits(0.1, depth_of_volume(V, 2, 0.1), 2) == doctest::Approx(n));
}

TEST_CASE("timing claim at V=1000") {
    CrossoverConfig cfg;
    cfg.gamma = 1e-3;
    cfg.epsilon = 0.05;
    cfg.timing = HardwareTiming::superconducting();
    const double shots = static_cast<double>(required_shots(2, 1e-3, 1000, 0.05));
    CHECK(t_em_of_volume(1000, cfg) == doctest::Approx(t_em_lower(depth_of_volume(1000, 2, 0.1), shots, cfg.timing)).epsilon(1e-3));
    CHECK(t_em_of_volume(1000, cfg) < 3600);
    CHECK(t_classical_geometry(1000, cfg.hpc) > 1e6);
    const auto res = crossover_volume(cfg);
    CHECK(res.has_advantage_at(1000));
    REQUIRE(res.crossover_V);
    CHECK(*res.crossover_V > 1000);
    REQUIRE(res.onset_V);
    CHECK(*res.onset_V < 1000);
    // the gap closes at both crossings
    CHECK(t_em_of_volume_log10(*res.crossover_V, cfg) ==
          doctest::Approx(t_classical_geometry_log10(*res.crossover_V, cfg.hpc)).epsilon(1e-9));
    CHECK(t_em_of_volume_log10(*res.onset_V, cfg) ==
          doctest::Approx(t_classical_geometry_log10(*res.onset_V, cfg.hpc)).epsilon(1e-9));
    CHECK(std::pow(10.0, t_em_of_volume_log10(1000, cfg)) == doctest::Approx(t_em_of_volume(1000, cfg)));
    CHECK(res.em_budget_volume == doctest::Approx(std::log(10.0) / 2e-3));
}

TEST_CASE("low fidelity gives no useful advantage") {
    CrossoverConfig cfg;
    cfg.gamma = 1e-2;
    const auto res = crossover_volume(cfg);
    bool em_above_before_1000 = false;
    for (const auto &r : res.grid) {
        if (r.V < 1000 && r.V > 10 && r.t_em_seconds > r.t_hpc_seconds) {
            em_above_before_1000 = true;
        }
    }
    CHECK(em_above_before_1000);
    CHECK(!res.has_advantage_at(1000));
}

TEST_CASE("noiseless EM never crosses back") {
    CrossoverConfig cfg;
    cfg.gamma = 0;
    const auto res = crossover_volume(cfg);
    CHECK(!res.crossover_V);
    CHECK(res.em_below_hpc_anywhere);
}

TEST_CASE("grid slopes") {
    CrossoverConfig cfg;
    cfg.timing = {0, 1e-3, "custom"};  // depth-free EM time isolates the exponential
    cfg.v_min = 100;
    cfg.v_max = 1e5;
    const auto res = crossover_volume(cfg);
    const auto &a = res.grid.front();
    const auto &b = res.grid.back();
    const double em_slope = (std::log(b.t_em_seconds) - std::log(a.t_em_seconds)) / (b.V - a.V);
    CHECK(em_slope == doctest::Approx(cfg.lambda * cfg.gamma).epsilon(0.01));
    // ln T_hpc - ln V is linear in V^(c_d) with slope ln2 (4v/c_d)^(c_d)
    const double cd = c_d(2);
    const double x0 = std::pow(a.V, cd), x1 = std::pow(b.V, cd);
    const double la = t_classical_geometry_log10(a.V, cfg.hpc) * std::log(10.0);
    const double lb = t_classical_geometry_log10(b.V, cfg.hpc) * std::log(10.0);
    const double hpc_slope = ((lb - std::log(b.V)) - (la - std::log(a.V))) / (x1 - x0);
    CHECK(hpc_slope == doctest::Approx(std::log(2.0) * std::pow(4 * 0.1 / cd, cd)).epsilon(0.01));
}

TEST_CASE("velocity background") {
    CrossoverConfig cfg;
    cfg.grid_points = 5;
    const auto rows = velocity_background({0.05, 0.1, 0.2}, cfg);
    REQUIRE(rows.size() == 15);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(rows[i].t_hpc_seconds <= rows[5 + i].t_hpc_seconds);
        CHECK(rows[5 + i].t_hpc_seconds <= rows[10 + i].t_hpc_seconds);
    }
}
