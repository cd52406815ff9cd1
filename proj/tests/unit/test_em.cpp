#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "cvblab/em.hpp"
#include "cvblab/errors.hpp"
#include "oracle.hpp"

using namespace cvb;

namespace {

Circuit bell() {
    return Circuit(2, {Layer{{Gate{GateKind::H, {0}, {}}}}, Layer{{Gate{GateKind::CNOT, {0, 1}, {}}}}});
}

// Pauli transfer matrix of a channel given as Pauli probabilities, via explicit Kraus sums.
Eigen::MatrixXd ptm(const std::vector<double> &probs, std::size_t k) {
    const std::size_t dim = probs.size();
    std::vector<std::uint32_t> qs(k);
    for (std::size_t i = 0; i < k; ++i) {
        qs[i] = static_cast<std::uint32_t>(i);
    }
    Eigen::MatrixXd r(dim, dim);
    for (std::size_t a = 0; a < dim; ++a) {
        const auto pa = oracle::pauli_string(oracle::table_label(a, qs, k));
        for (std::size_t b = 0; b < dim; ++b) {
            const auto pb = oracle::pauli_string(oracle::table_label(b, qs, k));
            oracle::Mat out = oracle::Mat::Zero(pb.rows(), pb.cols());
            for (std::size_t q = 0; q < dim; ++q) {
                const auto pq = oracle::pauli_string(oracle::table_label(q, qs, k));
                out += probs[q] * pq * pb * pq.adjoint();
            }
            r(a, b) = (pa * out).trace().real() / static_cast<double>(pb.rows());
        }
    }
    return r;
}

}  // namespace

TEST_CASE("required shots") {
    CHECK(required_shots(2, 1e-3, 0, 0.1) == 100);
    CHECK(required_shots(2, 1e-3, 1000, 0.05) == static_cast<std::size_t>(std::ceil(400 * std::exp(2.0))));
    CHECK(required_shots(2, 1e-3, 1000, 0.05) == 2956);
    const double V = std::log(10.0) / 2e-3;
    CHECK(required_shots(2, 1e-3, V, 0.1) == 1000);
    CHECK(required_shots(2, 1e-3, V, 0.01) == 100000);
}

TEST_CASE("rescale with q=0 equals unmitigated") {
    auto nc = attach_noise(bell(), NoiseModel{GlobalDepolarizing{0.0}});
    auto a = rescale_mitigate(nc, PauliObservable("ZZ"), 1000, 3);
    auto b = unmitigated(nc, PauliObservable("ZZ"), 1000, 3);
    CHECK(a.estimate.mean == b.estimate.mean);
}

TEST_CASE("rescale on bell") {
    auto nc = attach_noise(bell(), NoiseModel{GlobalDepolarizing{0.01}});
    const std::size_t M = 100000;
    auto r = rescale_mitigate(nc, PauliObservable("ZZ"), M, 5);
    CHECK(r.estimate.std_error == doctest::Approx(1.0 / 0.9801 / std::sqrt(double(M))));
    CHECK(std::abs(r.estimate.mean - 1.0) < 3 * r.estimate.std_error);
    CHECK(r.estimate.bias_bound.value() == 0.0);
}

TEST_CASE("rescale needs characterized global noise") {
    auto nc = attach_noise(bell(), NoiseModel{LocalDepolarizing{0.0, 0.01}});
    CHECK_THROWS_AS(rescale_mitigate(nc, PauliObservable("ZZ"), 100, 1), CharacterizationError);
}

TEST_CASE("rescale variance law") {
    auto nc = blowup_fit_instance(EmMethod::Rescale, 4, 60, 0.01);
    PauliObservable o = PauliObservable::single(4, 0);
    const std::size_t M = 2000;
    double s = 0, s2 = 0;
    const int reps = 200;
    for (int i = 0; i < reps; ++i) {
        const double m = rescale_mitigate(nc, o, M, 100 + i).estimate.mean;
        s += m;
        s2 += m * m;
    }
    const double mean = s / reps;
    const double var = (s2 - reps * mean * mean) / (reps - 1);
    const double q = *nc.uniform_global_q();
    const double predicted = std::pow(1 - q, -120.0) / M;
    CHECK(var == doctest::Approx(predicted).epsilon(0.2));
    CHECK(std::abs(mean - 1.0) < 4 * std::sqrt(var / reps));
}

TEST_CASE("post-selection acceptance") {
    std::vector<Layer> layers;
    for (std::uint32_t l = 0; l < 100; ++l) {
        layers.push_back(Layer{{Gate{GateKind::CZ, {l % 3, l % 3 + 1}, {}}}});
    }
    auto nc = attach_noise(Circuit(4, layers), NoiseModel{GlobalDepolarizing{0.01}});
    const std::size_t M = 100000;
    auto r = post_select_mitigate(nc, PauliObservable("ZIII"), M, 9);
    const double a = std::pow(0.99, 100);
    CHECK(a == doctest::Approx(0.366).epsilon(1e-3));
    CHECK(std::abs(r.acceptance - a) < 3 * std::sqrt(a * (1 - a) / M));
    CHECK(r.estimate.mean == 1.0);
    auto clean = post_select_mitigate(attach_noise(Circuit(4, layers), NoiseModel{GlobalDepolarizing{0.0}}),
                                      PauliObservable("ZIII"), 1000, 1);
    CHECK(clean.acceptance == 1.0);
}

TEST_CASE("post-selection starvation") {
    std::vector<Layer> layers(50, Layer{{Gate{GateKind::CZ, {0, 1}, {}}}});
    auto nc = attach_noise(Circuit(2, layers), NoiseModel{GlobalDepolarizing{0.9}});
    try {
        post_select_mitigate(nc, PauliObservable("ZI"), 100, 1);
        FAIL("expected starvation");
    } catch (const StarvationError &e) {
        CHECK(e.acceptance() == 0.0);
    }
}

TEST_CASE("pec inverse of single-qubit depolarizing") {
    const double q = 0.04;
    std::vector<double> probs = {1 - 3 * q / 4, q / 4, q / 4, q / 4};
    auto c = pec_inverse(probs);
    double norm = 0;
    for (double v : c) {
        norm += std::abs(v);
    }
    CHECK(norm == doctest::Approx((1 + q / 2) / (1 - q)));
    CHECK(norm * norm == doctest::Approx(1.129).epsilon(1e-3));
    // inverse channel composed with the channel is the identity, checked on transfer matrices
    Eigen::MatrixXd prod = ptm(c, 1) * ptm(probs, 1);
    CHECK((prod - Eigen::MatrixXd::Identity(4, 4)).norm() < 1e-12);
    // global form agrees with the table form
    auto g = pec_inverse_global(q, 1);
    CHECK(g[0] == doctest::Approx(c[0]));
    CHECK(g[1] == doctest::Approx(c[1]));
}

TEST_CASE("pec inverse of a two-qubit Pauli channel") {
    std::vector<double> probs(16);
    double total = 0;
    for (std::size_t i = 1; i < 16; ++i) {
        probs[i] = 0.001 * static_cast<double>(i);
        total += probs[i];
    }
    probs[0] = 1 - total;
    auto c = pec_inverse(probs);
    Eigen::MatrixXd prod = ptm(c, 2) * ptm(probs, 2);
    CHECK((prod - Eigen::MatrixXd::Identity(16, 16)).norm() < 1e-10);
    CHECK_THROWS_AS(pec_inverse({0.5, 0.5, 0, 0}), DecompositionError);
}

TEST_CASE("pec noiseless reduces to sampling") {
    auto nc = attach_noise(bell(), NoiseModel{LocalDepolarizing{0.0, 0.0}});
    auto r = pec_mitigate(nc, PauliObservable("ZZ"), 500, 1);
    CHECK(r.sampling_cost == 1.0);
    CHECK(r.estimate.mean == 1.0);
}

TEST_CASE("pec is unbiased") {
    Circuit c(2, {Layer{{Gate{GateKind::FSIM, {0, 1}, {0.4, 0.3}}}}, Layer{{Gate{GateKind::RX, {0}, {0.5}}}},
                  Layer{{Gate{GateKind::CNOT, {1, 0}, {}}}}, Layer{{Gate{GateKind::FSIM, {0, 1}, {0.9, 0.1}}}}});
    auto nc = attach_noise(c, NoiseModel{PauliChannel{0.02, 0.01, 0.03}});
    PauliObservable o("ZX");
    const double ideal = ideal_expectation(c, o);
    auto r = pec_mitigate(nc, o, 200000, 4);
    CHECK(std::abs(r.estimate.mean - ideal) < 4 * r.estimate.std_error);
    CHECK(r.variance_factor == doctest::Approx(r.sampling_cost));
    auto g = pec_mitigate(attach_noise(c, NoiseModel{GlobalDepolarizing{0.03}}), o, 200000, 5);
    CHECK(std::abs(g.estimate.mean - ideal) < 4 * g.estimate.std_error);
}

TEST_CASE("zne with no noise returns the plain mean") {
    auto nc = attach_noise(bell(), NoiseModel{GlobalDepolarizing{0.0}});
    auto r = zne_two_point(nc, PauliObservable("ZZ"), 2.0, 1000, 1);
    CHECK(r.point_means[0] == r.point_means[1]);
    CHECK(r.estimate.mean == 1.0);
}

TEST_CASE("zne unbiased on Clifford circuit with Pauli noise") {
    std::vector<Layer> layers;
    for (std::uint32_t l = 0; l < 20; ++l) {
        layers.push_back(Layer{{Gate{GateKind::CNOT, {l % 3, l % 3 + 1}, {}}}});
        layers.push_back(Layer{{Gate{GateKind::H, {l % 4}, {}}}});
        layers.push_back(Layer{{Gate{GateKind::H, {l % 4}, {}}}});
    }
    Circuit c(4, layers);
    auto nc = attach_noise(c, NoiseModel{LocalDepolarizing{0.0, 0.005}});
    PauliObservable o("ZZZZ");
    const double ideal = ideal_expectation(c, o);
    auto r = zne_two_point(nc, o, 2.0, 400000, 8);
    CHECK(std::abs(r.estimate.mean - ideal) < 3 * r.estimate.std_error);
    CHECK(std::abs(r.estimate.mean - ideal) < 0.005);
    CHECK(r.point_shots[0] + r.point_shots[1] == 400000);
}

TEST_CASE("zne extrapolation domain") {
    // X flips with probability 0.3 at gain 1 and 0.6 at gain 2, so the two means change sign
    Circuit c(1, {Layer{{Gate{GateKind::X, {0}, {}}}}});
    auto nc = attach_noise(c, NoiseModel{PauliChannel{0.3, 0.0, 0.0, true}});
    CHECK_THROWS_AS(zne_two_point(nc, PauliObservable("Z"), 2.0, 10000, 1), ExtrapolationError);
}

TEST_CASE("blow-up fits") {
    BlowupFitConfig cfg;
    cfg.n_qubits = 4;
    cfg.gamma = 2e-3;
    cfg.volumes = {20, 60, 100, 150, 200};
    cfg.shots = 20000;
    auto rescale = fit_blowup_rate(EmMethod::Rescale, cfg);
    CHECK(rescale.lambda == doctest::Approx(analytic_blowup_rate(EmMethod::Rescale, 4)).epsilon(0.1));
    auto ps = fit_blowup_rate(EmMethod::PostSelect, cfg);
    CHECK(ps.lambda == doctest::Approx(1.0 / (1 - std::pow(4.0, -4))).epsilon(0.1));
    auto pec = fit_blowup_rate(EmMethod::QuasiProb, cfg);
    CHECK(pec.lambda >= 3.5);
    CHECK(pec.lambda <= 4.5);
    auto none = fit_blowup_rate(EmMethod::Unmitigated, cfg);
    CHECK(std::abs(none.lambda) < 0.2);
    auto zne = fit_blowup_rate(EmMethod::ZneTwoPoint, cfg);
    MESSAGE("zne lambda " << zne.lambda);
    CHECK(zne.lambda == doctest::Approx(2.0).epsilon(0.15));
    cfg.volumes = {1, 2, 3};
    CHECK_THROWS_AS(fit_blowup_rate(EmMethod::Rescale, cfg), ConfigError);
}

TEST_CASE("effective volume") {
    CHECK(effective_volume(0.01, 1.0, std::exp(-0.5)) == doctest::Approx(50));
    CHECK_THROWS_AS(effective_volume(0.01, 1.0, -0.2), FitError);
}
