#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "cvblab/density_matrix.hpp"
#include "cvblab/errors.hpp"
#include "cvblab/parallel.hpp"
#include "cvblab/pauli_frame.hpp"
#include "cvblab/sim.hpp"
#include "cvblab/statevector.hpp"
#include "cvblab/tableau.hpp"
#include "oracle.hpp"

using namespace cvb;

namespace {

Circuit bell() {
    return Circuit(2, {Layer{{Gate{GateKind::H, {0}, {}}}}, Layer{{Gate{GateKind::CNOT, {0, 1}, {}}}}});
}

Circuit random_circuit(std::size_t n, std::size_t depth, std::mt19937_64 &gen, bool clifford, bool measure) {
    const GateKind one_q_cliff[] = {GateKind::H, GateKind::S, GateKind::SDG, GateKind::SX, GateKind::X,
                                    GateKind::Y, GateKind::Z, GateKind::I};
    const GateKind two_q_cliff[] = {GateKind::CNOT, GateKind::CZ, GateKind::SWAP};
    std::vector<Layer> layers;
    std::uniform_real_distribution<double> angle(0, 3.1);
    for (std::size_t l = 0; l < depth; ++l) {
        std::vector<std::uint32_t> perm(n);
        for (std::size_t i = 0; i < n; ++i) {
            perm[i] = static_cast<std::uint32_t>(i);
        }
        std::shuffle(perm.begin(), perm.end(), gen);
        Layer layer;
        std::size_t i = 0;
        while (i < n) {
            const auto r = gen() % 4;
            if (r < 2 && i + 1 < n) {
                Gate g{clifford ? two_q_cliff[gen() % 3] : GateKind::FSIM, {perm[i], perm[i + 1]}, {}};
                if (!clifford) {
                    g.params = {angle(gen), angle(gen)};
                }
                layer.gates.push_back(g);
                i += 2;
            } else if (r == 2 && measure) {
                layer.gates.push_back({gen() % 2 ? GateKind::M : GateKind::R, {perm[i]}, {}});
                ++i;
            } else {
                if (clifford) {
                    layer.gates.push_back({one_q_cliff[gen() % 8], {perm[i]}, {}});
                } else {
                    layer.gates.push_back({gen() % 2 ? GateKind::RX : GateKind::RY, {perm[i]}, {angle(gen)}});
                }
                ++i;
            }
        }
        layers.push_back(layer);
    }
    return Circuit(n, layers);
}

std::string random_observable(std::size_t n, std::mt19937_64 &gen) {
    static const char kLab[4] = {'I', 'X', 'Y', 'Z'};
    std::string s(n, 'I');
    while (PauliObservable(s).trivial()) {
        for (auto &c : s) {
            c = kLab[gen() % 4];
        }
    }
    return s;
}

// Two-sample test on the fraction of +1 outcomes.
double two_proportion_z(const ShotRecord &a, const ShotRecord &b) {
    auto frac = [](const ShotRecord &r) {
        double k = 0;
        for (int o : r.outcomes) {
            k += o > 0;
        }
        return k / static_cast<double>(r.size());
    };
    const double pa = frac(a), pb = frac(b);
    const double p = 0.5 * (pa + pb);
    const double se = std::sqrt(std::max(p * (1 - p), 1e-12) * (1.0 / a.size() + 1.0 / b.size()));
    return (pa - pb) / se;
}

}  // namespace

TEST_CASE("ideal expectation basics") {
    CHECK(ideal_expectation(Circuit(1, {}), PauliObservable("Z")) == 1.0);
    CHECK(ideal_expectation(Circuit(1, {Layer{{Gate{GateKind::X, {0}, {}}}}}), PauliObservable("Z")) ==
          doctest::Approx(-1.0));
    CHECK(ideal_expectation(bell(), PauliObservable("ZZ")) == doctest::Approx(1.0));
    CHECK(ideal_expectation(bell(), PauliObservable("XX")) == doctest::Approx(1.0));
    CHECK(ideal_expectation(bell(), PauliObservable("YY")) == doctest::Approx(-1.0));
    CHECK(ideal_expectation(bell(), PauliObservable("ZI")) == doctest::Approx(0.0));
}

TEST_CASE("statevector agrees with dense oracle on random circuits") {
    std::mt19937_64 gen(3);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + trial % 4;
        auto c = random_circuit(n, 5, gen, trial % 2 == 0, false);
        auto obs = random_observable(n, gen);
        NoisyCircuit nc{c, std::vector<ErrorChannel>(c.gate_count()), 0};
        CHECK(ideal_expectation(c, PauliObservable(obs)) == doctest::Approx(oracle::noisy_expectation(nc, obs)).epsilon(1e-10));
    }
}

TEST_CASE("statevector norm preserved") {
    std::mt19937_64 gen(5);
    auto c = random_circuit(6, 12, gen, false, false);
    StateVector sv(6);
    for (const auto &layer : c.layers()) {
        for (const auto &g : layer.gates) {
            sv.apply(g);
        }
        CHECK(std::abs(sv.norm() - 1.0) < 1e-10);
    }
}

TEST_CASE("statevector capacity") {
    set_statevector_limit(8);
    CHECK_THROWS_AS(StateVector(9), CapacityError);
    CHECK_THROWS_AS(ideal_expectation(Circuit(9, {}), PauliObservable(std::string(9, 'Z'))), CapacityError);
    set_statevector_limit(24);
    CHECK_THROWS_AS(StateVector(25), CapacityError);
}

TEST_CASE("global depolarizing analytic path") {
    auto nc = attach_noise(bell(), NoiseModel{GlobalDepolarizing{0.01}});
    auto v = noisy_expectation_exact(nc, PauliObservable("ZZ"));
    CHECK(v.value == doctest::Approx(0.9801).epsilon(1e-14));
    CHECK(v.method == "analytic");
    auto zero = noisy_expectation_exact(attach_noise(bell(), NoiseModel{GlobalDepolarizing{0.0}}), PauliObservable("XX"));
    CHECK(zero.value == doctest::Approx(1.0));
    // density-matrix evolution of the global channel agrees with the closed form
    CHECK(evolve_density_matrix(nc).expectation(PauliObservable("ZZ")) == doctest::Approx(0.9801).epsilon(1e-12));
}

TEST_CASE("local depolarizing exact against dense oracle") {
    Circuit c(2, {Layer{{Gate{GateKind::FSIM, {0, 1}, {0.4, 0.3}}}}, Layer{{Gate{GateKind::CNOT, {1, 0}, {}}}},
                  Layer{{Gate{GateKind::CZ, {0, 1}, {}}}}});
    auto nc = attach_noise(c, NoiseModel{LocalDepolarizing{0.0, 0.01}});
    for (const char *o : {"ZZ", "XI", "YX", "ZI"}) {
        auto v = noisy_expectation_exact(nc, PauliObservable(o));
        CHECK(v.method == "density_matrix");
        CHECK(std::abs(v.value - oracle::noisy_expectation(nc, o)) < 1e-10);
    }
}

TEST_CASE("pauli channel exact against dense oracle on random circuits") {
    std::mt19937_64 gen(11);
    for (int trial = 0; trial < 8; ++trial) {
        const std::size_t n = 2 + trial % 3;
        auto c = random_circuit(n, 4, gen, false, false);
        auto nc = attach_noise(c, NoiseModel{PauliChannel{0.01, 0.02, 0.005, true}});
        auto obs = random_observable(n, gen);
        CHECK(std::abs(noisy_expectation_exact(nc, PauliObservable(obs)).value -
                       oracle::noisy_expectation(nc, obs)) < 1e-10);
    }
}

TEST_CASE("sampling noiseless bell is deterministic") {
    auto nc = attach_noise(bell(), NoiseModel{GlobalDepolarizing{0.0}});
    auto rec = sample_shots(nc, PauliObservable("ZZ"), 1000, 1);
    CHECK(rec.size() == 1000);
    CHECK(rec.mean() == 1.0);
    CHECK(rec.error_free_count() == 1000);
}

TEST_CASE("sampling converges to analytic decay") {
    std::vector<Layer> layers;
    for (std::uint32_t l = 0; l < 10; ++l) {
        layers.push_back(Layer{{Gate{GateKind::CNOT, {l % 3, l % 3 + 1}, {}}}});
    }
    Circuit c(4, layers);
    auto nc = attach_noise(c, NoiseModel{GlobalDepolarizing{0.05}});
    auto rec = sample_shots(nc, PauliObservable("ZIII"), 100000, 42);
    const double expect = std::pow(0.95, 10);
    CHECK(std::abs(rec.mean() - expect) < 3 * rec.std_error());
}

TEST_CASE("sampling determinism across thread counts") {
    std::mt19937_64 gen(8);
    auto c = random_circuit(5, 6, gen, false, true);
    auto nc = attach_noise(c, NoiseModel{LocalDepolarizing{0.002, 0.02}, 0.01});
    PauliObservable obs(random_observable(5, gen));
    set_thread_count(1);
    auto a = sample_shots(nc, obs, 3000, 9);
    set_thread_count(3);
    auto b = sample_shots(nc, obs, 3000, 9);
    set_thread_count(0);
    CHECK(a == b);
    auto d = sample_shots(nc, obs, 3000, 10);
    CHECK_FALSE(a == d);
}

TEST_CASE("trajectory mean matches density matrix with mid-circuit measurement") {
    std::mt19937_64 gen(21);
    for (int trial = 0; trial < 4; ++trial) {
        auto c = random_circuit(4, 6, gen, false, true);
        auto nc = attach_noise(c, NoiseModel{LocalDepolarizing{0.01, 0.03}});
        PauliObservable obs(random_observable(4, gen));
        auto exact = noisy_expectation_exact(nc, obs);
        auto rec = sample_shots(nc, obs, 40000, 100 + trial);
        CHECK(std::abs(rec.mean() - exact.value) < 4 * rec.std_error() + 1e-9);
    }
}

TEST_CASE("tableau matches statevector on deterministic observables") {
    std::mt19937_64 gen(4);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 2 + trial % 5;
        auto c = random_circuit(n, 6, gen, true, false);
        Tableau t(n);
        for (const auto &layer : c.layers()) {
            for (const auto &g : layer.gates) {
                t.apply(g);
            }
        }
        for (std::uint32_t q = 0; q < n; ++q) {
            Tableau copy = t;
            const double z = ideal_expectation(c, PauliObservable::single(n, q));
            if (copy.is_deterministic(q)) {
                const int b = copy.measure(q);
                CHECK(z == doctest::Approx(b ? -1.0 : 1.0));
            } else {
                CHECK(std::abs(z) < 1e-9);
            }
        }
    }
}

TEST_CASE("pauli frame injected X flips Z measurement") {
    PauliFrame f(3);
    f.inject(1, Pauli::X);
    CHECK(f.measure(0) == 0);
    CHECK(f.measure(1) == 1);
    f.h(1);
    CHECK(f.measure(1) == 0);
    PauliFrame g(2);
    g.inject(0, Pauli::X);
    g.cnot(0, 1);
    CHECK(g.measure(1) == 1);
}

TEST_CASE("pauli frame rejects non-Clifford") {
    Circuit c(1, {Layer{{Gate{GateKind::RX, {0}, {0.3}}}}});
    CHECK_THROWS_AS(pauli_frame_run(c, NoiseModel{GlobalDepolarizing{0.0}}, PauliObservable("Z"), 10, 1),
                    ContractViolation);
}

TEST_CASE("engine cross-check on random Clifford circuits") {
    std::mt19937_64 gen(17);
    for (int trial = 0; trial < 12; ++trial) {
        const std::size_t n = 2 + trial % 9;
        auto c = random_circuit(n, 5, gen, true, trial % 2 == 1);
        NoiseModel model = trial % 3 == 0 ? NoiseModel{GlobalDepolarizing{0.02}}
                                          : NoiseModel{PauliChannel{0.02, 0.01, 0.03, true}, 0.01};
        auto nc = attach_noise(c, model);
        PauliObservable obs(random_observable(n, gen));
        auto a = sample_shots(nc, obs, 20000, 1000 + trial);
        auto b = pauli_frame_run(nc, obs, 20000, 2000 + trial);
        CHECK(std::abs(two_proportion_z(a, b)) < 3.3);
        // mid-circuit bit statistics agree too
        if (!a.syndromes.empty() && !a.syndromes[0].empty()) {
            const std::size_t k = a.syndromes[0].size();
            for (std::size_t j = 0; j < k; ++j) {
                double ma = 0, mb = 0;
                for (std::size_t s = 0; s < a.size(); ++s) {
                    ma += a.syndromes[s][j];
                    mb += b.syndromes[s][j];
                }
                ma /= a.size();
                mb /= b.size();
                const double p = 0.5 * (ma + mb);
                const double se = std::sqrt(std::max(p * (1 - p), 1e-12) * 2.0 / a.size());
                CHECK(std::abs(ma - mb) / se < 3.3);
            }
        }
    }
}

TEST_CASE("global decay law fit") {
    std::vector<double> xs, ys, ws;
    for (int depth : {10, 40, 80, 120, 160, 200}) {
        // a depth-V chain of CZ gates on 4 qubits has V gates
        std::vector<Layer> layers;
        for (int l = 0; l < depth; ++l) {
            layers.push_back(Layer{{Gate{GateKind::CZ, {static_cast<std::uint32_t>(l % 3), static_cast<std::uint32_t>(l % 3 + 1)}, {}}}});
        }
        Circuit c(4, layers);
        auto nc = attach_noise(c, NoiseModel{GlobalDepolarizing{0.01}});
        auto rec = sample_shots(nc, PauliObservable("ZIII"), 20000, depth);
        xs.push_back(depth);
        ys.push_back(std::log(rec.mean()));
        ws.push_back(std::pow(rec.mean() / rec.std_error(), 2));
    }
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sw += ws[i];
        sx += ws[i] * xs[i];
        sy += ws[i] * ys[i];
        sxx += ws[i] * xs[i] * xs[i];
        sxy += ws[i] * xs[i] * ys[i];
    }
    const double slope = (sw * sxy - sx * sy) / (sw * sxx - sx * sx);
    CHECK(-slope == doctest::Approx(-std::log(0.99)).epsilon(0.05));
}

TEST_CASE("shot record csv") {
    auto nc = attach_noise(bell(), NoiseModel{GlobalDepolarizing{0.1}});
    auto rec = sample_shots(nc, PauliObservable("ZZ"), 3, 1);
    std::ostringstream os;
    rec.write_csv(os);
    const auto s = os.str();
    CHECK(s.rfind("shot_index,outcome,weight,syndrome_bits\r\n", 0) == 0);
    CHECK(std::count(s.begin(), s.end(), '\n') == 4);
}

TEST_CASE("ideal expectation with measurement uses dephasing") {
    Circuit c(1, {Layer{{Gate{GateKind::H, {0}, {}}}}, Layer{{Gate{GateKind::M, {0}, {}}}},
                  Layer{{Gate{GateKind::H, {0}, {}}}}});
    CHECK(std::abs(ideal_expectation(c, PauliObservable("X"))) < 1e-12);
    CHECK(std::abs(ideal_expectation(c, PauliObservable("Z"))) < 1e-12);
}
