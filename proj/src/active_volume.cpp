#include "cvblab/active_volume.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <Eigen/Dense>

#include "cvblab/errors.hpp"
#include "cvblab/parallel.hpp"
#include "cvblab/sim.hpp"

namespace cvb {

namespace {

constexpr std::uint64_t kDomainGreedy = 11;
constexpr std::uint64_t kDomainShift = 12;

std::vector<std::uint32_t> touched_qubits(const Circuit &c, const std::vector<std::size_t> &ids) {
    std::set<std::uint32_t> qs;
    const auto refs = c.gate_refs();
    for (auto id : ids) {
        const auto &g = c.layers()[refs[id].layer].gates[refs[id].index];
        qs.insert(g.qubits.begin(), g.qubits.end());
    }
    return {qs.begin(), qs.end()};
}

void check_velocity(double v) {
    if (!(v >= 0 && v <= 1)) {
        throw ConfigError("spreading velocity must lie in [0,1]");
    }
}

void check_dimension(int d) {
    if (d < 1) {
        throw ConfigError("lattice dimension must be >= 1");
    }
}

}  // namespace

nlohmann::json ActiveVolume::to_json() const {
    return {{"V", V()}, {"n_active", n_active()}, {"gate_ids", gate_ids}, {"active_qubits", active_qubits}};
}

ActiveVolume light_cone_volume(const Circuit &circuit, const PauliObservable &obs) {
    if (obs.n_qubits() != circuit.n_qubits()) {
        throw ConfigError("observable size does not match circuit");
    }
    std::vector<bool> cone(circuit.n_qubits(), false);
    for (auto q : obs.support()) {
        cone[q] = true;
    }
    const auto refs = circuit.gate_refs();
    ActiveVolume av;
    for (std::size_t i = refs.size(); i-- > 0;) {
        const auto &g = circuit.layers()[refs[i].layer].gates[refs[i].index];
        if (!g.is_two_qubit()) {
            continue;
        }
        if (cone[g.qubits[0]] || cone[g.qubits[1]]) {
            cone[g.qubits[0]] = cone[g.qubits[1]] = true;
            av.gate_ids.push_back(refs[i].id);
        }
    }
    std::sort(av.gate_ids.begin(), av.gate_ids.end());
    av.active_qubits = touched_qubits(circuit, av.gate_ids);
    return av;
}

Gate haar_two_qubit_gate(std::uint32_t q0, std::uint32_t q1, Rng &rng) {
    Eigen::Matrix4cd z;
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
            z(r, c) = cplx(rng.normal(), rng.normal()) / std::sqrt(2.0);
        }
    }
    Eigen::HouseholderQR<Eigen::Matrix4cd> qr(z);
    Eigen::Matrix4cd q = qr.householderQ();
    Eigen::Matrix4cd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int c = 0; c < 4; ++c) {
        const double mag = std::abs(r(c, c));
        q.col(c) *= mag > 0 ? r(c, c) / mag : cplx(1, 0);
    }
    Gate g{GateKind::U2, {q0, q1}, {}};
    g.params.reserve(32);
    for (int row = 0; row < 4; ++row) {
        for (int col = 0; col < 4; ++col) {
            g.params.push_back(q(row, col).real());
            g.params.push_back(q(row, col).imag());
        }
    }
    return g;
}

Circuit replace_gates(const Circuit &circuit, const std::vector<std::size_t> &gate_ids, Rng &rng) {
    std::vector<Layer> layers = circuit.layers();
    const auto refs = circuit.gate_refs();
    for (auto id : gate_ids) {
        if (id >= refs.size()) {
            throw ConfigError("gate id out of range");
        }
        Gate &g = layers[refs[id].layer].gates[refs[id].index];
        if (!g.is_two_qubit()) {
            throw ContractViolation("only two-qubit gates are replaced");
        }
        g = haar_two_qubit_gate(g.qubits[0], g.qubits[1], rng);
    }
    return Circuit(circuit.n_qubits(), std::move(layers), circuit.geometry());
}

double max_replacement_shift(const Circuit &circuit, const PauliObservable &obs,
                             const std::vector<std::size_t> &gate_ids, std::size_t trials, std::uint64_t seed) {
    if (gate_ids.empty()) {
        return 0.0;
    }
    const double base = ideal_expectation(circuit, obs);
    std::vector<double> shifts(trials, 0.0);
    parallel_for(trials, 1, [&](std::size_t begin, std::size_t end) {
        for (std::size_t t = begin; t < end; ++t) {
            Rng rng(seed, t, kDomainShift);
            shifts[t] = std::abs(ideal_expectation(replace_gates(circuit, gate_ids, rng), obs) - base);
        }
    });
    return trials ? *std::max_element(shifts.begin(), shifts.end()) : 0.0;
}

ActiveVolume brute_force_active_volume(const Circuit &circuit, const PauliObservable &obs, double epsilon,
                                       std::size_t trials, std::uint64_t seed) {
    if (circuit.n_qubits() > kOracleQubitLimit) {
        throw CapacityError("replacement oracle limited to " + std::to_string(kOracleQubitLimit) + " qubits");
    }
    if (!(epsilon > 0)) {
        throw ConfigError("epsilon must be positive");
    }
    const double threshold = epsilon / 10.0;
    const auto refs = circuit.gate_refs();
    ActiveVolume cone = light_cone_volume(circuit, obs);

    // Gates outside the cone cannot influence <O>, so only cone gates are tested.
    std::vector<std::size_t> kept = cone.gate_ids;
    std::vector<std::size_t> dropped;
    std::vector<std::size_t> order = cone.gate_ids;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return refs[a].layer != refs[b].layer ? refs[a].layer > refs[b].layer : a > b;
    });
    for (std::size_t k = 0; k < order.size(); ++k) {
        std::vector<std::size_t> trial_set = dropped;
        trial_set.push_back(order[k]);
        const double shift =
            max_replacement_shift(circuit, obs, trial_set, trials, stream_key(seed, k, kDomainGreedy));
        if (shift < 0.5 * threshold) {
            dropped = std::move(trial_set);
        }
    }
    std::sort(dropped.begin(), dropped.end());
    ActiveVolume av;
    std::set_difference(kept.begin(), kept.end(), dropped.begin(), dropped.end(), std::back_inserter(av.gate_ids));
    av.active_qubits = touched_qubits(circuit, av.gate_ids);
    return av;
}

double c_d(int d) {
    check_dimension(d);
    return static_cast<double>(d) / (d + 1.0);
}

double pyramid_qubits(double v, double depth, int d) {
    check_velocity(v);
    check_dimension(d);
    if (depth < 0) {
        throw ConfigError("depth must be non-negative");
    }
    return std::pow(2.0 * v * depth / d, d);
}

double pyramid_volume(double n, int d, double v) {
    check_velocity(v);
    if (v == 0) {
        throw GeometryError("spreading velocity 0 gives a singular pyramid");
    }
    if (n < 0) {
        throw ConfigError("qubit count must be non-negative");
    }
    const double cd = c_d(d);
    return cd / (4.0 * v) * std::pow(n, 1.0 / cd);
}

double qubits_of_volume(double V, int d, double v) {
    check_velocity(v);
    if (v == 0) {
        throw GeometryError("spreading velocity 0 gives a singular pyramid");
    }
    if (V < 0) {
        throw ConfigError("volume must be non-negative");
    }
    const double cd = c_d(d);
    return std::pow(4.0 * v * V / cd, cd);
}

double pyramid_depth(double n, double v, int d) {
    check_velocity(v);
    check_dimension(d);
    if (v == 0) {
        throw GeometryError("spreading velocity 0 gives a singular pyramid");
    }
    return d / (2.0 * v) * std::pow(n, 1.0 / d);
}

}  // namespace cvb
