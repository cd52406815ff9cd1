#include "cvblab/noise.hpp"

#include <bit>
#include <cmath>
#include <numeric>

#include "cvblab/errors.hpp"

namespace cvb {

namespace {

void check_probability(double p, const char *what) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw ConfigError(std::string(what) + " must lie in [0,1]");
    }
}

// Symplectic inner product of two k-qubit Paulis in the 4^i packed encoding.
int symplectic(std::size_t a, std::size_t b) {
    int s = 0;
    while (a || b) {
        const auto pa = a & 3u, pb = b & 3u;
        s ^= static_cast<int>(((pa & 1u) & (pb >> 1)) ^ ((pa >> 1) & (pb & 1u)));
        a >>= 2;
        b >>= 2;
    }
    return s;
}

std::vector<double> single_qubit_table(const PauliChannel &pc) {
    // symplectic index: I=0, X=1, Z=2, Y=3
    return {1.0 - pc.px - pc.py - pc.pz, pc.px, pc.pz, pc.py};
}

}  // namespace

double infidelity_from_depolarizing(double q, std::size_t k) {
    return (1.0 - std::pow(4.0, -static_cast<double>(k))) * q;
}

double depolarizing_from_infidelity(double gamma, std::size_t k) {
    return gamma / (1.0 - std::pow(4.0, -static_cast<double>(k)));
}

void NoiseModel::validate() const {
    check_probability(measurement_flip, "measurement flip probability");
    std::visit(
        [](const auto &m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, GlobalDepolarizing>) {
                check_probability(m.q, "depolarizing probability q");
            } else if constexpr (std::is_same_v<T, LocalDepolarizing>) {
                check_probability(m.gamma_1q, "single-qubit infidelity");
                check_probability(m.gamma_2q, "two-qubit infidelity");
                if (m.gamma_1q > 0.75 || m.gamma_2q > 15.0 / 16.0) {
                    throw ConfigError("infidelity exceeds the fully depolarizing value");
                }
            } else {
                check_probability(m.px, "p_X");
                check_probability(m.py, "p_Y");
                check_probability(m.pz, "p_Z");
                if (m.px + m.py + m.pz > 1.0 + 1e-12) {
                    throw ConfigError("Pauli channel probabilities sum to more than 1");
                }
            }
        },
        kind);
}

double NoiseModel::two_qubit_infidelity(std::size_t n_qubits) const {
    return std::visit(
        [&](const auto &m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, GlobalDepolarizing>) {
                return infidelity_from_depolarizing(m.q, n_qubits);
            } else if constexpr (std::is_same_v<T, LocalDepolarizing>) {
                return m.gamma_2q;
            } else {
                const double p1 = m.px + m.py + m.pz;
                return 1.0 - (1.0 - p1) * (1.0 - p1);
            }
        },
        kind);
}

ErrorChannel ErrorChannel::global(double q) {
    ErrorChannel c;
    if (q > 0) {
        c.kind_ = Kind::Global;
        c.q_ = q;
    }
    return c;
}

ErrorChannel ErrorChannel::pauli_table(std::vector<std::uint32_t> qubits, std::vector<double> probs) {
    if (probs.size() != (std::size_t{1} << (2 * qubits.size()))) {
        throw ConfigError("Pauli table size does not match channel arity");
    }
    ErrorChannel c;
    double err = std::accumulate(probs.begin() + 1, probs.end(), 0.0);
    if (err <= 0) {
        return c;
    }
    c.kind_ = Kind::PauliTable;
    c.qubits_ = std::move(qubits);
    c.probs_ = std::move(probs);
    return c;
}

double ErrorChannel::fire_probability() const {
    switch (kind_) {
        case Kind::Identity: return 0.0;
        case Kind::Global: return q_;
        case Kind::PauliTable: return 1.0 - probs_[0];
    }
    return 0.0;
}

ErrorChannel ErrorChannel::scaled(double gain) const {
    switch (kind_) {
        case Kind::Identity: return *this;
        case Kind::Global:
            if (q_ * gain > 1.0) {
                throw ConfigError("amplified depolarizing probability exceeds 1");
            }
            return global(q_ * gain);
        case Kind::PauliTable: {
            std::vector<double> p = probs_;
            double err = 0;
            for (std::size_t i = 1; i < p.size(); ++i) {
                p[i] *= gain;
                err += p[i];
            }
            if (err > 1.0) {
                throw ConfigError("amplified error probability exceeds 1");
            }
            p[0] = 1.0 - err;
            return pauli_table(qubits_, std::move(p));
        }
    }
    return *this;
}

std::size_t NoisyCircuit::noisy_gate_count() const {
    std::size_t v = 0;
    for (const auto &c : channels) {
        v += !c.is_identity();
    }
    return v;
}

NoisyCircuit NoisyCircuit::amplified(double gain) const {
    NoisyCircuit out{circuit, {}, measurement_flip};
    out.channels.reserve(channels.size());
    for (const auto &c : channels) {
        out.channels.push_back(c.scaled(gain));
    }
    return out;
}

std::optional<double> NoisyCircuit::uniform_global_q() const {
    std::optional<double> q;
    for (const auto &c : channels) {
        if (c.is_identity()) {
            continue;
        }
        if (c.kind() != ErrorChannel::Kind::Global || (q && *q != c.q())) {
            return std::nullopt;
        }
        q = c.q();
    }
    return q ? q : std::optional<double>(0.0);
}

NoisyCircuit attach_noise(const Circuit &circuit, const NoiseModel &model) {
    model.validate();
    NoisyCircuit out{circuit, {}, model.measurement_flip};
    out.channels.reserve(circuit.gate_count());
    for (const auto &layer : circuit.layers()) {
        for (const auto &g : layer.gates) {
            const bool unitary = gate_info(g.kind).unitary;
            if (g.kind == GateKind::M) {
                out.channels.emplace_back();
                continue;
            }
            out.channels.push_back(std::visit(
                [&](const auto &m) -> ErrorChannel {
                    using T = std::decay_t<decltype(m)>;
                    if constexpr (std::is_same_v<T, GlobalDepolarizing>) {
                        return unitary ? ErrorChannel::global(m.q) : ErrorChannel{};
                    } else if constexpr (std::is_same_v<T, LocalDepolarizing>) {
                        const std::size_t k = g.qubits.size();
                        const double gamma = k == 1 ? m.gamma_1q : m.gamma_2q;
                        const std::size_t dim = std::size_t{1} << (2 * k);
                        std::vector<double> probs(dim, gamma / static_cast<double>(dim - 1));
                        probs[0] = 1.0 - gamma;
                        return ErrorChannel::pauli_table(g.qubits, std::move(probs));
                    } else {
                        if (g.qubits.size() == 1 && !m.on_single_qubit_gates) {
                            return ErrorChannel{};
                        }
                        auto single = single_qubit_table(m);
                        std::vector<double> probs = single;
                        if (g.qubits.size() == 2) {
                            probs.assign(16, 0.0);
                            for (std::size_t a = 0; a < 4; ++a) {
                                for (std::size_t b = 0; b < 4; ++b) {
                                    probs[a + 4 * b] = single[a] * single[b];
                                }
                            }
                        }
                        return ErrorChannel::pauli_table(g.qubits, std::move(probs));
                    }
                },
                model.kind));
        }
    }
    return out;
}

std::vector<double> pauli_fidelities(const std::vector<double> &probs) {
    const std::size_t dim = probs.size();
    if (!std::has_single_bit(dim)) {
        throw ConfigError("Pauli table size must be a power of 4");
    }
    std::vector<double> f(dim, 0.0);
    for (std::size_t p = 0; p < dim; ++p) {
        for (std::size_t q = 0; q < dim; ++q) {
            f[p] += symplectic(p, q) ? -probs[q] : probs[q];
        }
    }
    return f;
}

}  // namespace cvb
