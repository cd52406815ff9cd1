#include "cvblab/statevector.hpp"

#include <atomic>
#include <bit>
#include <cmath>

#include "cvblab/errors.hpp"
#include "kernels.hpp"

namespace cvb {

namespace {
std::atomic<std::size_t> g_sv_limit{24};
}

void set_statevector_limit(std::size_t n) { g_sv_limit = n; }
std::size_t statevector_limit() { return g_sv_limit; }

StateVector::StateVector(std::size_t n_qubits) : n_(n_qubits) {
    if (n_ > statevector_limit() || n_ > 62) {
        throw CapacityError("statevector limited to " + std::to_string(statevector_limit()) +
                            " qubits, circuit has " + std::to_string(n_));
    }
    amps_.assign(std::size_t{1} << n_, cplx{0, 0});
    amps_[0] = 1;
}

void StateVector::apply(const Gate &gate) {
    switch (gate.kind) {
        case GateKind::I:
            return;
        case GateKind::X:
        case GateKind::Y:
        case GateKind::Z:
            apply_pauli(gate.qubits[0], gate.kind == GateKind::X   ? Pauli::X
                                        : gate.kind == GateKind::Y ? Pauli::Y
                                                                   : Pauli::Z);
            return;
        case GateKind::M:
        case GateKind::R:
            throw ContractViolation("measurement/reset need an RNG; use measure()/reset()");
        default:
            break;
    }
    auto m = gate_matrix(gate);
    if (gate.is_two_qubit()) {
        apply_matrix2(m, gate.qubits[0], gate.qubits[1]);
    } else {
        apply_matrix1(m, gate.qubits[0]);
    }
}

void StateVector::apply_matrix1(std::span<const cplx> m, std::uint32_t q) {
    kernels::apply_1q(amps_, m, std::size_t{1} << q);
}

void StateVector::apply_matrix2(std::span<const cplx> m, std::uint32_t q0, std::uint32_t q1) {
    kernels::apply_2q(amps_, m, std::size_t{1} << q0, std::size_t{1} << q1);
}

void StateVector::apply_pauli(std::uint32_t q, Pauli p) {
    const std::uint64_t bit = std::uint64_t{1} << q;
    const auto code = static_cast<std::uint8_t>(p);
    apply_pauli_masks(code & 1u ? bit : 0, code & 2u ? bit : 0);
}

void StateVector::apply_pauli_masks(std::uint64_t xmask, std::uint64_t zmask) {
    kernels::apply_xz(amps_, xmask, zmask);
}

int StateVector::measure(std::uint32_t q, Rng &rng) {
    const std::size_t bit = std::size_t{1} << q;
    double p1 = 0;
    for (std::size_t i = 0; i < amps_.size(); ++i) {
        if (i & bit) {
            p1 += std::norm(amps_[i]);
        }
    }
    const int outcome = rng.uniform() < p1 ? 1 : 0;
    const double keep = outcome ? p1 : 1.0 - p1;
    const double scale = keep > 0 ? 1.0 / std::sqrt(keep) : 0.0;
    for (std::size_t i = 0; i < amps_.size(); ++i) {
        const bool set = (i & bit) != 0;
        amps_[i] = set == static_cast<bool>(outcome) ? amps_[i] * scale : cplx{0, 0};
    }
    return outcome;
}

void StateVector::reset(std::uint32_t q, Rng &rng) {
    if (measure(q, rng)) {
        apply_pauli(q, Pauli::X);
    }
}

double StateVector::expectation(const PauliObservable &obs) const {
    if (obs.n_qubits() != n_) {
        throw ConfigError("observable size does not match state");
    }
    const auto pm = pauli_masks(obs);
    const std::uint64_t xm = pm.x, zm = pm.z;
    const int n_y = pm.n_y;
    // P = i^{n_y} X^xm Z^zm
    cplx acc = 0;
    for (std::size_t i = 0; i < amps_.size(); ++i) {
        const double sign = (std::popcount(i & zm) & 1) ? -1.0 : 1.0;
        acc += std::conj(amps_[i ^ xm]) * amps_[i] * sign;
    }
    static const cplx kPhase[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    return (kPhase[n_y % 4] * acc).real();
}

double StateVector::norm() const {
    double s = 0;
    for (const auto &a : amps_) {
        s += std::norm(a);
    }
    return std::sqrt(s);
}

}  // namespace cvb
