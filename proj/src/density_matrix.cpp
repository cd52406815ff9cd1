#include "cvblab/density_matrix.hpp"

#include <bit>

#include "cvblab/errors.hpp"
#include "kernels.hpp"

namespace cvb {

DensityMatrix::DensityMatrix(std::size_t n_qubits) : n_(n_qubits) {
    if (n_ > kDensityMatrixLimit) {
        throw CapacityError("density matrix limited to " + std::to_string(kDensityMatrixLimit) + " qubits");
    }
    rho_.assign(std::size_t{1} << (2 * n_), cplx{0, 0});
    rho_[0] = 1;
}

void DensityMatrix::apply_unitary(const Gate &gate) {
    if (!gate_info(gate.kind).unitary) {
        throw ContractViolation("apply_unitary on a non-unitary gate");
    }
    auto m = gate_matrix(gate);
    std::vector<cplx> mc(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        mc[i] = std::conj(m[i]);
    }
    if (gate.is_two_qubit()) {
        const std::size_t b0 = std::size_t{1} << gate.qubits[0], b1 = std::size_t{1} << gate.qubits[1];
        kernels::apply_2q(rho_, m, b0, b1);
        kernels::apply_2q(rho_, mc, b0 << n_, b1 << n_);
    } else {
        const std::size_t b = std::size_t{1} << gate.qubits[0];
        kernels::apply_1q(rho_, m, b);
        kernels::apply_1q(rho_, mc, b << n_);
    }
}

void DensityMatrix::conjugate_pauli(std::uint64_t xmask, std::uint64_t zmask) {
    // the i^{#Y} phases cancel between P and P^dagger
    kernels::apply_xz(rho_, xmask | (xmask << n_), zmask | (zmask << n_));
}

void DensityMatrix::apply_channel(const ErrorChannel &channel) {
    switch (channel.kind()) {
        case ErrorChannel::Kind::Identity:
            return;
        case ErrorChannel::Kind::Global: {
            const double q = channel.q();
            const double tr = trace();
            const std::size_t dim = std::size_t{1} << n_;
            for (auto &v : rho_) {
                v *= 1.0 - q;
            }
            for (std::size_t r = 0; r < dim; ++r) {
                rho_[r | (r << n_)] += q * tr / static_cast<double>(dim);
            }
            return;
        }
        case ErrorChannel::Kind::PauliTable: {
            const auto &qs = channel.qubits();
            const auto &probs = channel.probs();
            std::vector<cplx> acc(rho_.size());
            const std::vector<cplx> orig = rho_;
            for (std::size_t idx = 0; idx < probs.size(); ++idx) {
                if (probs[idx] == 0) {
                    continue;
                }
                std::uint64_t xm = 0, zm = 0;
                for (std::size_t i = 0; i < qs.size(); ++i) {
                    const auto code = (idx >> (2 * i)) & 3u;
                    xm |= static_cast<std::uint64_t>(code & 1u) << qs[i];
                    zm |= static_cast<std::uint64_t>(code >> 1) << qs[i];
                }
                rho_ = orig;
                conjugate_pauli(xm, zm);
                for (std::size_t k = 0; k < acc.size(); ++k) {
                    acc[k] += probs[idx] * rho_[k];
                }
            }
            rho_ = std::move(acc);
            return;
        }
    }
}

void DensityMatrix::dephase(std::uint32_t q) {
    const std::size_t rb = std::size_t{1} << q, cb = rb << n_;
    for (std::size_t i = 0; i < rho_.size(); ++i) {
        if (static_cast<bool>(i & rb) != static_cast<bool>(i & cb)) {
            rho_[i] = 0;
        }
    }
}

void DensityMatrix::reset(std::uint32_t q) {
    const std::size_t rb = std::size_t{1} << q, cb = rb << n_;
    for (std::size_t i = 0; i < rho_.size(); ++i) {
        if (!(i & rb) && !(i & cb)) {
            rho_[i] += rho_[i | rb | cb];
        }
    }
    for (std::size_t i = 0; i < rho_.size(); ++i) {
        if ((i & rb) || (i & cb)) {
            rho_[i] = 0;
        }
    }
}

double DensityMatrix::expectation(const PauliObservable &obs) const {
    if (obs.n_qubits() != n_) {
        throw ConfigError("observable size does not match state");
    }
    const auto pm = pauli_masks(obs);
    // tr(O rho) = i^{n_y} sum_r (-1)^{r.z} rho[r, r^x]
    cplx acc = 0;
    const std::size_t dim = std::size_t{1} << n_;
    for (std::size_t r = 0; r < dim; ++r) {
        const double sign = (std::popcount(r & pm.z) & 1) ? -1.0 : 1.0;
        acc += sign * rho_[r | ((r ^ pm.x) << n_)];
    }
    static const cplx kPhase[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    return (kPhase[pm.n_y % 4] * acc).real();
}

double DensityMatrix::trace() const {
    double t = 0;
    const std::size_t dim = std::size_t{1} << n_;
    for (std::size_t r = 0; r < dim; ++r) {
        t += rho_[r | (r << n_)].real();
    }
    return t;
}

DensityMatrix evolve_density_matrix(const NoisyCircuit &noisy) {
    const Circuit &c = noisy.circuit;
    DensityMatrix rho(c.n_qubits());
    std::size_t id = 0;
    for (const auto &layer : c.layers()) {
        for (const auto &g : layer.gates) {
            if (g.kind == GateKind::M) {
                rho.dephase(g.qubits[0]);
            } else if (g.kind == GateKind::R) {
                rho.reset(g.qubits[0]);
            } else {
                rho.apply_unitary(g);
            }
            if (id < noisy.channels.size()) {
                rho.apply_channel(noisy.channels[id]);
            }
            ++id;
        }
    }
    return rho;
}

}  // namespace cvb
