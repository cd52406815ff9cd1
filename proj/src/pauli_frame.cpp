#include "cvblab/pauli_frame.hpp"

#include "cvblab/errors.hpp"

namespace cvb {

namespace {
std::uint64_t mask(std::uint32_t q) { return std::uint64_t{1} << q; }
std::uint64_t get(std::uint64_t v, std::uint32_t q) { return (v >> q) & 1u; }
}  // namespace

PauliFrame::PauliFrame(std::size_t n_qubits, Rng *rng) : n_(n_qubits), rng_(rng) {
    if (n_ > 64) {
        throw CapacityError("Pauli frame limited to 64 qubits");
    }
    randomize_z(n_ == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n_) - 1);
}

void PauliFrame::randomize_z(std::uint64_t m) {
    if (rng_) {
        z_ ^= rng_->next() & m;
    }
}

void PauliFrame::h(std::uint32_t q) {
    const std::uint64_t xb = get(x_, q), zb = get(z_, q);
    x_ = (x_ & ~mask(q)) | (zb << q);
    z_ = (z_ & ~mask(q)) | (xb << q);
}

void PauliFrame::s(std::uint32_t q) { z_ ^= get(x_, q) << q; }
void PauliFrame::sx(std::uint32_t q) { x_ ^= get(z_, q) << q; }

void PauliFrame::cnot(std::uint32_t c, std::uint32_t t) {
    x_ ^= get(x_, c) << t;
    z_ ^= get(z_, t) << c;
}

void PauliFrame::cz(std::uint32_t a, std::uint32_t b) {
    z_ ^= get(x_, b) << a;
    z_ ^= get(x_, a) << b;
}

void PauliFrame::swap(std::uint32_t a, std::uint32_t b) {
    const std::uint64_t xa = get(x_, a), xb = get(x_, b), za = get(z_, a), zb = get(z_, b);
    x_ = (x_ & ~(mask(a) | mask(b))) | (xa << b) | (xb << a);
    z_ = (z_ & ~(mask(a) | mask(b))) | (za << b) | (zb << a);
}

void PauliFrame::apply(const Gate &gate) {
    const auto &q = gate.qubits;
    switch (gate.kind) {
        case GateKind::I:
        case GateKind::X:
        case GateKind::Y:
        case GateKind::Z: return;
        case GateKind::H: h(q[0]); return;
        case GateKind::S:
        case GateKind::SDG: s(q[0]); return;
        case GateKind::SX:
        case GateKind::SXDG: sx(q[0]); return;
        case GateKind::CNOT: cnot(q[0], q[1]); return;
        case GateKind::CZ: cz(q[0], q[1]); return;
        case GateKind::SWAP: swap(q[0], q[1]); return;
        case GateKind::M: measure(q[0]); return;
        case GateKind::R: reset(q[0]); return;
        default:
            throw ContractViolation("non-Clifford gate '" + std::string(gate_info(gate.kind).name) +
                                    "' in Pauli frame simulation");
    }
}

void PauliFrame::inject(std::uint32_t q, Pauli p) {
    const auto code = static_cast<std::uint64_t>(p);
    x_ ^= (code & 1u) << q;
    z_ ^= ((code >> 1) & 1u) << q;
}

int PauliFrame::measure(std::uint32_t q) {
    const int flip = static_cast<int>(get(x_, q));
    randomize_z(mask(q));
    return flip;
}

void PauliFrame::reset(std::uint32_t q) {
    x_ &= ~mask(q);
    z_ &= ~mask(q);
    randomize_z(mask(q));
}

}  // namespace cvb
