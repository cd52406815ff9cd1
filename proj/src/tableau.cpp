#include "cvblab/tableau.hpp"

#include <utility>

#include "cvblab/errors.hpp"

namespace cvb {

namespace {

int bit(std::uint64_t v, std::uint32_t q) { return static_cast<int>((v >> q) & 1u); }

// Exponent of i picked up when multiplying single-qubit Paulis (x1,z1)(x2,z2).
int g(int x1, int z1, int x2, int z2) {
    if (!x1 && !z1) return 0;
    if (x1 && z1) return z2 - x2;
    if (x1) return z2 * (2 * x2 - 1);
    return x2 * (1 - 2 * z2);
}

}  // namespace

Tableau::Tableau(std::size_t n_qubits) : n_(n_qubits), rows_(2 * n_qubits) {
    if (n_ > 64) {
        throw CapacityError("stabilizer tableau limited to 64 qubits");
    }
    for (std::size_t i = 0; i < n_; ++i) {
        rows_[i].x = std::uint64_t{1} << i;
        rows_[n_ + i].z = std::uint64_t{1} << i;
    }
}

void Tableau::h(std::uint32_t q) {
    const std::uint64_t m = std::uint64_t{1} << q;
    for (auto &row : rows_) {
        const bool xb = row.x & m, zb = row.z & m;
        row.r ^= xb && zb;
        row.x = (row.x & ~m) | (zb ? m : 0);
        row.z = (row.z & ~m) | (xb ? m : 0);
    }
}

void Tableau::s(std::uint32_t q) {
    const std::uint64_t m = std::uint64_t{1} << q;
    for (auto &row : rows_) {
        const bool xb = row.x & m, zb = row.z & m;
        row.r ^= xb && zb;
        if (xb) {
            row.z ^= m;
        }
    }
}

void Tableau::cnot(std::uint32_t c, std::uint32_t t) {
    const std::uint64_t mc = std::uint64_t{1} << c, mt = std::uint64_t{1} << t;
    for (auto &row : rows_) {
        const int xc = bit(row.x, c), zc = bit(row.z, c), xt = bit(row.x, t), zt = bit(row.z, t);
        row.r ^= xc & zt & (xt ^ zc ^ 1);
        if (xc) {
            row.x ^= mt;
        }
        if (zt) {
            row.z ^= mc;
        }
    }
}

void Tableau::apply(const Gate &gate) {
    const auto &q = gate.qubits;
    switch (gate.kind) {
        case GateKind::I: return;
        case GateKind::X: h(q[0]); s(q[0]); s(q[0]); h(q[0]); return;
        case GateKind::Z: s(q[0]); s(q[0]); return;
        case GateKind::Y: s(q[0]); s(q[0]); h(q[0]); s(q[0]); s(q[0]); h(q[0]); return;
        case GateKind::H: h(q[0]); return;
        case GateKind::S: s(q[0]); return;
        case GateKind::SDG: s(q[0]); s(q[0]); s(q[0]); return;
        case GateKind::SX: h(q[0]); s(q[0]); h(q[0]); return;
        case GateKind::SXDG: h(q[0]); s(q[0]); s(q[0]); s(q[0]); h(q[0]); return;
        case GateKind::CNOT: cnot(q[0], q[1]); return;
        case GateKind::CZ: h(q[1]); cnot(q[0], q[1]); h(q[1]); return;
        case GateKind::SWAP: cnot(q[0], q[1]); cnot(q[1], q[0]); cnot(q[0], q[1]); return;
        case GateKind::M: measure(q[0]); return;
        case GateKind::R: reset(q[0]); return;
        default: throw ContractViolation("non-Clifford gate '" + std::string(gate_info(gate.kind).name) +
                                         "' in stabilizer simulation");
    }
}

void Tableau::rowsum(Row &hrow, const Row &irow) const {
    int sum = 2 * hrow.r + 2 * irow.r;
    for (std::uint32_t j = 0; j < n_; ++j) {
        sum += g(bit(irow.x, j), bit(irow.z, j), bit(hrow.x, j), bit(hrow.z, j));
    }
    sum = ((sum % 4) + 4) % 4;
    hrow.r = sum == 2 ? 1 : 0;
    hrow.x ^= irow.x;
    hrow.z ^= irow.z;
}

bool Tableau::is_deterministic(std::uint32_t q) const {
    for (std::size_t p = n_; p < 2 * n_; ++p) {
        if (bit(rows_[p].x, q)) {
            return false;
        }
    }
    return true;
}

int Tableau::measure(std::uint32_t q, int random_bit) {
    std::size_t p = 2 * n_;
    for (std::size_t i = n_; i < 2 * n_; ++i) {
        if (bit(rows_[i].x, q)) {
            p = i;
            break;
        }
    }
    if (p < 2 * n_) {
        for (std::size_t i = 0; i < 2 * n_; ++i) {
            if (i != p && bit(rows_[i].x, q)) {
                rowsum(rows_[i], rows_[p]);
            }
        }
        rows_[p - n_] = rows_[p];
        rows_[p] = Row{0, std::uint64_t{1} << q, random_bit & 1};
        return random_bit & 1;
    }
    Row scratch;
    for (std::size_t i = 0; i < n_; ++i) {
        if (bit(rows_[i].x, q)) {
            rowsum(scratch, rows_[i + n_]);
        }
    }
    return scratch.r;
}

void Tableau::reset(std::uint32_t q) {
    if (measure(q)) {
        h(q);
        s(q);
        s(q);
        h(q);
    }
}

}  // namespace cvb
