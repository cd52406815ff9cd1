#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace cvb {

using cplx = std::complex<double>;

// Single-qubit Pauli in symplectic encoding: bit 0 is the X part, bit 1 the Z part.
enum class Pauli : std::uint8_t { I = 0, X = 1, Z = 2, Y = 3 };

char pauli_char(Pauli p);
Pauli pauli_from_char(char c);

enum class GateKind : std::uint8_t {
    I, X, Y, Z, H, S, SDG, SX, SXDG, RX, RY, RZ,
    CZ, CNOT, SWAP, FSIM,
    U1,  // explicit 2x2 unitary, params = re/im pairs row-major
    U2,  // explicit 4x4 unitary, params = re/im pairs row-major
    M,   // Z-basis measurement, result goes to the measurement record
    R,   // reset to |0>
};

struct GateInfo {
    std::string_view name;
    int arity;
    int n_params;  // -1 = unchecked
    bool unitary;
    bool clifford;
};

const GateInfo &gate_info(GateKind kind);
GateKind gate_kind_from_name(std::string_view name);

struct Gate {
    GateKind kind = GateKind::I;
    std::vector<std::uint32_t> qubits;
    std::vector<double> params;

    int arity() const { return static_cast<int>(qubits.size()); }
    bool is_two_qubit() const { return qubits.size() == 2; }
    bool operator==(const Gate &) const = default;
};

// Dense matrix of a unitary gate. 2x2 or 4x4 row-major; for two-qubit gates the
// basis index is 2*bit(qubits[0]) + bit(qubits[1]).
std::vector<cplx> gate_matrix(const Gate &gate);

struct Layer {
    std::vector<Gate> gates;
    bool operator==(const Layer &) const = default;
};

struct LatticeGeometry {
    int d = 1;
    int side = 2;

    std::size_t n_sites() const;
    std::vector<int> coords(std::uint32_t site) const;
    std::uint32_t site(std::span<const int> coords) const;
    bool adjacent(std::uint32_t a, std::uint32_t b) const;
    bool operator==(const LatticeGeometry &) const = default;
};

// Layered circuit. Validated on construction and immutable afterwards.
class Circuit {
  public:
    Circuit() = default;
    Circuit(std::size_t n_qubits, std::vector<Layer> layers,
            std::optional<LatticeGeometry> geometry = std::nullopt);

    std::size_t n_qubits() const { return n_qubits_; }
    const std::vector<Layer> &layers() const { return layers_; }
    const std::optional<LatticeGeometry> &geometry() const { return geometry_; }
    std::size_t depth() const { return layers_.size(); }

    std::size_t gate_count() const { return gate_count_; }
    std::size_t two_qubit_gate_count() const;
    bool has_measurements() const;
    bool is_clifford() const;

    // Gates are numbered in layer order; id = running index.
    struct GateRef {
        std::size_t id;
        std::size_t layer;
        std::size_t index;
    };
    std::vector<GateRef> gate_refs() const;

    bool operator==(const Circuit &) const = default;

  private:
    std::size_t n_qubits_ = 0;
    std::vector<Layer> layers_;
    std::optional<LatticeGeometry> geometry_;
    std::size_t gate_count_ = 0;
};

// Tensor product of Paulis; operator norm 1 by construction.
class PauliObservable {
  public:
    PauliObservable() = default;
    explicit PauliObservable(std::string paulis);
    static PauliObservable single(std::size_t n, std::uint32_t qubit, char p = 'Z');

    const std::string &str() const { return paulis_; }
    std::size_t n_qubits() const { return paulis_.size(); }
    Pauli at(std::size_t q) const { return pauli_from_char(paulis_[q]); }
    std::vector<std::uint32_t> support() const;
    bool trivial() const { return support().empty(); }
    bool operator==(const PauliObservable &) const = default;

  private:
    std::string paulis_;
};

// Bit masks of a Pauli string: P = i^{n_y} X^x Z^z. Requires n <= 64.
struct PauliMasks {
    std::uint64_t x = 0;
    std::uint64_t z = 0;
    int n_y = 0;
};
PauliMasks pauli_masks(const PauliObservable &obs);

struct GateSpec {
    GateKind kind = GateKind::CZ;
    std::vector<double> params;
};

// Dense brickwork on a hypercubic lattice with open boundaries. Layer t acts
// along axis t mod d on edges whose lower coordinate has parity (t / d) mod 2.
Circuit build_brickwork_circuit(int d, int side, int depth, const GateSpec &gate);

nlohmann::json to_json(const Circuit &circuit);
Circuit circuit_from_json(const nlohmann::json &j);
nlohmann::json to_json(const PauliObservable &obs);
PauliObservable observable_from_json(const nlohmann::json &j);

}  // namespace cvb
