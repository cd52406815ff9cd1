#include "cvblab/circuit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "cvblab/errors.hpp"

namespace cvb {

namespace {

constexpr std::array<GateInfo, 20> kGateTable = {{
    {"I", 1, 0, true, true},
    {"X", 1, 0, true, true},
    {"Y", 1, 0, true, true},
    {"Z", 1, 0, true, true},
    {"H", 1, 0, true, true},
    {"S", 1, 0, true, true},
    {"SDG", 1, 0, true, true},
    {"SX", 1, 0, true, true},
    {"SXDG", 1, 0, true, true},
    {"RX", 1, 1, true, false},
    {"RY", 1, 1, true, false},
    {"RZ", 1, 1, true, false},
    {"CZ", 2, 0, true, true},
    {"CNOT", 2, 0, true, true},
    {"SWAP", 2, 0, true, true},
    {"FSIM", 2, -1, true, false},
    {"U1", 1, 8, true, false},
    {"U2", 2, 32, true, false},
    {"M", 1, 0, false, true},
    {"R", 1, 0, false, true},
}};

}  // namespace

char pauli_char(Pauli p) {
    switch (p) {
        case Pauli::I: return 'I';
        case Pauli::X: return 'X';
        case Pauli::Y: return 'Y';
        case Pauli::Z: return 'Z';
    }
    return '?';
}

Pauli pauli_from_char(char c) {
    switch (c) {
        case 'I': return Pauli::I;
        case 'X': return Pauli::X;
        case 'Y': return Pauli::Y;
        case 'Z': return Pauli::Z;
        default: throw ConfigError(std::string("invalid Pauli label '") + c + "'");
    }
}

const GateInfo &gate_info(GateKind kind) {
    return kGateTable[static_cast<std::size_t>(kind)];
}

GateKind gate_kind_from_name(std::string_view name) {
    if (name == "CX") {
        return GateKind::CNOT;
    }
    for (std::size_t i = 0; i < kGateTable.size(); ++i) {
        if (kGateTable[i].name == name) {
            return static_cast<GateKind>(i);
        }
    }
    throw ConfigError("unknown gate '" + std::string(name) + "'");
}

std::vector<cplx> gate_matrix(const Gate &gate) {
    using namespace std::complex_literals;
    const double r = std::numbers::sqrt2 / 2;
    auto param = [&](std::size_t i) { return i < gate.params.size() ? gate.params[i] : 0.0; };
    switch (gate.kind) {
        case GateKind::I: return {1, 0, 0, 1};
        case GateKind::X: return {0, 1, 1, 0};
        case GateKind::Y: return {0, -1i, 1i, 0};
        case GateKind::Z: return {1, 0, 0, -1};
        case GateKind::H: return {r, r, r, -r};
        case GateKind::S: return {1, 0, 0, 1i};
        case GateKind::SDG: return {1, 0, 0, -1i};
        case GateKind::SX: return {0.5 + 0.5i, 0.5 - 0.5i, 0.5 - 0.5i, 0.5 + 0.5i};
        case GateKind::SXDG: return {0.5 - 0.5i, 0.5 + 0.5i, 0.5 + 0.5i, 0.5 - 0.5i};
        case GateKind::RX: {
            double c = std::cos(param(0) / 2), s = std::sin(param(0) / 2);
            return {c, -1i * s, -1i * s, c};
        }
        case GateKind::RY: {
            double c = std::cos(param(0) / 2), s = std::sin(param(0) / 2);
            return {c, -s, s, c};
        }
        case GateKind::RZ: {
            double h = param(0) / 2;
            return {std::exp(-1i * h), 0, 0, std::exp(1i * h)};
        }
        case GateKind::CZ:
            return {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, -1};
        case GateKind::CNOT:
            return {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0};
        case GateKind::SWAP:
            return {1, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 1};
        case GateKind::FSIM: {
            double c = std::cos(param(0)), s = std::sin(param(0));
            cplx ph = std::exp(-1i * param(1));
            return {1, 0, 0, 0, 0, c, -1i * s, 0, 0, -1i * s, c, 0, 0, 0, 0, ph};
        }
        case GateKind::U1:
        case GateKind::U2: {
            std::size_t dim = gate.kind == GateKind::U1 ? 4 : 16;
            std::vector<cplx> m(dim);
            for (std::size_t i = 0; i < dim; ++i) {
                m[i] = {gate.params.at(2 * i), gate.params.at(2 * i + 1)};
            }
            return m;
        }
        case GateKind::M:
        case GateKind::R:
            break;
    }
    throw ContractViolation("gate " + std::string(gate_info(gate.kind).name) + " has no unitary matrix");
}

std::size_t LatticeGeometry::n_sites() const {
    std::size_t n = 1;
    for (int k = 0; k < d; ++k) {
        n *= static_cast<std::size_t>(side);
    }
    return n;
}

std::vector<int> LatticeGeometry::coords(std::uint32_t s) const {
    std::vector<int> c(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) {
        c[k] = static_cast<int>(s % static_cast<std::uint32_t>(side));
        s /= static_cast<std::uint32_t>(side);
    }
    return c;
}

std::uint32_t LatticeGeometry::site(std::span<const int> c) const {
    std::uint32_t s = 0;
    for (int k = d - 1; k >= 0; --k) {
        s = s * static_cast<std::uint32_t>(side) + static_cast<std::uint32_t>(c[k]);
    }
    return s;
}

bool LatticeGeometry::adjacent(std::uint32_t a, std::uint32_t b) const {
    auto ca = coords(a), cb = coords(b);
    int dist = 0;
    for (int k = 0; k < d; ++k) {
        dist += std::abs(ca[k] - cb[k]);
    }
    return dist == 1;
}

Circuit::Circuit(std::size_t n_qubits, std::vector<Layer> layers,
                 std::optional<LatticeGeometry> geometry)
    : n_qubits_(n_qubits), layers_(std::move(layers)), geometry_(geometry) {
    if (geometry_) {
        if (geometry_->d < 1 || geometry_->side < 1) {
            throw ConfigError("lattice geometry needs d >= 1 and side >= 1");
        }
        if (geometry_->n_sites() != n_qubits_) {
            throw ConfigError("lattice geometry does not match qubit count");
        }
    }
    std::vector<std::size_t> last_use(n_qubits_, SIZE_MAX);
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        for (const Gate &g : layers_[l].gates) {
            const GateInfo &info = gate_info(g.kind);
            if (g.arity() != info.arity) {
                throw ConfigError(std::string(info.name) + " expects " + std::to_string(info.arity) + " qubit(s)");
            }
            if (info.n_params >= 0 && static_cast<int>(g.params.size()) != info.n_params) {
                throw ConfigError(std::string(info.name) + " expects " + std::to_string(info.n_params) + " parameter(s)");
            }
            if (g.kind == GateKind::FSIM && (g.params.empty() || g.params.size() > 2)) {
                throw ConfigError("FSIM expects 1 or 2 parameters");
            }
            for (auto q : g.qubits) {
                if (q >= n_qubits_) {
                    throw ConfigError("gate qubit index " + std::to_string(q) + " out of range");
                }
                if (last_use[q] == l) {
                    throw ConfigError("overlapping gate supports in layer " + std::to_string(l));
                }
                last_use[q] = l;
            }
            if (g.is_two_qubit() && geometry_ && !geometry_->adjacent(g.qubits[0], g.qubits[1])) {
                throw ConfigError("two-qubit gate on non-adjacent lattice sites");
            }
            ++gate_count_;
        }
    }
}

std::size_t Circuit::two_qubit_gate_count() const {
    std::size_t count = 0;
    for (const auto &layer : layers_) {
        for (const auto &g : layer.gates) {
            count += g.is_two_qubit();
        }
    }
    return count;
}

bool Circuit::has_measurements() const {
    for (const auto &layer : layers_) {
        for (const auto &g : layer.gates) {
            if (!gate_info(g.kind).unitary) {
                return true;
            }
        }
    }
    return false;
}

bool Circuit::is_clifford() const {
    for (const auto &layer : layers_) {
        for (const auto &g : layer.gates) {
            if (!gate_info(g.kind).clifford) {
                return false;
            }
        }
    }
    return true;
}

std::vector<Circuit::GateRef> Circuit::gate_refs() const {
    std::vector<GateRef> refs;
    refs.reserve(gate_count_);
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        for (std::size_t i = 0; i < layers_[l].gates.size(); ++i) {
            refs.push_back({refs.size(), l, i});
        }
    }
    return refs;
}

PauliObservable::PauliObservable(std::string paulis) : paulis_(std::move(paulis)) {
    for (char c : paulis_) {
        pauli_from_char(c);
    }
}

PauliObservable PauliObservable::single(std::size_t n, std::uint32_t qubit, char p) {
    if (qubit >= n) {
        throw ConfigError("observable qubit out of range");
    }
    std::string s(n, 'I');
    s[qubit] = p;
    return PauliObservable(std::move(s));
}

std::vector<std::uint32_t> PauliObservable::support() const {
    std::vector<std::uint32_t> s;
    for (std::size_t q = 0; q < paulis_.size(); ++q) {
        if (paulis_[q] != 'I') {
            s.push_back(static_cast<std::uint32_t>(q));
        }
    }
    return s;
}

Circuit build_brickwork_circuit(int d, int side, int depth, const GateSpec &spec) {
    if (d < 1 || side < 2 || depth < 1) {
        throw ConfigError("brickwork needs d >= 1, side >= 2, depth >= 1");
    }
    if (gate_info(spec.kind).arity != 2) {
        throw ConfigError("brickwork gate must act on two qubits");
    }
    LatticeGeometry geo{d, side};
    const std::size_t n = geo.n_sites();
    if (n > (1u << 30)) {
        throw ConfigError("lattice too large");
    }
    std::vector<Layer> layers(static_cast<std::size_t>(depth));
    for (int t = 0; t < depth; ++t) {
        const int axis = t % d;
        const int parity = (t / d) % 2;
        for (std::uint32_t s = 0; s < n; ++s) {
            auto c = geo.coords(s);
            if (c[axis] % 2 != parity || c[axis] + 1 >= side) {
                continue;
            }
            c[axis] += 1;
            layers[t].gates.push_back(Gate{spec.kind, {s, geo.site(c)}, spec.params});
        }
    }
    return Circuit(n, std::move(layers), geo);
}

nlohmann::json to_json(const Circuit &circuit) {
    nlohmann::json j;
    j["n"] = circuit.n_qubits();
    if (circuit.geometry()) {
        j["geometry"] = {{"d", circuit.geometry()->d}, {"side", circuit.geometry()->side}};
    }
    auto layers = nlohmann::json::array();
    for (const auto &layer : circuit.layers()) {
        auto gates = nlohmann::json::array();
        for (const auto &g : layer.gates) {
            gates.push_back({{"gate", gate_info(g.kind).name}, {"qubits", g.qubits}, {"params", g.params}});
        }
        layers.push_back(std::move(gates));
    }
    j["layers"] = std::move(layers);
    return j;
}

Circuit circuit_from_json(const nlohmann::json &j) {
    try {
        std::size_t n = j.at("n").get<std::size_t>();
        std::optional<LatticeGeometry> geo;
        if (j.contains("geometry") && !j["geometry"].is_null()) {
            geo = LatticeGeometry{j["geometry"].at("d").get<int>(), j["geometry"].at("side").get<int>()};
        }
        std::vector<Layer> layers;
        for (const auto &jl : j.at("layers")) {
            Layer layer;
            for (const auto &jg : jl) {
                Gate g;
                g.kind = gate_kind_from_name(jg.at("gate").get<std::string>());
                g.qubits = jg.at("qubits").get<std::vector<std::uint32_t>>();
                if (jg.contains("params")) {
                    g.params = jg["params"].get<std::vector<double>>();
                }
                layer.gates.push_back(std::move(g));
            }
            layers.push_back(std::move(layer));
        }
        return Circuit(n, std::move(layers), geo);
    } catch (const nlohmann::json::exception &e) {
        throw ConfigError(std::string("malformed circuit JSON: ") + e.what());
    }
}

nlohmann::json to_json(const PauliObservable &obs) { return {{"paulis", obs.str()}}; }

PauliObservable observable_from_json(const nlohmann::json &j) {
    try {
        return PauliObservable(j.at("paulis").get<std::string>());
    } catch (const nlohmann::json::exception &e) {
        throw ConfigError(std::string("malformed observable JSON: ") + e.what());
    }
}

PauliMasks pauli_masks(const PauliObservable &obs) {
    if (obs.n_qubits() > 64) {
        throw CapacityError("Pauli masks limited to 64 qubits");
    }
    PauliMasks m;
    for (std::size_t q = 0; q < obs.n_qubits(); ++q) {
        const auto code = static_cast<std::uint8_t>(obs.at(q));
        m.x |= static_cast<std::uint64_t>(code & 1u) << q;
        m.z |= static_cast<std::uint64_t>((code >> 1) & 1u) << q;
        m.n_y += code == 3;
    }
    return m;
}

}  // namespace cvb
