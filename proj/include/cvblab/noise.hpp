#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "cvblab/circuit.hpp"

namespace cvb {

// All conversions between depolarizing probability and entanglement infidelity
// live here. For a k-qubit depolarizing channel rho -> (1-q) rho + q I/2^k the
// entanglement infidelity is (1 - 4^-k) q.
double infidelity_from_depolarizing(double q, std::size_t k);
double depolarizing_from_infidelity(double gamma, std::size_t k);

// n-qubit channel D_q applied after every unitary gate.
struct GlobalDepolarizing {
    double q = 0;
};

// Local depolarizing channels parametrized by entanglement infidelity: after a
// k-qubit gate every non-identity k-qubit Pauli occurs with probability
// gamma_k / (4^k - 1).
struct LocalDepolarizing {
    double gamma_1q = 0;
    double gamma_2q = 0;
};

// Independent single-qubit Pauli channel on every qubit a gate touches.
struct PauliChannel {
    double px = 0;
    double py = 0;
    double pz = 0;
    bool on_single_qubit_gates = false;
};

struct NoiseModel {
    std::variant<GlobalDepolarizing, LocalDepolarizing, PauliChannel> kind;
    // Classical readout flip on every M; noiseless by default.
    double measurement_flip = 0;

    void validate() const;
    // Entanglement infidelity of the error attached to one two-qubit gate.
    double two_qubit_infidelity(std::size_t n_qubits) const;
    bool is_global() const { return std::holds_alternative<GlobalDepolarizing>(kind); }
};

// One error channel instance, attached after a gate.
class ErrorChannel {
  public:
    enum class Kind : std::uint8_t { Identity, PauliTable, Global };

    ErrorChannel() = default;
    static ErrorChannel global(double q);
    // `probs` has 4^k entries indexed by sum_i p_i 4^i in symplectic encoding.
    static ErrorChannel pauli_table(std::vector<std::uint32_t> qubits, std::vector<double> probs);

    Kind kind() const { return kind_; }
    bool is_identity() const { return kind_ == Kind::Identity; }
    const std::vector<std::uint32_t> &qubits() const { return qubits_; }
    const std::vector<double> &probs() const { return probs_; }
    double q() const { return q_; }
    // Probability that some (possibly identity, for Global) error is inserted.
    double fire_probability() const;
    // Noise amplification by direct probability scaling.
    ErrorChannel scaled(double gain) const;

    bool operator==(const ErrorChannel &) const = default;

  private:
    Kind kind_ = Kind::Identity;
    std::vector<std::uint32_t> qubits_;
    std::vector<double> probs_;
    double q_ = 0;
};

// A circuit paired with one channel per gate (indexed by gate id).
struct NoisyCircuit {
    Circuit circuit;
    std::vector<ErrorChannel> channels;
    double measurement_flip = 0;

    // Number of non-identity channel instances (the V of the decay law).
    std::size_t noisy_gate_count() const;
    NoisyCircuit amplified(double gain) const;
    // q if every non-identity channel is the same global depolarizing channel.
    std::optional<double> uniform_global_q() const;
};

NoisyCircuit attach_noise(const Circuit &circuit, const NoiseModel &model);

// Pauli-basis eigenvalues f_P = sum_Q p_Q (-1)^<P,Q> of a Pauli channel table.
std::vector<double> pauli_fidelities(const std::vector<double> &probs);

}  // namespace cvb
