#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "cvblab/circuit.hpp"
#include "cvblab/rng.hpp"

namespace cvb {

struct ActiveVolume {
    std::vector<std::size_t> gate_ids;  // sorted two-qubit gate ids
    std::vector<std::uint32_t> active_qubits;

    std::size_t V() const { return gate_ids.size(); }
    std::size_t n_active() const { return active_qubits.size(); }
    nlohmann::json to_json() const;
};

// Backward light cone of the observable support; only two-qubit gates widen it.
ActiveVolume light_cone_volume(const Circuit &circuit, const PauliObservable &obs);

// Largest qubit count the replacement oracle accepts.
inline constexpr std::size_t kOracleQubitLimit = 10;

// Greedy reduction of the light cone: a gate is dropped when replacing it, together
// with every gate dropped so far, by `trials` Haar-random two-qubit unitaries
// moves <O> by less than epsilon/20 each time (half the epsilon/10 budget, so a
// fresh set of replacements stays below epsilon/10).
ActiveVolume brute_force_active_volume(const Circuit &circuit, const PauliObservable &obs, double epsilon,
                                       std::size_t trials = 20, std::uint64_t seed = 0);

// Haar-random 4x4 unitary as a U2 gate on (q0, q1).
Gate haar_two_qubit_gate(std::uint32_t q0, std::uint32_t q1, Rng &rng);

// Copy of the circuit with the listed gates replaced by Haar-random unitaries.
Circuit replace_gates(const Circuit &circuit, const std::vector<std::size_t> &gate_ids, Rng &rng);

// Largest |<O>_replaced - <O>| over `trials` joint random replacements of `gate_ids`.
double max_replacement_shift(const Circuit &circuit, const PauliObservable &obs,
                             const std::vector<std::size_t> &gate_ids, std::size_t trials, std::uint64_t seed);

// Pyramid light-cone geometry on a d-dimensional lattice with spreading velocity v.
double c_d(int d);
double pyramid_qubits(double v, double depth, int d);
double pyramid_volume(double n, int d, double v);
double qubits_of_volume(double V, int d, double v);
double pyramid_depth(double n, double v, int d);

}  // namespace cvb
