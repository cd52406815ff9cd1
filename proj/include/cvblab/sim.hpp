#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cvblab/circuit.hpp"
#include "cvblab/noise.hpp"
#include "cvblab/rng.hpp"

namespace cvb {

struct Estimate {
    double mean = 0;
    double std_error = 0;
    std::size_t shots_used = 0;
    std::optional<double> bias_bound;  // empty = unknown

    nlohmann::json to_json() const;
};

struct ShotRecord {
    std::vector<int> outcomes;  // +1 / -1
    std::vector<double> weights;
    std::vector<std::vector<std::uint8_t>> syndromes;  // mid-circuit measurement bits
    std::vector<std::uint8_t> error_free;              // 1 if no error event fired
    std::uint64_t seed = 0;

    std::size_t size() const { return outcomes.size(); }
    // Mean and second moment of weight * outcome.
    double mean() const;
    double second_moment() const;
    double std_error() const;
    Estimate estimate() const;
    std::size_t error_free_count() const;

    // Columns: shot_index, outcome, weight, syndrome_bits.
    void write_csv(std::ostream &os) const;
    bool operator==(const ShotRecord &) const = default;
};

double ideal_expectation(const Circuit &circuit, const PauliObservable &obs);

struct ExactValue {
    double value = 0;
    double tolerance = 0;  // 0 for the analytic path
    std::string method;    // "analytic", "density_matrix" or "trajectories"
};

ExactValue noisy_expectation_exact(const NoisyCircuit &noisy, const PauliObservable &obs,
                                   std::size_t fallback_trajectories = 20000);

ShotRecord sample_shots(const NoisyCircuit &noisy, const PauliObservable &obs, std::size_t shots,
                        std::uint64_t seed);

// Quasi-probability mixture of Pauli insertions after one gate: sum_Q c_Q Q.Q^dagger.
// `coefficients` is indexed like a channel table on `qubits`; with `global` set the
// mixture acts on the whole register and holds {c_I, c_Q for every Q != I}.
struct QuasiInsertion {
    std::vector<std::uint32_t> qubits;
    std::vector<double> coefficients;
    bool global = false;
    std::size_t n_qubits = 0;  // register size, used when global

    double norm() const;
};

// Trajectories with one sampled signed insertion per listed gate; each shot's weight
// is the product of norms times the sampled signs.
ShotRecord sample_shots_quasi(const NoisyCircuit &noisy, const std::vector<std::optional<QuasiInsertion>> &inserts,
                              const PauliObservable &obs, std::size_t shots, std::uint64_t seed);

// Stabilizer engine; the circuit must be Clifford and on at most 64 qubits.
ShotRecord pauli_frame_run(const NoisyCircuit &noisy, const PauliObservable &obs, std::size_t shots,
                           std::uint64_t seed);
ShotRecord pauli_frame_run(const Circuit &circuit, const NoiseModel &model, const PauliObservable &obs,
                           std::size_t shots, std::uint64_t seed);

// One sampled error of a channel as X/Z masks over the full register.
struct PauliError {
    std::uint64_t x = 0;
    std::uint64_t z = 0;
    std::size_t table_index = 0;
};
PauliError sample_channel_error(const ErrorChannel &channel, std::size_t n_qubits, Rng &rng);

}  // namespace cvb
