#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cvblab/circuit.hpp"
#include "cvblab/rng.hpp"

namespace cvb {

// Qubit limit for dense simulation (default 24, ~256 MiB of amplitudes).
void set_statevector_limit(std::size_t n);
std::size_t statevector_limit();

class StateVector {
  public:
    explicit StateVector(std::size_t n_qubits);

    std::size_t n_qubits() const { return n_; }
    std::span<const cplx> amplitudes() const { return amps_; }

    void apply(const Gate &gate);
    void apply_matrix1(std::span<const cplx> m, std::uint32_t q);
    void apply_matrix2(std::span<const cplx> m, std::uint32_t q0, std::uint32_t q1);
    void apply_pauli(std::uint32_t q, Pauli p);
    // Applies the Pauli string given as X/Z bit masks (phase i^{#Y} dropped).
    void apply_pauli_masks(std::uint64_t xmask, std::uint64_t zmask);

    // Projective Z measurement; returns the bit and collapses the state.
    int measure(std::uint32_t q, Rng &rng);
    void reset(std::uint32_t q, Rng &rng);

    double expectation(const PauliObservable &obs) const;
    double norm() const;

  private:
    std::size_t n_;
    std::vector<cplx> amps_;
};

}  // namespace cvb
