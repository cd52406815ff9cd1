#pragma once

#include <vector>

#include "cvblab/circuit.hpp"
#include "cvblab/noise.hpp"

namespace cvb {

// Largest register the exact density-matrix path accepts.
inline constexpr std::size_t kDensityMatrixLimit = 10;

// rho stored as a 2n-qubit vector: bits [0, n) index the row, [n, 2n) the column.
class DensityMatrix {
  public:
    explicit DensityMatrix(std::size_t n_qubits);

    std::size_t n_qubits() const { return n_; }
    cplx at(std::size_t row, std::size_t col) const { return rho_[row | (col << n_)]; }

    void apply_unitary(const Gate &gate);
    void apply_channel(const ErrorChannel &channel);
    void dephase(std::uint32_t q);
    void reset(std::uint32_t q);

    double expectation(const PauliObservable &obs) const;
    double trace() const;

  private:
    void conjugate_pauli(std::uint64_t xmask, std::uint64_t zmask);

    std::size_t n_;
    std::vector<cplx> rho_;
};

// Exact evolution of |0..0><0..0| through the noisy circuit.
DensityMatrix evolve_density_matrix(const NoisyCircuit &noisy);

}  // namespace cvb
