#pragma once

#include <cstdint>

#include "cvblab/circuit.hpp"
#include "cvblab/rng.hpp"

namespace cvb {

// Pauli frame of one shot on up to 64 qubits. The frame is the Pauli error
// relative to a noiseless reference run; measured bits are reference XOR x.
class PauliFrame {
  public:
    // With `rng`, Z components are randomized at start, after resets and after
    // measurements, which makes non-deterministic reference outcomes sample
    // correctly. Without it the reference must be deterministic.
    explicit PauliFrame(std::size_t n_qubits, Rng *rng = nullptr);

    std::size_t n_qubits() const { return n_; }
    std::uint64_t x() const { return x_; }
    std::uint64_t z() const { return z_; }

    void apply(const Gate &gate);
    void h(std::uint32_t q);
    void s(std::uint32_t q);
    void sx(std::uint32_t q);
    void cnot(std::uint32_t c, std::uint32_t t);
    void cz(std::uint32_t a, std::uint32_t b);
    void swap(std::uint32_t a, std::uint32_t b);

    void inject(std::uint64_t xmask, std::uint64_t zmask) {
        x_ ^= xmask;
        z_ ^= zmask;
    }
    void inject(std::uint32_t q, Pauli p);

    // Returns the frame's flip of a Z measurement on q.
    int measure(std::uint32_t q);
    void reset(std::uint32_t q);

  private:
    void randomize_z(std::uint64_t mask);

    std::size_t n_;
    std::uint64_t x_ = 0, z_ = 0;
    Rng *rng_;
};

}  // namespace cvb
