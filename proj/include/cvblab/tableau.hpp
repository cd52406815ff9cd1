#pragma once

#include <cstdint>
#include <vector>

#include "cvblab/circuit.hpp"

namespace cvb {

// Stabilizer tableau (Aaronson-Gottesman) for up to 64 qubits.
class Tableau {
  public:
    explicit Tableau(std::size_t n_qubits);

    std::size_t n_qubits() const { return n_; }

    void h(std::uint32_t q);
    void s(std::uint32_t q);
    void cnot(std::uint32_t c, std::uint32_t t);
    void apply(const Gate &gate);

    bool is_deterministic(std::uint32_t q) const;
    // Z measurement; random outcomes take `random_bit`.
    int measure(std::uint32_t q, int random_bit = 0);
    void reset(std::uint32_t q);

  private:
    struct Row {
        std::uint64_t x = 0, z = 0;
        int r = 0;
    };
    void rowsum(Row &h, const Row &i) const;

    std::size_t n_;
    std::vector<Row> rows_;  // 0..n-1 destabilizers, n..2n-1 stabilizers
};

}  // namespace cvb
