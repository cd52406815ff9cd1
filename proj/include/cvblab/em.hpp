#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cvblab/noise.hpp"
#include "cvblab/sim.hpp"

namespace cvb {

enum class EmMethod { Unmitigated, Rescale, PostSelect, QuasiProb, ZneTwoPoint };

std::string_view em_method_name(EmMethod m);
EmMethod em_method_from_name(std::string_view name);

// ceil(exp(lambda*gamma*V) / eps^2)
std::size_t required_shots(double lambda, double gamma, double V, double epsilon);

struct MitigationResult {
    Estimate estimate;
    // Shots needed per unit 1/eps^2, i.e. M_required * eps^2. For estimators that
    // average a per-shot variable X this is E[X^2].
    double variance_factor = 1;
    double sampling_cost = 1;  // PEC: (prod of 1-norms)^2
    double acceptance = 1;     // post-selection only
    std::vector<double> point_means;   // ZNE: m_1, m_G
    std::vector<std::size_t> point_shots;

    nlohmann::json to_json() const;
};

MitigationResult unmitigated(const NoisyCircuit &noisy, const PauliObservable &obs, std::size_t shots,
                             std::uint64_t seed);
MitigationResult rescale_mitigate(const NoisyCircuit &noisy, const PauliObservable &obs, std::size_t shots,
                                  std::uint64_t seed);
MitigationResult post_select_mitigate(const NoisyCircuit &noisy, const PauliObservable &obs, std::size_t shots,
                                      std::uint64_t seed);
MitigationResult pec_mitigate(const NoisyCircuit &noisy, const PauliObservable &obs, std::size_t shots,
                              std::uint64_t seed);
MitigationResult zne_two_point(const NoisyCircuit &noisy, const PauliObservable &obs, double gain, std::size_t shots,
                               std::uint64_t seed);

MitigationResult mitigate(EmMethod method, const NoisyCircuit &noisy, const PauliObservable &obs,
                          std::size_t shots, std::uint64_t seed, double zne_gain = 2.0);

// Quasi-probability inverse of a Pauli channel table: c_Q = 4^-k sum_P (-1)^<P,Q> / f_P.
std::vector<double> pec_inverse(const std::vector<double> &probs);
// Quasi-probability inverse of the n-qubit global depolarizing channel: {c_I, c_Q}.
std::vector<double> pec_inverse_global(double q, std::size_t n_qubits);

// V_eff = ln(<O>_ideal / <O>_noisy) / gamma
double effective_volume(double gamma, double ideal, double noisy);

struct BlowupRate {
    double lambda = 0;
    double ci_low = 0;
    double ci_high = 0;
    std::string provenance;  // "analytic" or "fitted"
    std::vector<double> x;   // gamma * V per grid point
    std::vector<double> y;   // ln(M_required * eps^2)

    nlohmann::json to_json() const;
};

struct BlowupFitConfig {
    std::size_t n_qubits = 4;
    double gamma = 1e-3;  // infidelity per noisy gate
    std::vector<std::size_t> volumes{10, 50, 100, 150, 200};
    double epsilon = 0.05;
    std::size_t shots = 20000;
    std::uint64_t seed = 1;
    double zne_gain = 1.05;
};

// Fit instance: |0..0> through a chain of V CZ gates, observable Z on qubit 0.
// Rescale and PostSelect use global depolarizing noise; the other methods local
// two-qubit depolarizing noise with the same infidelity.
Circuit blowup_fit_circuit(std::size_t n_qubits, std::size_t volume);
NoisyCircuit blowup_fit_instance(EmMethod method, std::size_t n_qubits, std::size_t volume, double gamma);

BlowupRate fit_blowup_rate(EmMethod method, const BlowupFitConfig &config);

// Analytic blow-up rates for depolarizing noise on n qubits.
double analytic_blowup_rate(EmMethod method, std::size_t n_qubits);

}  // namespace cvb
