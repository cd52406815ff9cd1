#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cvblab/circuit.hpp"
#include "cvblab/sim.hpp"

namespace cvb {

// Steane [[7,1,3]] code. Data qubits 0..6, syndrome ancilla 7, flag ancilla 8.
// Check rows {3,4,5,6}, {1,2,5,6}, {0,2,4,6}; syndrome bits (b0,b1,b2) point at
// qubit 4 b0 + 2 b1 + b2 - 1. Both sectors use the same rows.
inline constexpr std::size_t kSteaneQubits = 9;
inline constexpr std::array<std::array<std::uint32_t, 4>, 3> kSteaneRows{{{3, 4, 5, 6}, {1, 2, 5, 6}, {0, 2, 4, 6}}};

// 3-bit column of the check matrix for data qubit q (b0 is bit 2).
std::uint8_t steane_column(std::uint32_t q);
// Syndrome of a 7-bit error mask.
std::uint8_t steane_syndrome(std::uint8_t mask);

struct PauliCorrection {
    std::uint8_t x_mask = 0;  // 7-bit data masks
    std::uint8_t z_mask = 0;
    bool operator==(const PauliCorrection &) const = default;
};

// Minimum-weight lookup decoding. `x_error_syndrome` comes from the Z-type checks
// and locates X errors; `z_error_syndrome` comes from the X-type checks.
PauliCorrection decode_steane(std::uint8_t x_error_syndrome, std::uint8_t z_error_syndrome);

enum class SyndromeSchedule {
    FlagFT,  // flagged sequential extraction with an unflagged round on any trigger
    Raw,     // no extraction: data qubits idle once per cycle, no decoding
};

enum class SteaneBackend { Frame, StateVector };

// Where data qubits pick up idle locations while ancillas are measured and reset.
enum class IdleNoise {
    PerRound,        // once per extraction round and after preparation
    PerMeasurement,  // at every ancilla measurement
    Off,
};

struct InjectedPauli {
    std::uint32_t qubit = 0;
    Pauli pauli = Pauli::X;
};

struct SteaneExperiment {
    std::size_t cycles = 1;
    double gamma = 5e-4;  // physical infidelity of every location
    std::size_t shots = 1000;
    std::uint64_t seed = 1;
    SyndromeSchedule schedule = SyndromeSchedule::FlagFT;
    IdleNoise idle = IdleNoise::PerRound;
    // Noiseless Pauli applied to the data right after preparation.
    std::optional<InjectedPauli> inject;

    void validate() const;
};

// One cycle's record. Syndromes are those of the final round run in the cycle:
// all zero for an untriggered cycle, else the unflagged round.
struct CycleRecord {
    std::uint8_t x_error_syndrome = 0;
    std::uint8_t z_error_syndrome = 0;
    bool flag = false;
    bool triggered = false;
    std::uint8_t trigger_index = 0;  // 0-2 Z-type checks, 3-5 X-type checks

    std::uint16_t pack() const;
    static CycleRecord unpack(std::uint16_t bits);
    bool nontrivial() const { return triggered || flag || x_error_syndrome != 0 || z_error_syndrome != 0; }
};

struct SteaneRecords {
    std::size_t cycles = 0;
    std::size_t shots = 0;
    double gamma = 0;
    std::vector<std::uint16_t> cycle_bits;     // shots x cycles, packed CycleRecord
    std::vector<std::uint8_t> logical_flip;    // decoded logical-Z outcome is -1
    std::vector<std::uint8_t> final_syndrome;  // X-error syndrome of the final readout
    std::vector<std::uint16_t> prep_attempts;

    CycleRecord cycle(std::size_t shot, std::size_t c) const {
        return CycleRecord::unpack(cycle_bits[shot * cycles + c]);
    }
    std::size_t flips() const;
    // Logical-Z expectation over all shots.
    Estimate logical_estimate() const;
    bool operator==(const SteaneRecords &) const = default;
};

SteaneRecords run_steane_memory(const SteaneExperiment &exp, SteaneBackend backend = SteaneBackend::Frame);

// Runs the experiment with a single deterministic fault: Pauli `code` (1..3 on a
// one-qubit location, 1..15 on a two-qubit location, encoded as p_a + 4 p_b) at
// location `location`. Returns the decoded logical flip and the number of locations visited.
struct FaultRun {
    bool logical_flip = false;
    std::size_t locations = 0;
    bool location_is_two_qubit = false;
    bool fault_applied = false;
    std::vector<CycleRecord> cycles;
};
FaultRun run_steane_with_fault(std::size_t cycles, std::size_t location, unsigned code,
                               IdleNoise idle = IdleNoise::PerRound);

// Shot acceptance rule for post-selection.
struct SyndromeRejectionPolicy {
    std::string name = "reject-nontrivial";
    std::function<bool(const CycleRecord &)> reject_cycle;

    static SyndromeRejectionPolicy reject_nontrivial();
    static SyndromeRejectionPolicy reject_nothing();
    static SyndromeRejectionPolicy reject_flags_only();
    bool accepts(const SteaneRecords &r, std::size_t shot) const;
};

// Logical decay fit F(c) = A (1 - 2 gamma')^c over a cycle-depth sweep; gamma' is
// the logical flip probability per cycle.
struct LogicalErrorFit {
    double gamma_prime = 0;
    double gamma_prime_lo = 0;
    double gamma_prime_hi = 0;
    double intercept = 1;
    double decay_rate = 0;  // kappa = -ln(1 - 2 gamma') per cycle
    // Post-selection only: per-cycle acceptance decay rate alpha, acceptance ~ exp(-alpha c).
    double acceptance_rate = 0;
    bool degenerate = false;
    std::string warning;
    std::vector<std::size_t> depths;
    std::vector<double> fidelities;
    std::vector<double> acceptance;

    nlohmann::json to_json() const;
};

LogicalErrorFit estimate_logical_error(const std::vector<SteaneRecords> &runs,
                                       const SyndromeRejectionPolicy *policy = nullptr);

enum class Strategy { Bare, EC, EM, ECPS, ExtLEM, SALEM };
std::string_view strategy_name(Strategy s);
Strategy strategy_from_name(std::string_view name);

struct StrategyResult {
    Strategy strategy = Strategy::EC;
    double max_volume = 0;
    double cvb_vs_bare = 0;
    std::optional<double> acceptance_fraction;
    double gamma_prime = 0;
    Estimate estimate;
    double residual_bias = 0;  // |mean - 1| against the noiseless value +1

    nlohmann::json to_json() const;
};

// Conditions the decoded logical estimate on accepted shots.
StrategyResult ec_ps_run(const SteaneExperiment &exp, const SyndromeRejectionPolicy &policy);
// Logical rescaling with a calibrated logical error: mean x (1 - 2 gamma')^-cycles.
StrategyResult extlem_run(const SteaneExperiment &exp, const std::optional<LogicalErrorFit> &calibration);
StrategyResult ec_run(const SteaneExperiment &exp);

// Per-step decay rate of one unencoded idling qubit: -ln(1 - 4 gamma / 3).
double bare_decay_rate(double gamma);

struct LemCurveConfig {
    double gamma = 5e-4;
    std::vector<double> epsilons;
    double overhead = 2;  // R
    std::vector<Strategy> strategies{Strategy::Bare, Strategy::EC, Strategy::EM, Strategy::ECPS, Strategy::ExtLEM};
    std::vector<std::size_t> calibration_depths{4, 8, 16, 32};
    std::size_t calibration_shots = 50000;
    std::uint64_t seed = 1;

    void validate() const;
};

struct LemCurveRow {
    double epsilon = 0;
    Strategy strategy = Strategy::Bare;
    double max_volume = 0;
    double cvb = 0;
};

struct LemCurves {
    std::vector<LemCurveRow> rows;
    LogicalErrorFit ec_fit;
    LogicalErrorFit ecps_fit;
    double bare_decay_rate = 0;

    const LemCurveRow &at(double epsilon, Strategy s) const;
    nlohmann::json calibration_json() const;
};

// Decay-model inputs for the volume search; exposed so that curves can be
// recomputed from stored calibrations.
struct LemRates {
    double bare = 0;       // per physical idle step
    double ec = 0;         // per cycle
    double ecps = 0;       // per cycle, conditioned
    double ecps_acceptance = 0;  // alpha per cycle
};

// Largest volume whose total error (bias + statistical at M = R/eps^2) is <= eps.
double max_volume(Strategy s, double epsilon, double overhead, const LemRates &rates);

LemCurves lem_cvb_curves(const LemCurveConfig &cfg);

}  // namespace cvb
