#include "cvblab/steane.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "cvblab/errors.hpp"
#include "cvblab/parallel.hpp"
#include "cvblab/rng.hpp"
#include "cvblab/statevector.hpp"

namespace cvb {

namespace {

constexpr std::uint32_t kAnc = 7;
constexpr std::uint32_t kFlag = 8;
constexpr std::uint64_t kDomainSteane = 41;
constexpr std::size_t kShotGrain = 1024;
constexpr std::size_t kMaxPrepAttempts = 1000;
// Logical Z used to verify the prepared |0_L>. Each encoder source's last
// target is chosen so that every weight-2 hook overlaps this support oddly.
constexpr std::array<std::uint32_t, 3> kVerifySupport{1, 4, 6};

struct FrameBackend {
    std::uint16_t x = 0, z = 0;

    void reset(std::uint32_t q) {
        const auto m = static_cast<std::uint16_t>(~(1u << q));
        x &= m;
        z &= m;
    }
    void h(std::uint32_t q) {
        const std::uint16_t b = static_cast<std::uint16_t>(1u << q);
        const bool xb = x & b, zb = z & b;
        x = static_cast<std::uint16_t>((x & ~b) | (zb ? b : 0));
        z = static_cast<std::uint16_t>((z & ~b) | (xb ? b : 0));
    }
    void cnot(std::uint32_t c, std::uint32_t t) {
        x ^= static_cast<std::uint16_t>(((x >> c) & 1u) << t);
        z ^= static_cast<std::uint16_t>(((z >> t) & 1u) << c);
    }
    int measure(std::uint32_t q) { return (x >> q) & 1; }
    void inject(std::uint32_t q, unsigned code) {
        if (code & 1u) {
            x ^= static_cast<std::uint16_t>(1u << q);
        }
        if (code & 2u) {
            z ^= static_cast<std::uint16_t>(1u << q);
        }
    }
    // Data frame commutes with every check and ancillas are clean, so a
    // fault-free cycle would report nothing and leave the frame unchanged.
    bool quiescent() const {
        return (x >> 7) == 0 && (z >> 7) == 0 && steane_syndrome(static_cast<std::uint8_t>(x & 0x7f)) == 0 &&
               steane_syndrome(static_cast<std::uint8_t>(z & 0x7f)) == 0;
    }
    static constexpr bool kCanSkip = true;
};

struct StateVectorBackend {
    StateVector sv{kSteaneQubits};
    Rng *rng = nullptr;

    void reset(std::uint32_t q) { sv.reset(q, *rng); }
    void h(std::uint32_t q) { sv.apply(Gate{GateKind::H, {q}, {}}); }
    void cnot(std::uint32_t c, std::uint32_t t) { sv.apply(Gate{GateKind::CNOT, {c, t}, {}}); }
    int measure(std::uint32_t q) { return sv.measure(q, *rng); }
    void inject(std::uint32_t q, unsigned code) {
        if (code != 0) {
            sv.apply_pauli(q, static_cast<Pauli>(code));
        }
    }
    bool quiescent() const { return false; }
    static constexpr bool kCanSkip = false;
};

struct RandomNoise {
    EventSampler sampler;
    Rng &rng;
    double gamma;

    RandomNoise(Rng &r, double g) : sampler(r, g), rng(r), gamma(g) {}
    unsigned fire1() { return sampler.fires(gamma) ? 1 + rng.below(3) : 0; }
    unsigned fire2() { return sampler.fires(gamma) ? 1 + rng.below(15) : 0; }
    bool skip(std::uint64_t n) { return sampler.skip(n); }
};

struct InjectNoise {
    std::size_t target;
    unsigned code;
    std::size_t counter = 0;
    bool target_two_qubit = false;
    bool applied = false;

    unsigned fire(bool two) {
        const bool hit = counter++ == target;
        if (!hit) {
            return 0;
        }
        target_two_qubit = two;
        const unsigned c = two ? code : (code <= 3 ? code : 0);
        applied = c != 0;
        return c;
    }
    unsigned fire1() { return fire(false); }
    unsigned fire2() { return fire(true); }
    bool skip(std::uint64_t n) {
        if (target >= counter && target < counter + n) {
            return false;
        }
        counter += n;
        return true;
    }
};

struct CountNoise {
    std::size_t count = 0;
    unsigned fire1() { return ++count, 0; }
    unsigned fire2() { return ++count, 0; }
    bool skip(std::uint64_t) { return false; }
};

// Hook errors a flagged check can leave on data, in the order of the check's
// support (d1..d4): d4, d3 d4, d2 d3 d4 (equivalent to d1).
std::array<std::uint8_t, 3> hook_masks(std::size_t row) {
    const auto &r = kSteaneRows[row];
    const auto b = [&](std::size_t i) { return static_cast<std::uint8_t>(1u << r[i]); };
    return {b(3), static_cast<std::uint8_t>(b(2) | b(3)), static_cast<std::uint8_t>(b(1) | b(2) | b(3))};
}

std::uint8_t single_qubit_mask(std::uint8_t syndrome) {
    return syndrome == 0 ? 0 : static_cast<std::uint8_t>(1u << (syndrome - 1));
}

template <class Backend, class Noise>
class Protocol {
  public:
    Protocol(Backend &b, Noise &n, IdleNoise idle) : b_(b), n_(n), idle_(idle) {}

    void reset(std::uint32_t q) {
        b_.reset(q);
        b_.inject(q, n_.fire1());
    }
    void h(std::uint32_t q) {
        b_.h(q);
        b_.inject(q, n_.fire1());
    }
    void cnot(std::uint32_t c, std::uint32_t t) {
        b_.cnot(c, t);
        const unsigned code = n_.fire2();
        b_.inject(c, code & 3u);
        b_.inject(t, code >> 2);
    }
    void idle(std::uint32_t q) { b_.inject(q, n_.fire1()); }
    void idle_data() {
        for (std::uint32_t d = 0; d < 7; ++d) {
            idle(d);
        }
    }
    void round_idle() {
        if (idle_ == IdleNoise::PerRound) {
            idle_data();
        }
    }
    // Ancilla readout: measurement-error location on each measured qubit, plus
    // data idles when they are charged per measurement.
    void measure_ancillas(bool with_flag, int &a, int &f) {
        idle(kAnc);
        if (with_flag) {
            idle(kFlag);
        }
        if (idle_ == IdleNoise::PerMeasurement) {
            idle_data();
        }
        a = b_.measure(kAnc);
        f = with_flag ? b_.measure(kFlag) : 0;
    }

    // Returns the number of preparation attempts.
    std::uint16_t prepare() {
        for (std::size_t attempt = 1;; ++attempt) {
            for (std::uint32_t d = 0; d < 7; ++d) {
                reset(d);
            }
            for (std::uint32_t q : {0u, 1u, 3u}) {
                h(q);
            }
            for (auto [c, t] : {std::pair{3u, 4u}, {3u, 5u}, {3u, 6u}, {1u, 2u}, {1u, 6u}, {1u, 5u}, {0u, 2u},
                                {0u, 4u}, {0u, 6u}}) {
                cnot(c, t);
            }
            reset(kAnc);
            for (std::uint32_t d : kVerifySupport) {
                cnot(d, kAnc);
            }
            int a = 0, f = 0;
            measure_ancillas(false, a, f);
            round_idle();
            if (a == 0 || attempt >= kMaxPrepAttempts) {
                return static_cast<std::uint16_t>(std::min<std::size_t>(attempt, 0xffff));
            }
        }
    }

    // Check i: 0-2 Z-type rows, 3-5 X-type rows. Returns (syndrome bit, flag bit).
    std::pair<int, int> flagged_check(std::size_t i) {
        const auto &r = kSteaneRows[i % 3];
        int a = 0, f = 0;
        if (i < 3) {
            reset(kAnc);
            reset(kFlag);
            h(kFlag);
            cnot(r[0], kAnc);
            cnot(kFlag, kAnc);
            cnot(r[1], kAnc);
            cnot(r[2], kAnc);
            cnot(kFlag, kAnc);
            cnot(r[3], kAnc);
            h(kFlag);
        } else {
            reset(kAnc);
            h(kAnc);
            reset(kFlag);
            cnot(kAnc, r[0]);
            cnot(kAnc, kFlag);
            cnot(kAnc, r[1]);
            cnot(kAnc, r[2]);
            cnot(kAnc, kFlag);
            cnot(kAnc, r[3]);
            h(kAnc);
        }
        measure_ancillas(true, a, f);
        return {a, f};
    }

    int plain_check(std::size_t i) {
        const auto &r = kSteaneRows[i % 3];
        reset(kAnc);
        if (i < 3) {
            for (auto d : r) {
                cnot(d, kAnc);
            }
        } else {
            h(kAnc);
            for (auto d : r) {
                cnot(kAnc, d);
            }
            h(kAnc);
        }
        int a = 0, f = 0;
        measure_ancillas(false, a, f);
        return a;
    }

    CycleRecord cycle() {
        CycleRecord rec;
        for (std::size_t i = 0; i < 6; ++i) {
            const auto [s, f] = flagged_check(i);
            if (s || f) {
                rec.triggered = true;
                rec.flag = f != 0;
                rec.trigger_index = static_cast<std::uint8_t>(i);
                break;
            }
        }
        round_idle();
        if (!rec.triggered) {
            return rec;
        }
        std::uint8_t sx = 0, sz = 0;
        for (std::size_t i = 0; i < 3; ++i) {
            sx = static_cast<std::uint8_t>(sx | (plain_check(i) << (2 - i)));
        }
        for (std::size_t i = 0; i < 3; ++i) {
            sz = static_cast<std::uint8_t>(sz | (plain_check(3 + i) << (2 - i)));
        }
        round_idle();
        rec.x_error_syndrome = sx;
        rec.z_error_syndrome = sz;
        PauliCorrection corr = decode_steane(sx, sz);
        if (rec.flag) {
            // Z-type checks leave Z hooks, X-type checks leave X hooks.
            const bool z_hooks = rec.trigger_index < 3;
            const std::uint8_t syn = z_hooks ? sz : sx;
            for (std::uint8_t m : hook_masks(rec.trigger_index % 3)) {
                if (steane_syndrome(m) == syn) {
                    (z_hooks ? corr.z_mask : corr.x_mask) = m;
                    break;
                }
            }
        }
        apply(corr);
        return rec;
    }

    void apply(const PauliCorrection &c) {
        for (std::uint32_t d = 0; d < 7; ++d) {
            const unsigned code = ((c.x_mask >> d) & 1u) | (((c.z_mask >> d) & 1u) << 1);
            if (code) {
                b_.inject(d, code);
            }
        }
    }

    // Transversal Z readout; returns (logical flip after decoding, final syndrome).
    std::pair<bool, std::uint8_t> readout(bool decode) {
        std::uint8_t bits = 0;
        for (std::uint32_t d = 0; d < 7; ++d) {
            idle(d);
            bits = static_cast<std::uint8_t>(bits | (b_.measure(d) << d));
        }
        const std::uint8_t syn = steane_syndrome(bits);
        if (decode) {
            bits ^= single_qubit_mask(syn);
        }
        return {(std::popcount(bits) & 1) != 0, syn};
    }

    void raw_cycle() {
        for (std::uint32_t d = 0; d < 7; ++d) {
            idle(d);
        }
    }

    Noise &noise() { return n_; }

  private:
    Backend &b_;
    Noise &n_;
    IdleNoise idle_;
};

// Locations in a cycle that reports nothing.
std::size_t quiet_cycle_locations(IdleNoise idle) {
    FrameBackend b;
    CountNoise c;
    Protocol<FrameBackend, CountNoise> p(b, c, idle);
    p.cycle();
    return c.count;
}

template <class Backend, class Noise>
void run_shot(Backend &b, Noise &noise, const SteaneExperiment &exp, SteaneRecords &out, std::size_t shot) {
    Protocol<Backend, Noise> p(b, noise, exp.idle);
    const bool ft = exp.schedule == SyndromeSchedule::FlagFT;
    std::uint16_t *cycle_bits = out.cycle_bits.data() + shot * exp.cycles;
    if (ft) {
        out.prep_attempts[shot] = p.prepare();
    } else {
        for (std::uint32_t d = 0; d < 7; ++d) {
            p.reset(d);
        }
        out.prep_attempts[shot] = 1;
    }
    if (exp.inject) {
        b.inject(exp.inject->qubit, static_cast<unsigned>(exp.inject->pauli));
    }
    const std::size_t quiet = ft ? quiet_cycle_locations(exp.idle) : 7;
    for (std::size_t c = 0; c < exp.cycles; ++c) {
        if (Backend::kCanSkip && (!ft || b.quiescent()) && noise.skip(quiet)) {
            cycle_bits[c] = 0;
            continue;
        }
        if (ft) {
            cycle_bits[c] = p.cycle().pack();
        } else {
            p.raw_cycle();
            cycle_bits[c] = 0;
        }
    }
    const auto [flip, syn] = p.readout(ft);
    out.logical_flip[shot] = flip ? 1 : 0;
    out.final_syndrome[shot] = syn;
}

double log_fidelity_variance(double flips, double n) {
    // Var(ln F) for F = 1 - 2k/n with a half-count floor
    const double p = std::max(flips, 0.5) / n;
    const double F = 1 - 2 * p;
    return 4 * p * (1 - p) / n / (F * F);
}

struct LineFit {
    double slope = 0;
    double intercept = 0;
    double slope_se = 0;
};

LineFit weighted_line(const std::vector<double> &x, const std::vector<double> &y, const std::vector<double> &w) {
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sw += w[i];
        sx += w[i] * x[i];
        sy += w[i] * y[i];
        sxx += w[i] * x[i] * x[i];
        sxy += w[i] * x[i] * y[i];
    }
    const double den = sw * sxx - sx * sx;
    if (!(den > 0)) {
        throw FitError("cycle-depth sweep is degenerate");
    }
    LineFit f;
    f.slope = (sw * sxy - sx * sy) / den;
    f.intercept = (sy - f.slope * sx) / sw;
    f.slope_se = std::sqrt(sw / den);
    return f;
}

double p_from_slope(double slope) { return (1 - std::exp(slope)) / 2; }

}  // namespace

std::uint8_t steane_column(std::uint32_t q) {
    if (q >= 7) {
        throw ConfigError("Steane data qubit index must be < 7");
    }
    return static_cast<std::uint8_t>(q + 1);
}

std::uint8_t steane_syndrome(std::uint8_t mask) {
    std::uint8_t s = 0;
    for (std::size_t r = 0; r < 3; ++r) {
        int parity = 0;
        for (auto q : kSteaneRows[r]) {
            parity ^= (mask >> q) & 1;
        }
        s = static_cast<std::uint8_t>(s | (parity << (2 - r)));
    }
    return s;
}

PauliCorrection decode_steane(std::uint8_t x_error_syndrome, std::uint8_t z_error_syndrome) {
    if (x_error_syndrome > 7 || z_error_syndrome > 7) {
        throw ConfigError("Steane syndromes have 3 bits");
    }
    return {single_qubit_mask(x_error_syndrome), single_qubit_mask(z_error_syndrome)};
}

void SteaneExperiment::validate() const {
    if (!(gamma >= 0 && gamma < 1)) {
        throw ConfigError("gamma must lie in [0,1)");
    }
    if (shots == 0) {
        throw ConfigError("shots must be positive");
    }
    if (inject && inject->qubit >= 7) {
        throw ConfigError("injected Pauli must act on a data qubit");
    }
}

std::uint16_t CycleRecord::pack() const {
    return static_cast<std::uint16_t>(x_error_syndrome | (z_error_syndrome << 3) | (flag ? 1u << 6 : 0u) |
                                      (triggered ? 1u << 7 : 0u) | (trigger_index << 8));
}

CycleRecord CycleRecord::unpack(std::uint16_t bits) {
    CycleRecord r;
    r.x_error_syndrome = bits & 7u;
    r.z_error_syndrome = (bits >> 3) & 7u;
    r.flag = (bits >> 6) & 1u;
    r.triggered = (bits >> 7) & 1u;
    r.trigger_index = (bits >> 8) & 7u;
    return r;
}

std::size_t SteaneRecords::flips() const {
    std::size_t k = 0;
    for (auto f : logical_flip) {
        k += f;
    }
    return k;
}

Estimate SteaneRecords::logical_estimate() const {
    Estimate e;
    const double n = static_cast<double>(shots);
    const double p = static_cast<double>(flips()) / n;
    e.mean = 1 - 2 * p;
    e.std_error = shots > 1 ? std::sqrt(4 * p * (1 - p) / (n - 1)) : 0;
    e.shots_used = shots;
    return e;
}

SteaneRecords run_steane_memory(const SteaneExperiment &exp, SteaneBackend backend) {
    exp.validate();
    SteaneRecords out;
    out.cycles = exp.cycles;
    out.shots = exp.shots;
    out.gamma = exp.gamma;
    out.cycle_bits.assign(exp.shots * exp.cycles, 0);
    out.logical_flip.assign(exp.shots, 0);
    out.final_syndrome.assign(exp.shots, 0);
    out.prep_attempts.assign(exp.shots, 0);
    parallel_for(exp.shots, kShotGrain, [&](std::size_t begin, std::size_t end) {
        Rng rng(exp.seed, begin / kShotGrain, kDomainSteane);
        RandomNoise noise(rng, exp.gamma);
        for (std::size_t s = begin; s < end; ++s) {
            if (backend == SteaneBackend::Frame) {
                FrameBackend b;
                run_shot(b, noise, exp, out, s);
            } else {
                StateVectorBackend b;
                b.rng = &rng;
                run_shot(b, noise, exp, out, s);
            }
        }
    });
    return out;
}

FaultRun run_steane_with_fault(std::size_t cycles, std::size_t location, unsigned code, IdleNoise idle) {
    if (code == 0 || code > 15) {
        throw ConfigError("fault code must lie in 1..15");
    }
    FrameBackend b;
    InjectNoise noise{location, code};
    Protocol<FrameBackend, InjectNoise> p(b, noise, idle);
    p.prepare();
    FaultRun run;
    for (std::size_t c = 0; c < cycles; ++c) {
        run.cycles.push_back(p.cycle());
    }
    run.logical_flip = p.readout(true).first;
    run.locations = noise.counter;
    run.location_is_two_qubit = noise.target_two_qubit;
    run.fault_applied = noise.applied;
    return run;
}

SyndromeRejectionPolicy SyndromeRejectionPolicy::reject_nontrivial() {
    return {"reject-nontrivial", [](const CycleRecord &c) { return c.nontrivial(); }};
}

SyndromeRejectionPolicy SyndromeRejectionPolicy::reject_nothing() {
    return {"reject-nothing", [](const CycleRecord &) { return false; }};
}

SyndromeRejectionPolicy SyndromeRejectionPolicy::reject_flags_only() {
    return {"reject-flags", [](const CycleRecord &c) { return c.flag; }};
}

bool SyndromeRejectionPolicy::accepts(const SteaneRecords &r, std::size_t shot) const {
    for (std::size_t c = 0; c < r.cycles; ++c) {
        const std::uint16_t bits = r.cycle_bits[shot * r.cycles + c];
        if (bits != 0 && reject_cycle(CycleRecord::unpack(bits))) {
            return false;
        }
        if (bits == 0 && reject_cycle(CycleRecord{})) {
            return false;
        }
    }
    return true;
}

nlohmann::json LogicalErrorFit::to_json() const {
    return {{"gamma_prime", gamma_prime},
            {"gamma_prime_ci", {gamma_prime_lo, gamma_prime_hi}},
            {"intercept", intercept},
            {"decay_rate", decay_rate},
            {"acceptance_rate", acceptance_rate},
            {"degenerate", degenerate},
            {"warning", warning},
            {"depths", depths},
            {"fidelities", fidelities},
            {"acceptance", acceptance}};
}

LogicalErrorFit estimate_logical_error(const std::vector<SteaneRecords> &runs, const SyndromeRejectionPolicy *policy) {
    if (runs.size() < 2) {
        throw ConfigError("logical error fit needs at least 2 cycle depths");
    }
    LogicalErrorFit fit;
    std::vector<double> x, y, w, ya, wa;
    for (const auto &r : runs) {
        std::size_t kept = 0, flips = 0;
        for (std::size_t s = 0; s < r.shots; ++s) {
            if (policy && !policy->accepts(r, s)) {
                continue;
            }
            ++kept;
            flips += r.logical_flip[s];
        }
        if (kept == 0) {
            throw StarvationError("no shots accepted at depth " + std::to_string(r.cycles), 0.0);
        }
        const double n = static_cast<double>(kept);
        const double F = 1 - 2 * static_cast<double>(flips) / n;
        const double acc = n / static_cast<double>(r.shots);
        fit.depths.push_back(r.cycles);
        fit.fidelities.push_back(F);
        fit.acceptance.push_back(acc);
        if (!(F > 0)) {
            fit.degenerate = true;
            fit.warning = "logical fidelity not positive at depth " + std::to_string(r.cycles);
            continue;
        }
        x.push_back(static_cast<double>(r.cycles));
        y.push_back(std::log(F));
        w.push_back(1 / log_fidelity_variance(static_cast<double>(flips), n));
        if (policy) {
            const double total = static_cast<double>(r.shots);
            const double a = std::max(n, 0.5) / total;
            ya.push_back(std::log(a));
            wa.push_back(total * a / std::max(1 - a, 0.5 / total));
        }
    }
    if (x.size() < 2) {
        fit.degenerate = true;
        fit.warning = "fewer than 2 usable cycle depths";
        return fit;
    }
    const auto line = weighted_line(x, y, w);
    const bool any_flips = std::any_of(fit.fidelities.begin(), fit.fidelities.end(), [](double f) { return f < 1; });
    if (line.slope > 0 || (line.slope == 0 && any_flips)) {
        fit.degenerate = true;
        fit.warning = "logical fidelity does not decay with depth";
    }
    const double slope = std::min(line.slope, 0.0);
    fit.gamma_prime = p_from_slope(slope);
    fit.gamma_prime_lo = std::max(0.0, p_from_slope(slope + 2 * line.slope_se));
    fit.gamma_prime_hi = p_from_slope(slope - 2 * line.slope_se);
    fit.intercept = std::exp(line.intercept);
    fit.decay_rate = -slope;
    if (policy) {
        const auto acc = weighted_line(x, ya, wa);
        fit.acceptance_rate = std::max(0.0, -acc.slope);
    }
    return fit;
}

std::string_view strategy_name(Strategy s) {
    switch (s) {
        case Strategy::Bare: return "bare";
        case Strategy::EC: return "ec";
        case Strategy::EM: return "em";
        case Strategy::ECPS: return "ecps";
        case Strategy::ExtLEM: return "extlem";
        case Strategy::SALEM: return "salem";
    }
    return "unknown";
}

Strategy strategy_from_name(std::string_view name) {
    for (Strategy s : {Strategy::Bare, Strategy::EC, Strategy::EM, Strategy::ECPS, Strategy::ExtLEM, Strategy::SALEM}) {
        if (strategy_name(s) == name) {
            return s;
        }
    }
    throw ConfigError("unknown strategy '" + std::string(name) + "'");
}

nlohmann::json StrategyResult::to_json() const {
    nlohmann::json j{{"strategy", strategy_name(strategy)},
                     {"max_volume", max_volume},
                     {"cvb_vs_bare", cvb_vs_bare},
                     {"gamma_prime", gamma_prime},
                     {"estimate", estimate.to_json()},
                     {"residual_bias", residual_bias}};
    j["acceptance_fraction"] = acceptance_fraction ? nlohmann::json(*acceptance_fraction) : nlohmann::json(nullptr);
    return j;
}

StrategyResult ec_run(const SteaneExperiment &exp) {
    const auto rec = run_steane_memory(exp);
    StrategyResult r;
    r.strategy = Strategy::EC;
    r.estimate = rec.logical_estimate();
    r.residual_bias = std::abs(r.estimate.mean - 1);
    if (exp.cycles > 0 && r.estimate.mean > 0) {
        r.gamma_prime = p_from_slope(std::log(r.estimate.mean) / static_cast<double>(exp.cycles));
    }
    return r;
}

StrategyResult ec_ps_run(const SteaneExperiment &exp, const SyndromeRejectionPolicy &policy) {
    const auto rec = run_steane_memory(exp);
    std::size_t kept = 0, flips = 0;
    for (std::size_t s = 0; s < rec.shots; ++s) {
        if (policy.accepts(rec, s)) {
            ++kept;
            flips += rec.logical_flip[s];
        }
    }
    const double acceptance = static_cast<double>(kept) / static_cast<double>(rec.shots);
    if (kept == 0) {
        throw StarvationError("post-selection rejected every shot", acceptance);
    }
    StrategyResult r;
    r.strategy = Strategy::ECPS;
    r.acceptance_fraction = acceptance;
    const double n = static_cast<double>(kept);
    const double p = static_cast<double>(flips) / n;
    r.estimate.mean = 1 - 2 * p;
    r.estimate.std_error = kept > 1 ? std::sqrt(4 * p * (1 - p) / (n - 1)) : 0;
    r.estimate.shots_used = kept;
    r.residual_bias = std::abs(r.estimate.mean - 1);
    if (exp.cycles > 0 && r.estimate.mean > 0) {
        r.gamma_prime = p_from_slope(std::log(r.estimate.mean) / static_cast<double>(exp.cycles));
    }
    return r;
}

StrategyResult extlem_run(const SteaneExperiment &exp, const std::optional<LogicalErrorFit> &calibration) {
    if (!calibration) {
        throw CharacterizationError("ExtLEM needs a calibrated logical error rate");
    }
    if (calibration->degenerate) {
        throw CharacterizationError("logical error calibration is degenerate: " + calibration->warning);
    }
    const auto rec = run_steane_memory(exp);
    const auto base = rec.logical_estimate();
    const double c = static_cast<double>(exp.cycles);
    const double stretch = std::pow(1 - 2 * calibration->gamma_prime, -c);
    StrategyResult r;
    r.strategy = Strategy::ExtLEM;
    r.gamma_prime = calibration->gamma_prime;
    r.estimate.mean = base.mean * stretch;
    r.estimate.std_error = base.std_error * stretch;
    r.estimate.shots_used = base.shots_used;
    // rescaling with either CI end instead of the point estimate
    const double lo = std::pow(1 - 2 * calibration->gamma_prime_lo, -c);
    const double hi = std::pow(1 - 2 * calibration->gamma_prime_hi, -c);
    r.estimate.bias_bound = std::abs(base.mean) * std::max(std::abs(hi - stretch), std::abs(stretch - lo));
    r.residual_bias = std::abs(r.estimate.mean - 1);
    return r;
}

double bare_decay_rate(double gamma) { return -std::log1p(-4 * gamma / 3); }

double max_volume(Strategy s, double epsilon, double overhead, const LemRates &rates) {
    if (!(epsilon > 0 && epsilon < 1)) {
        throw ConfigError("epsilon must lie in (0,1)");
    }
    if (!(overhead >= 1)) {
        throw ConfigError("overhead R must be >= 1");
    }
    const double stat = epsilon / std::sqrt(overhead);
    const double inf = std::numeric_limits<double>::infinity();
    const auto decayed = [&](double kappa) {
        if (overhead <= 1) {
            return 0.0;
        }
        return kappa > 0 ? -std::log1p(-(epsilon - stat)) / kappa : inf;
    };
    const auto mitigated = [&](double kappa) { return kappa > 0 ? std::log(overhead) / (2 * kappa) : inf; };
    switch (s) {
        case Strategy::Bare: return decayed(rates.bare);
        case Strategy::EC: return decayed(rates.ec);
        case Strategy::EM: return mitigated(rates.bare);
        case Strategy::ExtLEM: return mitigated(rates.ec);
        case Strategy::ECPS: {
            // bias 1 - e^(-kappa c) plus eps / sqrt(R e^(-alpha c)); increasing in c
            const auto total = [&](double c) {
                return -std::expm1(-rates.ecps * c) + stat * std::exp(0.5 * rates.ecps_acceptance * c);
            };
            if (total(0) > epsilon) {
                return 0.0;
            }
            double hi = 1;
            while (total(hi) <= epsilon) {
                hi *= 2;
                if (hi > 1e15) {
                    return inf;
                }
            }
            double lo = 0;
            for (int i = 0; i < 200 && hi - lo > 1e-12 * hi; ++i) {
                const double mid = 0.5 * (lo + hi);
                (total(mid) <= epsilon ? lo : hi) = mid;
            }
            return lo;
        }
        case Strategy::SALEM: throw ConfigError("SALEM is an extension point and is not implemented");
    }
    return 0;
}

void LemCurveConfig::validate() const {
    if (!(gamma > 0 && gamma < 0.75)) {
        throw ConfigError("gamma must lie in (0, 0.75)");
    }
    if (!(overhead >= 1)) {
        throw ConfigError("overhead R must be >= 1");
    }
    if (epsilons.empty()) {
        throw ConfigError("epsilon grid is empty");
    }
    for (double e : epsilons) {
        if (!(e > 0 && e < 1)) {
            throw ConfigError("epsilon values must lie in (0,1)");
        }
    }
    if (calibration_depths.size() < 2) {
        throw ConfigError("calibration needs at least 2 cycle depths");
    }
    for (Strategy s : strategies) {
        if (s == Strategy::SALEM) {
            throw ConfigError("SALEM is an extension point and is not implemented");
        }
    }
}

const LemCurveRow &LemCurves::at(double epsilon, Strategy s) const {
    for (const auto &r : rows) {
        if (r.strategy == s && r.epsilon == epsilon) {
            return r;
        }
    }
    throw ConfigError("no curve row for strategy " + std::string(strategy_name(s)));
}

nlohmann::json LemCurves::calibration_json() const {
    return {{"ec", ec_fit.to_json()},
            {"ecps", ecps_fit.to_json()},
            {"bare_decay_rate", bare_decay_rate},
            {"volume_units", "bare and em: idle steps of one unencoded physical qubit; ec, ecps, extlem: logical memory cycles"},
            {"em_target", "unencoded physical memory"}};
}

LemCurves lem_cvb_curves(const LemCurveConfig &cfg) {
    cfg.validate();
    std::vector<SteaneRecords> runs;
    for (std::size_t i = 0; i < cfg.calibration_depths.size(); ++i) {
        SteaneExperiment e;
        e.cycles = cfg.calibration_depths[i];
        e.gamma = cfg.gamma;
        e.shots = cfg.calibration_shots;
        e.seed = stream_key(cfg.seed, i, kDomainSteane + 1);
        runs.push_back(run_steane_memory(e));
    }
    LemCurves out;
    out.ec_fit = estimate_logical_error(runs);
    const auto ps = SyndromeRejectionPolicy::reject_nontrivial();
    out.ecps_fit = estimate_logical_error(runs, &ps);
    out.bare_decay_rate = bare_decay_rate(cfg.gamma);
    const LemRates rates{out.bare_decay_rate, out.ec_fit.decay_rate, out.ecps_fit.decay_rate,
                         out.ecps_fit.acceptance_rate};
    for (double e : cfg.epsilons) {
        const double bare = max_volume(Strategy::Bare, e, cfg.overhead, rates);
        for (Strategy s : cfg.strategies) {
            const double v = max_volume(s, e, cfg.overhead, rates);
            out.rows.push_back({e, s, v, bare > 0 ? v / bare : std::numeric_limits<double>::infinity()});
        }
    }
    return out;
}

}  // namespace cvb
