#include "cvblab/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cvblab/csv.hpp"
#include "cvblab/density_matrix.hpp"
#include "cvblab/errors.hpp"
#include "cvblab/parallel.hpp"
#include "cvblab/pauli_frame.hpp"
#include "cvblab/statevector.hpp"
#include "cvblab/tableau.hpp"

namespace cvb {

namespace {

constexpr std::uint64_t kDomainTrajectory = 1;
constexpr std::uint64_t kDomainFrame = 2;
constexpr std::size_t kShotGrain = 512;
constexpr double kCheckpointBytes = 256.0 * 1024 * 1024;

struct FlatGate {
    const Gate *gate;
    std::size_t layer;
};

std::vector<FlatGate> flatten(const Circuit &c) {
    std::vector<FlatGate> out;
    out.reserve(c.gate_count());
    for (std::size_t l = 0; l < c.depth(); ++l) {
        for (const auto &g : c.layers()[l].gates) {
            out.push_back({&g, l});
        }
    }
    return out;
}

double max_fire_probability(const NoisyCircuit &noisy) {
    double p = 0;
    for (const auto &ch : noisy.channels) {
        p = std::max(p, ch.fire_probability());
    }
    return p;
}

struct Event {
    std::size_t gate_id;
    PauliError error;
};

std::vector<Event> sample_events(const NoisyCircuit &noisy, Rng &rng, double p_max) {
    std::vector<Event> events;
    if (p_max <= 0) {
        return events;
    }
    EventSampler sampler(rng, p_max);
    const std::size_t n = noisy.circuit.n_qubits();
    for (std::size_t id = 0; id < noisy.channels.size(); ++id) {
        const auto &ch = noisy.channels[id];
        if (!ch.is_identity() && sampler.fires(ch.fire_probability())) {
            events.push_back({id, sample_channel_error(ch, n, rng)});
        }
    }
    return events;
}

int sample_outcome(double expectation, const PauliObservable &obs, double flip, Rng &rng) {
    int outcome = rng.uniform() < 0.5 * (1.0 + expectation) ? 1 : -1;
    if (flip > 0) {
        for (std::size_t q = 0; q < obs.n_qubits(); ++q) {
            if (obs.at(q) != Pauli::I && rng.bernoulli(flip)) {
                outcome = -outcome;
            }
        }
    }
    return outcome;
}

void check_record_inputs(const NoisyCircuit &noisy, const PauliObservable &obs, std::size_t shots) {
    if (shots == 0) {
        throw ConfigError("shot count must be at least 1");
    }
    if (obs.n_qubits() != noisy.circuit.n_qubits()) {
        throw ConfigError("observable size does not match circuit");
    }
    if (noisy.channels.size() != noisy.circuit.gate_count()) {
        throw ContractViolation("noisy circuit has one channel per gate");
    }
}

ShotRecord empty_record(std::size_t shots, std::uint64_t seed) {
    ShotRecord rec;
    rec.outcomes.assign(shots, 1);
    rec.weights.assign(shots, 1.0);
    rec.syndromes.assign(shots, {});
    rec.error_free.assign(shots, 1);
    rec.seed = seed;
    return rec;
}

}  // namespace

nlohmann::json Estimate::to_json() const {
    nlohmann::json j{{"mean", mean}, {"std_error", std_error}, {"shots_used", shots_used}};
    if (bias_bound) {
        j["bias_bound"] = *bias_bound;
    } else {
        j["bias_bound"] = "unknown";
    }
    return j;
}

double ShotRecord::mean() const {
    if (outcomes.empty()) {
        return 0;
    }
    double s = 0;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        s += weights[i] * outcomes[i];
    }
    return s / static_cast<double>(outcomes.size());
}

double ShotRecord::second_moment() const {
    if (outcomes.empty()) {
        return 0;
    }
    double s = 0;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        s += weights[i] * weights[i];
    }
    return s / static_cast<double>(outcomes.size());
}

double ShotRecord::std_error() const {
    const std::size_t m = outcomes.size();
    if (m < 2) {
        return 0;
    }
    const double mu = mean();
    double ss = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const double d = weights[i] * outcomes[i] - mu;
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(m - 1) / static_cast<double>(m));
}

Estimate ShotRecord::estimate() const {
    return Estimate{mean(), std_error(), size(), std::nullopt};
}

std::size_t ShotRecord::error_free_count() const {
    return static_cast<std::size_t>(std::count(error_free.begin(), error_free.end(), std::uint8_t{1}));
}

void ShotRecord::write_csv(std::ostream &os) const {
    CsvTable t;
    t.header = {"shot_index", "outcome", "weight", "syndrome_bits"};
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        std::string bits;
        if (i < syndromes.size()) {
            for (auto b : syndromes[i]) {
                bits += b ? '1' : '0';
            }
        }
        t.add_row({format_number(static_cast<long long>(i)), format_number(static_cast<long long>(outcomes[i])),
                   format_number(weights[i]), bits});
    }
    t.write(os);
}

PauliError sample_channel_error(const ErrorChannel &channel, std::size_t n_qubits, Rng &rng) {
    PauliError e;
    switch (channel.kind()) {
        case ErrorChannel::Kind::Identity:
            return e;
        case ErrorChannel::Kind::Global: {
            const std::uint64_t m = n_qubits >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n_qubits) - 1;
            e.x = rng.next() & m;
            e.z = rng.next() & m;
            return e;
        }
        case ErrorChannel::Kind::PauliTable: {
            const auto &p = channel.probs();
            const double total = 1.0 - p[0];
            double u = rng.uniform() * total;
            std::size_t idx = p.size() - 1;
            for (std::size_t i = 1; i < p.size(); ++i) {
                if (u < p[i]) {
                    idx = i;
                    break;
                }
                u -= p[i];
            }
            while (p[idx] == 0 && idx > 1) {
                --idx;  // rounding landed past the last nonzero entry
            }
            e.table_index = idx;
            const auto &qs = channel.qubits();
            for (std::size_t i = 0; i < qs.size(); ++i) {
                const auto code = (idx >> (2 * i)) & 3u;
                e.x |= static_cast<std::uint64_t>(code & 1u) << qs[i];
                e.z |= static_cast<std::uint64_t>(code >> 1) << qs[i];
            }
            return e;
        }
    }
    return e;
}

double ideal_expectation(const Circuit &circuit, const PauliObservable &obs) {
    if (obs.n_qubits() != circuit.n_qubits()) {
        throw ConfigError("observable size does not match circuit");
    }
    if (circuit.has_measurements()) {
        NoisyCircuit nc{circuit, std::vector<ErrorChannel>(circuit.gate_count()), 0.0};
        return evolve_density_matrix(nc).expectation(obs);
    }
    StateVector sv(circuit.n_qubits());
    for (const auto &layer : circuit.layers()) {
        for (const auto &g : layer.gates) {
            sv.apply(g);
        }
    }
    return sv.expectation(obs);
}

ExactValue noisy_expectation_exact(const NoisyCircuit &noisy, const PauliObservable &obs,
                                   std::size_t fallback_trajectories) {
    if (obs.trivial()) {
        return {1.0, 0.0, "analytic"};
    }
    const auto q = noisy.uniform_global_q();
    if (q && !noisy.circuit.has_measurements()) {
        const double v = static_cast<double>(noisy.noisy_gate_count());
        return {std::pow(1.0 - *q, v) * ideal_expectation(noisy.circuit, obs), 0.0, "analytic"};
    }
    if (noisy.circuit.n_qubits() <= kDensityMatrixLimit) {
        return {evolve_density_matrix(noisy).expectation(obs), 1e-12, "density_matrix"};
    }
    auto rec = sample_shots(noisy, obs, std::max<std::size_t>(fallback_trajectories, 2), 0x5eedULL);
    return {rec.mean(), 3.0 * rec.std_error(), "trajectories"};
}

namespace {

struct PreparedInsertions {
    std::vector<std::size_t> gate_ids;
    std::vector<ErrorChannel> channels;  // |c_Q| / norm as a sampling table
    std::vector<std::vector<double>> signs;
    std::vector<bool> global;
    std::vector<double> fire;
    double base_weight = 1;
    double p_max = 0;
};

PreparedInsertions prepare(const std::vector<std::optional<QuasiInsertion>> &inserts) {
    PreparedInsertions p;
    for (std::size_t id = 0; id < inserts.size(); ++id) {
        if (!inserts[id]) {
            continue;
        }
        const auto &ins = *inserts[id];
        const double norm = ins.norm();
        std::vector<double> probs(ins.coefficients.size());
        std::vector<double> signs(ins.coefficients.size());
        const double sign_i = ins.coefficients[0] < 0 ? -1.0 : 1.0;
        for (std::size_t k = 0; k < probs.size(); ++k) {
            probs[k] = std::abs(ins.coefficients[k]) / norm;
            signs[k] = (ins.coefficients[k] < 0 ? -1.0 : 1.0) * sign_i;
        }
        p.base_weight *= norm * sign_i;
        ErrorChannel ch;
        if (ins.global) {
            // fire probability is that of picking any non-identity Pauli
            const double dim = std::ldexp(1.0, 2 * static_cast<int>(ins.n_qubits));
            const double p_other = probs.size() > 1 ? probs[1] : 0.0;
            p.fire.push_back(p_other * (dim - 1));
        } else {
            ch = ErrorChannel::pauli_table(ins.qubits, probs);
            p.fire.push_back(ch.fire_probability());
        }
        p.p_max = std::max(p.p_max, p.fire.back());
        p.gate_ids.push_back(id);
        p.channels.push_back(std::move(ch));
        p.signs.push_back(std::move(signs));
        p.global.push_back(ins.global);
    }
    return p;
}

void add_insertions(const PreparedInsertions &ins, std::size_t n, Rng &rng, std::vector<Event> &events,
                    double &weight) {
    if (ins.p_max <= 0) {
        return;
    }
    const std::size_t before = events.size();
    EventSampler sampler(rng, ins.p_max);
    const std::uint64_t mask = n >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
    for (std::size_t k = 0; k < ins.gate_ids.size(); ++k) {
        const auto &ch = ins.channels[k];
        if (!sampler.fires(ins.fire[k])) {
            continue;
        }
        PauliError e;
        if (ins.global[k]) {
            do {
                e.x = rng.next() & mask;
                e.z = rng.next() & mask;
            } while (e.x == 0 && e.z == 0);
            weight *= ins.signs[k][1];
        } else {
            e = sample_channel_error(ch, n, rng);
            weight *= ins.signs[k][e.table_index];
        }
        events.push_back({ins.gate_ids[k], e});
    }
    if (events.size() != before) {
        std::stable_sort(events.begin(), events.end(),
                         [](const Event &a, const Event &b) { return a.gate_id < b.gate_id; });
    }
}

ShotRecord run_trajectories(const NoisyCircuit &noisy, const PreparedInsertions *ins, const PauliObservable &obs,
                            std::size_t shots, std::uint64_t seed) {
    check_record_inputs(noisy, obs, shots);
    const Circuit &c = noisy.circuit;
    const std::size_t n = c.n_qubits();
    const auto gates = flatten(c);
    const double p_max = max_fire_probability(noisy);
    const bool has_meas = c.has_measurements();

    // Ideal checkpoints: state before each layer, plus the final state.
    std::vector<StateVector> checkpoints;
    double ideal_value = 0;
    if (!has_meas) {
        StateVector sv(n);
        const double bytes = static_cast<double>(c.depth() + 1) * std::ldexp(16.0, static_cast<int>(n));
        const bool keep = bytes <= kCheckpointBytes;
        for (const auto &layer : c.layers()) {
            if (keep) {
                checkpoints.push_back(sv);
            }
            for (const auto &g : layer.gates) {
                sv.apply(g);
            }
        }
        ideal_value = sv.expectation(obs);
    }
    std::vector<std::size_t> first_gate_of_layer(c.depth() + 1, gates.size());
    for (std::size_t i = gates.size(); i-- > 0;) {
        first_gate_of_layer[gates[i].layer] = i;
    }

    ShotRecord rec = empty_record(shots, seed);
    parallel_for(shots, kShotGrain, [&](std::size_t begin, std::size_t end) {
        for (std::size_t shot = begin; shot < end; ++shot) {
            Rng rng(seed, shot, kDomainTrajectory);
            auto events = sample_events(noisy, rng, p_max);
            rec.error_free[shot] = events.empty();
            if (ins) {
                double w = ins->base_weight;
                add_insertions(*ins, n, rng, events, w);
                rec.weights[shot] = w;
            }
            if (!has_meas && events.empty()) {
                rec.outcomes[shot] = sample_outcome(ideal_value, obs, noisy.measurement_flip, rng);
                continue;
            }
            std::size_t start = 0;
            std::optional<StateVector> sv;
            if (!has_meas && !checkpoints.empty()) {
                const std::size_t layer = gates[events.front().gate_id].layer;
                sv = checkpoints[layer];
                start = first_gate_of_layer[layer];
            } else {
                sv.emplace(n);
            }
            auto ev = events.begin();
            auto &syn = rec.syndromes[shot];
            for (std::size_t id = start; id < gates.size(); ++id) {
                const Gate &g = *gates[id].gate;
                if (g.kind == GateKind::M) {
                    int b = sv->measure(g.qubits[0], rng);
                    if (noisy.measurement_flip > 0 && rng.bernoulli(noisy.measurement_flip)) {
                        b ^= 1;
                    }
                    syn.push_back(static_cast<std::uint8_t>(b));
                } else if (g.kind == GateKind::R) {
                    sv->reset(g.qubits[0], rng);
                } else {
                    sv->apply(g);
                }
                for (; ev != events.end() && ev->gate_id == id; ++ev) {
                    sv->apply_pauli_masks(ev->error.x, ev->error.z);
                }
            }
            rec.outcomes[shot] = sample_outcome(sv->expectation(obs), obs, noisy.measurement_flip, rng);
        }
    });
    return rec;
}

}  // namespace

ShotRecord sample_shots(const NoisyCircuit &noisy, const PauliObservable &obs, std::size_t shots,
                        std::uint64_t seed) {
    return run_trajectories(noisy, nullptr, obs, shots, seed);
}

ShotRecord sample_shots_quasi(const NoisyCircuit &noisy, const std::vector<std::optional<QuasiInsertion>> &inserts,
                              const PauliObservable &obs, std::size_t shots, std::uint64_t seed) {
    if (inserts.size() != noisy.circuit.gate_count()) {
        throw ContractViolation("one optional insertion per gate expected");
    }
    const auto prepared = prepare(inserts);
    return run_trajectories(noisy, &prepared, obs, shots, seed);
}

double QuasiInsertion::norm() const {
    if (global) {
        const double dim = std::ldexp(1.0, 2 * static_cast<int>(n_qubits));
        return std::abs(coefficients.at(0)) + (dim - 1) * std::abs(coefficients.at(1));
    }
    double s = 0;
    for (double c : coefficients) {
        s += std::abs(c);
    }
    return s;
}

ShotRecord pauli_frame_run(const NoisyCircuit &noisy, const PauliObservable &obs, std::size_t shots,
                           std::uint64_t seed) {
    check_record_inputs(noisy, obs, shots);
    const Circuit &c = noisy.circuit;
    if (!c.is_clifford()) {
        throw ContractViolation("pauli_frame_run requires a Clifford circuit");
    }
    const std::size_t n = c.n_qubits();
    if (n > 64) {
        throw CapacityError("Pauli frame engine limited to 64 qubits");
    }
    // Read-out: rotate every support qubit to the Z basis and measure it.
    std::vector<Gate> readout;
    std::vector<std::uint32_t> support = obs.support();
    for (auto q : support) {
        if (obs.at(q) == Pauli::X) {
            readout.push_back({GateKind::H, {q}, {}});
        } else if (obs.at(q) == Pauli::Y) {
            readout.push_back({GateKind::SDG, {q}, {}});
            readout.push_back({GateKind::H, {q}, {}});
        }
    }
    const auto gates = flatten(c);

    Tableau ref(n);
    std::vector<std::uint8_t> ref_bits;
    for (const auto &fg : gates) {
        if (fg.gate->kind == GateKind::M) {
            ref_bits.push_back(static_cast<std::uint8_t>(ref.measure(fg.gate->qubits[0])));
        } else {
            ref.apply(*fg.gate);
        }
    }
    for (const auto &g : readout) {
        ref.apply(g);
    }
    int ref_parity = 0;
    for (auto q : support) {
        ref_parity ^= ref.measure(q);
    }

    const double p_max = max_fire_probability(noisy);
    const double flip = noisy.measurement_flip;
    ShotRecord rec = empty_record(shots, seed);
    parallel_for(shots, kShotGrain, [&](std::size_t begin, std::size_t end) {
        for (std::size_t shot = begin; shot < end; ++shot) {
            Rng rng(seed, shot, kDomainFrame);
            Rng frame_rng(seed, shot, kDomainFrame + 1);
            const auto events = sample_events(noisy, rng, p_max);
            rec.error_free[shot] = events.empty();
            PauliFrame frame(n, &frame_rng);
            auto ev = events.begin();
            auto &syn = rec.syndromes[shot];
            std::size_t m_index = 0;
            for (std::size_t id = 0; id < gates.size(); ++id) {
                const Gate &g = *gates[id].gate;
                if (g.kind == GateKind::M) {
                    int b = ref_bits[m_index++] ^ frame.measure(g.qubits[0]);
                    if (flip > 0 && rng.bernoulli(flip)) {
                        b ^= 1;
                    }
                    syn.push_back(static_cast<std::uint8_t>(b));
                } else {
                    frame.apply(g);
                }
                for (; ev != events.end() && ev->gate_id == id; ++ev) {
                    frame.inject(ev->error.x, ev->error.z);
                }
            }
            for (const auto &g : readout) {
                frame.apply(g);
            }
            int parity = ref_parity;
            for (auto q : support) {
                parity ^= frame.measure(q);
                if (flip > 0 && rng.bernoulli(flip)) {
                    parity ^= 1;
                }
            }
            rec.outcomes[shot] = parity ? -1 : 1;
        }
    });
    return rec;
}

ShotRecord pauli_frame_run(const Circuit &circuit, const NoiseModel &model, const PauliObservable &obs,
                           std::size_t shots, std::uint64_t seed) {
    return pauli_frame_run(attach_noise(circuit, model), obs, shots, seed);
}

}  // namespace cvb
