#include "cvblab/em.hpp"

#include <algorithm>
#include <cmath>

#include "cvblab/errors.hpp"

namespace cvb {

namespace {

constexpr std::uint64_t kDomainZnePoint1 = 21;
constexpr std::uint64_t kDomainZnePointG = 22;

double stretch_of(const NoisyCircuit &noisy) {
    const auto q = noisy.uniform_global_q();
    if (!q) {
        throw CharacterizationError("rescaling needs uniform global depolarizing noise with known q");
    }
    return std::pow(1.0 - *q, -static_cast<double>(noisy.noisy_gate_count()));
}

double sample_variance(const ShotRecord &r) {
    const double se = r.std_error();
    return se * se * static_cast<double>(r.size());
}

}  // namespace

std::string_view em_method_name(EmMethod m) {
    switch (m) {
        case EmMethod::Unmitigated: return "unmitigated";
        case EmMethod::Rescale: return "rescale";
        case EmMethod::PostSelect: return "postselect";
        case EmMethod::QuasiProb: return "pec";
        case EmMethod::ZneTwoPoint: return "zne";
    }
    return "?";
}

EmMethod em_method_from_name(std::string_view name) {
    for (auto m : {EmMethod::Unmitigated, EmMethod::Rescale, EmMethod::PostSelect, EmMethod::QuasiProb,
                   EmMethod::ZneTwoPoint}) {
        if (em_method_name(m) == name) {
            return m;
        }
    }
    throw ConfigError("unknown EM method '" + std::string(name) + "'");
}

std::size_t required_shots(double lambda, double gamma, double V, double epsilon) {
    if (!(epsilon > 0) || lambda < 0 || gamma < 0 || V < 0) {
        throw ConfigError("required_shots needs epsilon > 0 and non-negative rates");
    }
    const double m = std::exp(lambda * gamma * V) / (epsilon * epsilon);
    // guard against 400 * e^2 style products landing a hair above an integer
    const double r = std::round(m);
    return static_cast<std::size_t>(std::abs(m - r) < 1e-9 * std::max(1.0, r) ? r : std::ceil(m));
}

nlohmann::json MitigationResult::to_json() const {
    nlohmann::json j = estimate.to_json();
    j["variance_factor"] = variance_factor;
    j["sampling_cost"] = sampling_cost;
    j["acceptance"] = acceptance;
    if (!point_means.empty()) {
        j["point_means"] = point_means;
        j["point_shots"] = point_shots;
    }
    return j;
}

MitigationResult unmitigated(const NoisyCircuit &noisy, const PauliObservable &obs, std::size_t shots,
                             std::uint64_t seed) {
    auto rec = sample_shots(noisy, obs, shots, seed);
    MitigationResult r;
    r.estimate = rec.estimate();
    r.variance_factor = rec.second_moment();
    return r;
}

MitigationResult rescale_mitigate(const NoisyCircuit &noisy, const PauliObservable &obs, std::size_t shots,
                                  std::uint64_t seed) {
    const double stretch = stretch_of(noisy);
    auto rec = sample_shots(noisy, obs, shots, seed);
    MitigationResult r;
    r.estimate.mean = rec.mean() * stretch;
    r.estimate.std_error = stretch / std::sqrt(static_cast<double>(shots));
    r.estimate.shots_used = shots;
    r.estimate.bias_bound = 0.0;
    r.variance_factor = stretch * stretch;
    return r;
}

MitigationResult post_select_mitigate(const NoisyCircuit &noisy, const PauliObservable &obs, std::size_t shots,
                                      std::uint64_t seed) {
    auto rec = sample_shots(noisy, obs, shots, seed);
    std::size_t accepted = 0;
    double sum = 0, sum2 = 0;
    for (std::size_t i = 0; i < rec.size(); ++i) {
        if (rec.error_free[i]) {
            ++accepted;
            sum += rec.outcomes[i];
            sum2 += 1.0;
        }
    }
    const double acceptance = static_cast<double>(accepted) / static_cast<double>(shots);
    if (accepted == 0) {
        throw StarvationError("no shot survived post-selection", acceptance);
    }
    MitigationResult r;
    const double mean = sum / static_cast<double>(accepted);
    const double var = accepted > 1 ? (sum2 - accepted * mean * mean) / static_cast<double>(accepted - 1) : 1.0;
    r.estimate.mean = mean;
    r.estimate.std_error = std::sqrt(std::max(var, 0.0) / static_cast<double>(accepted));
    r.estimate.shots_used = accepted;
    r.estimate.bias_bound = 0.0;
    r.acceptance = acceptance;
    r.variance_factor = 1.0 / acceptance;
    return r;
}

std::vector<double> pec_inverse(const std::vector<double> &probs) {
    const auto f = pauli_fidelities(probs);
    const std::size_t dim = probs.size();
    for (std::size_t p = 0; p < dim; ++p) {
        if (!(f[p] > 1e-12)) {
            throw DecompositionError("Pauli channel is not invertible as a quasi-probability mixture");
        }
    }
    std::vector<double> inv_f(dim);
    for (std::size_t p = 0; p < dim; ++p) {
        inv_f[p] = 1.0 / f[p];
    }
    // the Walsh-Hadamard transform over the symplectic form is its own inverse up to 1/dim
    auto c = pauli_fidelities(inv_f);
    for (auto &v : c) {
        v /= static_cast<double>(dim);
    }
    return c;
}

std::vector<double> pec_inverse_global(double q, std::size_t n_qubits) {
    if (!(q < 1)) {
        throw DecompositionError("fully depolarizing channel has no inverse");
    }
    const double dim = std::ldexp(1.0, 2 * static_cast<int>(n_qubits));
    return {(dim - q) / ((1 - q) * dim), -q / ((1 - q) * dim)};
}

MitigationResult pec_mitigate(const NoisyCircuit &noisy, const PauliObservable &obs, std::size_t shots,
                              std::uint64_t seed) {
    const std::size_t n = noisy.circuit.n_qubits();
    std::vector<std::optional<QuasiInsertion>> inserts(noisy.channels.size());
    double norm_product = 1;
    for (std::size_t id = 0; id < noisy.channels.size(); ++id) {
        const auto &ch = noisy.channels[id];
        if (ch.kind() == ErrorChannel::Kind::PauliTable) {
            inserts[id] = QuasiInsertion{ch.qubits(), pec_inverse(ch.probs()), false, n};
        } else if (ch.kind() == ErrorChannel::Kind::Global) {
            inserts[id] = QuasiInsertion{{}, pec_inverse_global(ch.q(), n), true, n};
        } else {
            continue;
        }
        norm_product *= inserts[id]->norm();
    }
    auto rec = sample_shots_quasi(noisy, inserts, obs, shots, seed);
    MitigationResult r;
    r.estimate = rec.estimate();
    r.estimate.bias_bound = 0.0;
    r.sampling_cost = norm_product * norm_product;
    r.variance_factor = rec.second_moment();
    return r;
}

MitigationResult zne_two_point(const NoisyCircuit &noisy, const PauliObservable &obs, double gain, std::size_t shots,
                               std::uint64_t seed) {
    if (!(gain > 1)) {
        throw ConfigError("noise gain must exceed 1");
    }
    if (shots < 4) {
        throw ConfigError("two-point extrapolation needs at least 4 shots");
    }
    if (noisy.noisy_gate_count() == 0) {
        auto rec = sample_shots(noisy, obs, shots, seed);
        MitigationResult r;
        r.estimate = rec.estimate();
        r.estimate.bias_bound = 0.0;
        r.variance_factor = sample_variance(rec);
        r.point_means = {rec.mean(), rec.mean()};
        r.point_shots = {shots, 0};
        return r;
    }
    const NoisyCircuit amplified = noisy.amplified(gain);
    const double w1 = gain / (gain - 1), wg = -1.0 / (gain - 1);

    // shots split in proportion to the extrapolation-weight magnitudes
    const std::size_t m1_shots = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(static_cast<double>(shots) * std::abs(w1) / (std::abs(w1) + std::abs(wg)))),
        1, shots - 1);
    const std::size_t mg_shots = shots - m1_shots;
    auto r1 = sample_shots(noisy, obs, m1_shots, stream_key(seed, 0, kDomainZnePoint1));
    auto rg = sample_shots(amplified, obs, mg_shots, stream_key(seed, 0, kDomainZnePointG));
    auto check_domain = [](double a, double b) {
        if (a == 0 || b == 0 || (a > 0) != (b > 0)) {
            throw ExtrapolationError("noisy means at the two gains have opposite signs or vanish");
        }
    };
    const double m1 = r1.mean(), mg = rg.mean();
    check_domain(m1, mg);
    const double sign = m1 > 0 ? 1.0 : -1.0;
    const double a = sign * std::pow(std::abs(m1), w1) * std::pow(std::abs(mg), wg);
    const double rel_var = w1 * w1 * std::pow(r1.std_error() / m1, 2) + wg * wg * std::pow(rg.std_error() / mg, 2);

    MitigationResult r;
    r.estimate.mean = a;
    r.estimate.std_error = std::abs(a) * std::sqrt(rel_var);
    r.estimate.shots_used = shots;
    r.estimate.bias_bound = std::nullopt;
    // worst case |A| <= 1 and per-shot variance 1, matching the rescale convention
    const double bound_var = w1 * w1 / (m1 * m1 * static_cast<double>(m1_shots)) +
                             wg * wg / (mg * mg * static_cast<double>(mg_shots));
    r.variance_factor = bound_var * static_cast<double>(shots);
    r.point_means = {m1, mg};
    r.point_shots = {m1_shots, mg_shots};
    return r;
}

MitigationResult mitigate(EmMethod method, const NoisyCircuit &noisy, const PauliObservable &obs,
                          std::size_t shots, std::uint64_t seed, double zne_gain) {
    switch (method) {
        case EmMethod::Unmitigated: return unmitigated(noisy, obs, shots, seed);
        case EmMethod::Rescale: return rescale_mitigate(noisy, obs, shots, seed);
        case EmMethod::PostSelect: return post_select_mitigate(noisy, obs, shots, seed);
        case EmMethod::QuasiProb: return pec_mitigate(noisy, obs, shots, seed);
        case EmMethod::ZneTwoPoint: return zne_two_point(noisy, obs, zne_gain, shots, seed);
    }
    throw ConfigError("unknown EM method");
}

double effective_volume(double gamma, double ideal, double noisy) {
    if (!(gamma > 0)) {
        throw ConfigError("gamma must be positive");
    }
    if (ideal == 0 || noisy == 0 || (ideal > 0) != (noisy > 0)) {
        throw FitError("effective volume needs same-sign, nonzero expectation values");
    }
    return std::log(ideal / noisy) / gamma;
}

nlohmann::json BlowupRate::to_json() const {
    return {{"lambda", lambda}, {"ci", {ci_low, ci_high}}, {"provenance", provenance}, {"gamma_V", x},
            {"log_variance_factor", y}};
}

Circuit blowup_fit_circuit(std::size_t n_qubits, std::size_t volume) {
    if (n_qubits < 2) {
        throw ConfigError("fit instance needs at least 2 qubits");
    }
    std::vector<Layer> layers;
    layers.reserve(volume);
    for (std::size_t l = 0; l < volume; ++l) {
        const auto a = static_cast<std::uint32_t>(l % (n_qubits - 1));
        layers.push_back(Layer{{Gate{GateKind::CZ, {a, a + 1}, {}}}});
    }
    return Circuit(n_qubits, std::move(layers));
}

NoisyCircuit blowup_fit_instance(EmMethod method, std::size_t n_qubits, std::size_t volume, double gamma) {
    const Circuit c = blowup_fit_circuit(n_qubits, volume);
    if (method == EmMethod::QuasiProb) {
        return attach_noise(c, NoiseModel{LocalDepolarizing{0.0, gamma}});
    }
    return attach_noise(c, NoiseModel{GlobalDepolarizing{depolarizing_from_infidelity(gamma, n_qubits)}});
}

double analytic_blowup_rate(EmMethod method, std::size_t n_qubits) {
    const double g = 1.0 - std::pow(4.0, -static_cast<double>(n_qubits));
    switch (method) {
        case EmMethod::Unmitigated: return 0.0;
        case EmMethod::Rescale: return 2.0 / g;
        case EmMethod::PostSelect: return 1.0 / g;
        case EmMethod::QuasiProb: return 4.0;
        case EmMethod::ZneTwoPoint: return 2.0 / g;
    }
    return 0.0;
}

BlowupRate fit_blowup_rate(EmMethod method, const BlowupFitConfig &cfg) {
    if (cfg.volumes.size() < 4) {
        throw ConfigError("blow-up fit needs at least 4 volume grid points");
    }
    if (!(cfg.gamma > 0 && cfg.gamma < 1) || !(cfg.epsilon > 0 && cfg.epsilon < 1)) {
        throw ConfigError("gamma and epsilon must lie in (0,1)");
    }
    BlowupRate br;
    br.provenance = "fitted";
    const PauliObservable obs = PauliObservable::single(cfg.n_qubits, 0);
    for (std::size_t i = 0; i < cfg.volumes.size(); ++i) {
        const std::size_t V = cfg.volumes[i];
        const auto noisy = blowup_fit_instance(method, cfg.n_qubits, V, cfg.gamma);
        const auto r = mitigate(method, noisy, obs, cfg.shots, stream_key(cfg.seed, i, 31), cfg.zne_gain);
        if (!(r.variance_factor > 0) || !std::isfinite(r.variance_factor)) {
            throw FitError("non-positive variance estimate at V=" + std::to_string(V));
        }
        br.x.push_back(cfg.gamma * static_cast<double>(V));
        br.y.push_back(std::log(r.variance_factor));
    }
    const double k = static_cast<double>(br.x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < br.x.size(); ++i) {
        sx += br.x[i];
        sy += br.y[i];
        sxx += br.x[i] * br.x[i];
        sxy += br.x[i] * br.y[i];
    }
    const double den = k * sxx - sx * sx;
    if (!(den > 0)) {
        throw FitError("volume grid is degenerate");
    }
    br.lambda = (k * sxy - sx * sy) / den;
    const double intercept = (sy - br.lambda * sx) / k;
    double rss = 0;
    for (std::size_t i = 0; i < br.x.size(); ++i) {
        const double e = br.y[i] - intercept - br.lambda * br.x[i];
        rss += e * e;
    }
    const double se = std::sqrt(rss / (k - 2) * k / den);
    br.ci_low = br.lambda - 2 * se;
    br.ci_high = br.lambda + 2 * se;
    return br;
}

}  // namespace cvb
