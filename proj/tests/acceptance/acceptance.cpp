// One PASS/FAIL line per primary acceptance criterion; exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cvblab/active_volume.hpp"
#include "cvblab/cli.hpp"
#include "cvblab/crossover.hpp"
#include "cvblab/cvb.hpp"
#include "cvblab/em.hpp"
#include "cvblab/parallel.hpp"
#include "cvblab/sim.hpp"
#include "cvblab/steane.hpp"

using namespace cvb;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

// Collects sub-checks into one outcome.
struct Checks {
    Outcome out;
    void check(bool ok, const std::string &what) {
        if (!out.detail.empty()) {
            out.detail += "; ";
        }
        out.detail += (ok ? "" : "FAILED ") + what;
        out.pass = out.pass && ok;
    }
};

std::string fmt(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Rounds to `sig` significant digits.
double round_sig(double v, int sig) {
    const double p = std::pow(10.0, sig - 1 - static_cast<int>(std::floor(std::log10(std::abs(v)))));
    return std::round(v * p) / p;
}

double wls_slope(const std::vector<double> &x, const std::vector<double> &y, const std::vector<double> &w) {
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sw += w[i];
        sx += w[i] * x[i];
        sy += w[i] * y[i];
        sxx += w[i] * x[i] * x[i];
        sxy += w[i] * x[i] * y[i];
    }
    return (sw * sxy - sx * sy) / (sw * sxx - sx * sx);
}

Circuit cz_chain(std::size_t n, std::size_t volume) {
    std::vector<Layer> layers;
    for (std::size_t l = 0; l < volume; ++l) {
        const auto a = static_cast<std::uint32_t>(l % (n - 1));
        layers.push_back(Layer{{Gate{GateKind::CZ, {a, a + 1}, {}}}});
    }
    return Circuit(n, layers);
}

Outcome cvb_thresholds() {
    Checks c;
    const double lambda = 2, R = 10;
    const std::vector<std::pair<double, double>> targets{{0.15, 10}, {0.01, 100}, {0.001, 1000}};
    const std::vector<double> quoted{11.2, 168, 1684};
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const auto [eps, floor] = targets[i];
        const auto v = cvb::cvb(eps, R, lambda);
        const double closed = std::log(R) / (lambda * eps * (1 - 1 / std::sqrt(R)));
        const double exact_closed = (std::log(R) / lambda) / -std::log(1 - eps + eps / std::sqrt(R));
        c.check(v.approx > floor && v.exact && *v.exact > floor,
                "cvb(" + fmt(eps) + ")=" + fmt(v.approx) + " (exact ratio " + fmt(*v.exact) + ") > " + fmt(floor));
        c.check(rel(v.approx, closed) < 1e-6 && rel(*v.exact, exact_closed) < 1e-6, "closed forms to 1e-6");
        c.check(rel(v.approx, quoted[i]) < 5e-3, "matches " + fmt(quoted[i]));
    }
    return c.out;
}

Outcome overhead_range() {
    Checks c;
    const auto band = overhead_factor_range(2, 1e9);
    const auto f = [](double R) { return std::log(R) / (1 - 1 / std::sqrt(R)); };
    c.check(rel(band.lo, f(2)) < 1e-9 && rel(band.hi, f(1e9)) < 1e-9, "extremes at the range ends");
    c.check(rel(band.lo, 2.37) < 0.05 && rel(band.hi, 20.7) < 0.05,
            "range (" + fmt(band.lo) + ", " + fmt(band.hi) + ") vs (2.37, 20.7)");
    c.check(rel(band.hi, 20) < 0.05, "upper end within 5% of 20");
    return c.out;
}

Outcome em_volume_band() {
    Checks c;
    double lo = INFINITY, hi = 0;
    for (double lr = std::log(2.0); lr <= std::log(1e9) + 1e-12; lr += (std::log(1e9) - std::log(2.0)) / 400) {
        const double v = v_em(1e-3, 2, std::exp(lr));
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    c.check(rel(lo, std::log(2.0) / 2e-3) < 1e-9 && rel(hi, std::log(1e9) / 2e-3) < 1e-9,
            "band [" + fmt(lo) + ", " + fmt(hi) + "]");
    // endpoints at the precision they are quoted with
    c.check(round_sig(lo, 2) >= 3.5e2 && round_sig(hi, 3) <= 1.04e4,
            "quoted band [3.5e2, 1.04e4] at quoted precision");
    c.check(lo > 1e2 && hi < 1e5, "order of magnitude 1e3-1e4");
    return c.out;
}

Outcome decay_law() {
    Checks c;
    const double q = 0.01;
    const std::size_t M = 100000;
    std::vector<double> x, y, w;
    for (std::size_t V : {10u, 50u, 100u, 150u, 200u}) {
        auto nc = attach_noise(cz_chain(4, V), NoiseModel{GlobalDepolarizing{q}});
        const auto rec = sample_shots(nc, PauliObservable("ZIII"), M, 1000 + V);
        x.push_back(static_cast<double>(V));
        y.push_back(std::log(rec.mean()));
        w.push_back(std::pow(rec.mean() / rec.std_error(), 2));
    }
    const double rate = -wls_slope(x, y, w);
    c.check(rel(rate, -std::log(1 - q)) < 0.05, "fitted rate " + fmt(rate) + " vs " + fmt(-std::log(1 - q)));
    auto nc = attach_noise(cz_chain(4, 100), NoiseModel{GlobalDepolarizing{q}});
    const PauliObservable o("ZIII");
    const double ideal = ideal_expectation(nc.circuit, o);
    const int reps = 200;
    double s = 0, s2 = 0;
    for (int i = 0; i < reps; ++i) {
        const double m = rescale_mitigate(nc, o, 2000, 5000 + i).estimate.mean;
        s += m;
        s2 += m * m;
    }
    const double mean = s / reps;
    const double se = std::sqrt((s2 - reps * mean * mean) / (reps - 1) / reps);
    c.check(std::abs(mean - ideal) < 4 * se,
            "rescale mean over 200 seeds " + fmt(mean, 5) + " vs " + fmt(ideal) + " (se " + fmt(se, 2) + ")");
    return c.out;
}

Outcome blowup_rates() {
    Checks c;
    BlowupFitConfig cfg;
    cfg.n_qubits = 4;
    cfg.gamma = 2e-3;
    cfg.volumes = {20, 60, 100, 150, 200};
    cfg.shots = 20000;
    const double n4 = 1 - std::pow(4.0, -4);
    const auto rescale = fit_blowup_rate(EmMethod::Rescale, cfg);
    c.check(rel(rescale.lambda, 2 / n4) < 0.1, "rescale " + fmt(rescale.lambda) + " vs " + fmt(2 / n4));
    const auto ps = fit_blowup_rate(EmMethod::PostSelect, cfg);
    c.check(rel(ps.lambda, 1 / n4) < 0.1, "postselect " + fmt(ps.lambda) + " vs " + fmt(1 / n4));
    const auto pec = fit_blowup_rate(EmMethod::QuasiProb, cfg);
    c.check(pec.lambda >= 3.5 && pec.lambda <= 4.5, "pec " + fmt(pec.lambda) + " in [3.5, 4.5]");
    const double eps = 0.05;
    double worst = 0;
    std::mt19937_64 gen(77);
    for (int inst = 0; inst < 3; ++inst) {
        // random Clifford circuit with local Pauli noise
        std::vector<Layer> layers;
        for (int l = 0; l < 20; ++l) {
            Layer layer;
            const auto a = static_cast<std::uint32_t>(gen() % 3);
            layer.gates.push_back(Gate{gen() % 2 ? GateKind::CNOT : GateKind::CZ, {a, a + 1}, {}});
            layers.push_back(layer);
            const auto b = static_cast<std::uint32_t>(gen() % 4);
            const GateKind one[] = {GateKind::H, GateKind::S, GateKind::X};
            layers.push_back(Layer{{Gate{one[gen() % 3], {b}, {}}}});
        }
        Circuit circ(4, layers);
        // first Z-string with a nonvanishing ideal value
        PauliObservable o("ZIII");
        double ideal = 0;
        for (unsigned mask = 1; mask < 16 && ideal == 0; ++mask) {
            std::string s = "IIII";
            for (unsigned q = 0; q < 4; ++q) {
                if (mask >> q & 1u) {
                    s[q] = 'Z';
                }
            }
            o = PauliObservable(s);
            ideal = ideal_expectation(circ, o);
        }
        if (ideal == 0) {
            --inst;
            continue;
        }
        const auto nc = attach_noise(circ, NoiseModel{LocalDepolarizing{0.0, 0.005}});
        const auto r = zne_two_point(nc, o, 2.0, 400000, 8 + inst);
        worst = std::max(worst, std::abs(r.estimate.mean - ideal));
    }
    c.check(worst < eps / 10, "zne worst bias " + fmt(worst, 2) + " < " + fmt(eps / 10));
    return c.out;
}

Circuit random_circuit(std::size_t n, std::size_t depth, std::mt19937_64 &gen) {
    std::uniform_real_distribution<double> angle(0, 1.6);
    std::vector<Layer> layers;
    for (std::size_t l = 0; l < depth; ++l) {
        std::vector<std::uint32_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0u);
        std::shuffle(perm.begin(), perm.end(), gen);
        Layer layer;
        for (std::size_t i = 0; i < n;) {
            if (i + 1 < n && gen() % 3 != 0) {
                const double scale = gen() % 2 ? 1.0 : 0.02;
                layer.gates.push_back({GateKind::FSIM, {perm[i], perm[i + 1]}, {scale * angle(gen), angle(gen)}});
                i += 2;
            } else {
                layer.gates.push_back({GateKind::RY, {perm[i]}, {angle(gen)}});
                ++i;
            }
        }
        layers.push_back(layer);
    }
    return Circuit(n, layers);
}

Outcome active_volume_oracle() {
    Checks c;
    std::mt19937_64 gen(4242);
    const double eps = 0.05;
    const int circuits = 20;
    int contained = 0, negligible = 0;
    double worst = 0;
    std::size_t cone_total = 0, bf_total = 0;
    for (int t = 0; t < circuits; ++t) {
        const std::size_t n = 3 + static_cast<std::size_t>(t % 6);
        const std::size_t depth = 2 + static_cast<std::size_t>(t % 5);
        const auto circ = random_circuit(n, depth, gen);
        const PauliObservable o = PauliObservable::single(n, static_cast<std::uint32_t>(gen() % n));
        const auto cone = light_cone_volume(circ, o);
        const auto bf = brute_force_active_volume(circ, o, eps, 20, static_cast<std::uint64_t>(t));
        cone_total += cone.V();
        bf_total += bf.V();
        contained += std::includes(cone.gate_ids.begin(), cone.gate_ids.end(), bf.gate_ids.begin(), bf.gate_ids.end());
        std::vector<std::size_t> excluded;
        for (const auto &r : circ.gate_refs()) {
            const auto &g = circ.layers()[r.layer].gates[r.index];
            if (g.is_two_qubit() && !std::binary_search(bf.gate_ids.begin(), bf.gate_ids.end(), r.id)) {
                excluded.push_back(r.id);
            }
        }
        const double shift = max_replacement_shift(circ, o, excluded, 20, 90000 + static_cast<std::uint64_t>(t));
        worst = std::max(worst, shift);
        negligible += shift < eps / 10;
    }
    c.check(contained == circuits, std::to_string(contained) + "/20 oracle sets inside the light cone");
    c.check(negligible == circuits, std::to_string(negligible) + "/20 re-simulations below eps/10 (worst " +
                                        fmt(worst, 2) + ")");
    c.check(true, "V: light cone " + std::to_string(cone_total) + ", oracle " + std::to_string(bf_total));
    return c.out;
}

Outcome pyramid_geometry() {
    Checks c;
    double worst = 0;
    for (int d : {1, 2, 3}) {
        for (double v : {0.05, 0.1, 0.5, 1.0}) {
            for (double V : {10.0, 1e3, 1e6, 1e9}) {
                worst = std::max(worst, rel(pyramid_volume(qubits_of_volume(V, d, v), d, v), V));
            }
            for (double n : {2.0, 71.1, 1e4}) {
                worst = std::max(worst, rel(qubits_of_volume(pyramid_volume(n, d, v), d, v), n));
            }
        }
    }
    c.check(worst < 1e-9, "round-trip worst relative error " + fmt(worst, 2));
    const double n = qubits_of_volume(1000, 2, 0.1);
    const double n_closed = std::pow(600.0, 2.0 / 3.0);
    c.check(rel(n, n_closed) < 1e-9 && std::abs(n - 71.1) < 0.05, "n(1000) = " + fmt(n));
    HpcModel m;
    const double tc = t_classical(1000, n, m);
    const double tc_closed = 1000 * std::pow(2.0, n_closed) / 1e18;
    c.check(rel(tc, tc_closed) < 1e-9 && rel(tc, 2.6e6) < 0.05, "T_c = " + fmt(tc) + " s");
    return c.out;
}

Outcome advantage_timing() {
    Checks c;
    CrossoverConfig cfg;
    cfg.gamma = 1e-3;
    cfg.epsilon = 0.05;
    cfg.lambda = 2;
    cfg.timing = HardwareTiming::preset("sc");
    cfg.hpc.v = 0.1;
    cfg.hpc.d = 2;
    const double t_em = t_em_of_volume(1000, cfg);
    const double shots = std::exp(2 * 1e-3 * 1000) / (0.05 * 0.05);
    const double depth = (2 / (2 * 0.1)) * std::sqrt(std::pow(600.0, 2.0 / 3.0));
    const double t_em_closed = shots * (1e-3 + 100e-9 * depth);
    c.check(rel(t_em, t_em_closed) < 1e-6, "EM time " + fmt(t_em) + " s");
    c.check(t_em < 3600, "EM time under one hour");
    const double t_hpc = t_classical_geometry(1000, cfg.hpc);
    c.check(t_hpc > 1e6, "HPC time " + fmt(t_hpc) + " s > 1e6");
    return c.out;
}

Outcome code_table_check() {
    Checks c;
    const std::vector<double> quoted_ec{1e5, 1e6, 2e5, 6e7, 8e5, 9e6};
    const auto rows = code_table(builtin_codes(), 0.01);
    bool ok = rows.size() == 6;
    double worst = 1;
    for (std::size_t i = 0; ok && i < rows.size(); ++i) {
        const double lo = quoted_ec[i], hi = 10 * quoted_ec[i];
        for (auto [ours, theirs] : {std::pair{rows[i].v_ec_per_epsilon, lo}, {rows[i].v_lem.lo, lo}, {rows[i].v_lem.hi, hi}}) {
            const double ratio = std::max(ours / theirs, theirs / ours);
            worst = std::max(worst, ratio);
            ok = ok && ratio <= 2;
        }
    }
    c.check(ok, "six rows of V_EC and V_LEM within factor 2 (worst factor " + fmt(worst, 3) + ")");
    return c.out;
}

double loglog_slope(const std::vector<double> &x, const std::vector<double> &y) {
    std::vector<double> lx, ly, w(x.size(), 1.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    return wls_slope(lx, ly, w);
}

Outcome steane_structure() {
    Checks c;
    LemCurveConfig cfg;
    cfg.gamma = 5e-4;
    cfg.overhead = 2;
    for (int i = 0; i < 9; ++i) {
        cfg.epsilons.push_back(0.01 * std::pow(20.0, i / 8.0));
    }
    cfg.calibration_shots = 1000000;
    cfg.seed = 11;
    const auto curves = lem_cvb_curves(cfg);
    const auto &fit = curves.ec_fit;
    c.check(fit.gamma_prime < cfg.gamma,
            "(a) gamma' = " + fmt(fit.gamma_prime, 3) + " [" + fmt(fit.gamma_prime_lo, 3) + ", " +
                fmt(fit.gamma_prime_hi, 3) + "] < gamma");
    const double ec01 = curves.at(cfg.epsilons.front(), Strategy::EC).cvb;
    c.check(ec01 >= 1 && ec01 <= 3, "(b) CVB_EC(0.01) = " + fmt(ec01, 3) + " in [1, 3]" +
                                        (ec01 < 2 ? "" : " (not below 2)"));
    bool ordered = true;
    std::vector<double> ec, em, ext;
    for (double e : cfg.epsilons) {
        const double a = curves.at(e, Strategy::EC).cvb, b = curves.at(e, Strategy::EM).cvb,
                     x = curves.at(e, Strategy::ExtLEM).cvb;
        ordered = ordered && x >= std::max(a, b);
        ec.push_back(a);
        em.push_back(b);
        ext.push_back(x);
    }
    c.check(ordered, "(c) ExtLEM >= max(EC, EM) on all 9 grid points");
    const double s_em = loglog_slope(cfg.epsilons, em), s_ext = loglog_slope(cfg.epsilons, ext),
                 s_ec = loglog_slope(cfg.epsilons, ec);
    c.check(s_em >= -1.2 && s_em <= -0.8 && s_ext >= -1.2 && s_ext <= -0.8 && s_ec >= -0.2 && s_ec <= 0.2,
            "(d) slopes EM " + fmt(s_em, 3) + ", ExtLEM " + fmt(s_ext, 3) + ", EC " + fmt(s_ec, 3));
    return c.out;
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int cli_run(std::vector<std::string> args) {
    args.insert(args.begin(), "cvb-lab");
    std::vector<const char *> argv;
    for (const auto &a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out, err;
    return cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
}

Outcome determinism() {
    Checks c;
    const auto root = fs::temp_directory_path() / "cvblab_acceptance_determinism";
    fs::remove_all(root);
    fs::create_directories(root);
    {
        std::ofstream circ(root / "c.json");
        circ << R"({"n": 4, "layers": [[{"gate":"H","qubits":[0]},{"gate":"RY","qubits":[2],"params":[0.4]}],
          [{"gate":"CNOT","qubits":[0,1]},{"gate":"CZ","qubits":[2,3]}],[{"gate":"CNOT","qubits":[1,2]}]]})";
        std::ofstream obs(root / "o.json");
        obs << R"({"paulis":"ZZII"})";
    }
    const std::string circ = (root / "c.json").string(), obs = (root / "o.json").string();
    const std::vector<std::vector<std::string>> runs{
        {"cvb", "--lambda", "2", "--overhead", "10", "--epsilon-grid", "1e-3:0.3:log"},
        {"table3", "--epsilon", "0.01"},
        {"crossover", "--gamma", "1e-3", "--platform", "sc", "--v", "0.1", "--d", "2", "--v-grid", "0.05,0.1,0.2"},
        {"volume", "--circuit", circ, "--observable", obs, "--oracle", "--seed", "5"},
        {"em", "--method", "pec", "--circuit", circ, "--observable", obs, "--seed", "7", "--sweep-volumes",
         "10,40,80,120", "--sweep-shots", "4000"},
        {"lem", "--epsilon-grid", "0.01:0.3:log:7", "--calibration-shots", "100000", "--seed", "11"},
    };
    std::size_t compared = 0;
    bool identical = true;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const auto cmd = runs[i][0];
        const fs::path a = root / ("a_" + cmd), b = root / ("b_" + cmd);
        auto ra = runs[i], rb = runs[i];
        ra.insert(ra.end(), {"--threads", "1", "--out", a.string()});
        rb.insert(rb.end(), {"--threads", "8", "--out", b.string()});
        if (cli_run(ra) != 0 || cli_run(rb) != 0) {
            c.check(false, cmd + " failed to run");
            continue;
        }
        for (const auto &e : fs::directory_iterator(a)) {
            ++compared;
            const auto other = b / e.path().filename();
            if (!fs::exists(other) || slurp(e.path()) != slurp(other)) {
                identical = false;
                c.check(false, e.path().filename().string() + " differs");
            }
        }
    }
    set_thread_count(0);
    SteaneExperiment exp;
    exp.cycles = 10;
    exp.gamma = 1e-3;
    exp.shots = 20000;
    exp.seed = 99;
    const auto r1 = run_steane_memory(exp), r2 = run_steane_memory(exp);
    c.check(identical && r1 == r2, std::to_string(compared) + " artifacts byte-identical across reruns and thread counts");
    fs::remove_all(root);
    return c.out;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"cvb-thresholds", cvb_thresholds},
        {"overhead-factor-range", overhead_range},
        {"em-volume-band", em_volume_band},
        {"global-decay-law", decay_law},
        {"blowup-rates", blowup_rates},
        {"active-volume-oracle", active_volume_oracle},
        {"pyramid-geometry", pyramid_geometry},
        {"finite-advantage-timing", advantage_timing},
        {"code-table", code_table_check},
        {"steane-lem-structure", steane_structure},
        {"determinism", determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception &e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failures += o.pass ? 0 : 1;
        std::cout << (o.pass ? "PASS" : "FAIL") << " [" << (i + 1) << "] " << criteria[i].first << ": " << o.detail
                  << " (" << fmt(secs, 3) << " s)" << std::endl;
    }
    std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed" << std::endl;
    return failures == 0 ? 0 : 1;
}
