#include "cvblab/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <system_error>
#include <unistd.h>

#include <CLI11.hpp>

#include "cvblab/active_volume.hpp"
#include "cvblab/crossover.hpp"
#include "cvblab/csv.hpp"
#include "cvblab/cvb.hpp"
#include "cvblab/em.hpp"
#include "cvblab/errors.hpp"
#include "cvblab/parallel.hpp"
#include "cvblab/sim.hpp"
#include "cvblab/steane.hpp"

namespace cvb::cli {

namespace {

using json = nlohmann::json;

enum class Type { Number, Integer, Bool, String, Path, Grid, List, Choices };

struct Field {
    std::string key;
    Type type = Type::Number;
    json fallback = nullptr;  // null: no default
    std::string help;
    bool required = false;
    std::optional<double> min;
    std::optional<double> max;
    bool min_open = false;
    bool max_open = false;
    std::vector<std::string> choices;
    std::string symbol;  // name used in range diagnostics
};

struct Artifact {
    std::string name;
    std::string content;
    std::string summary;
};

struct Context {
    json params;
    std::uint64_t seed = 1;
    json metadata;
    std::vector<Artifact> artifacts;
    std::string status = "ok";

    double num(const std::string &k) const { return params.at(k).get<double>(); }
    std::size_t count(const std::string &k) const { return params.at(k).get<std::size_t>(); }
    bool flag(const std::string &k) const { return params.at(k).get<bool>(); }
    std::string str(const std::string &k) const { return params.at(k).get<std::string>(); }
    bool has(const std::string &k) const { return params.contains(k) && !params.at(k).is_null(); }
    std::vector<double> grid(const std::string &k) const {
        const auto &v = params.at(k);
        return v.is_string() ? parse_grid(v.get<std::string>()) : v.get<std::vector<double>>();
    }
    std::vector<double> list(const std::string &k) const { return params.at(k).get<std::vector<double>>(); }

    std::string csv_comment() const {
        return "tool=" + metadata["tool"].get<std::string>() + " version=" + metadata["version"].get<std::string>() +
               " command=" + metadata["command"].get<std::string>() +
               " config_hash=" + metadata["config_hash"].get<std::string>() + " seed=" + std::to_string(seed);
    }
    void add_csv(const std::string &name, CsvTable table) {
        table.comment.insert(table.comment.begin(), csv_comment());
        const std::size_t rows = table.rows.size();
        artifacts.push_back({name, table.str(), name + " (" + std::to_string(rows) + " rows)"});
    }
    void add_json(const std::string &name, json body, const std::string &summary) {
        body["metadata"] = metadata;
        artifacts.push_back({name, body.dump(2) + "\n", name + " (" + summary + ")"});
    }
};

struct Command {
    std::string name;
    std::string help;
    std::vector<Field> fields;
    std::function<void(Context &)> run;
    std::function<void(const json &, std::vector<Diagnostic> &)> cross_check;
};

// Field builders.
Field number(std::string key, json fallback, std::string help) {
    Field f;
    f.key = std::move(key);
    f.fallback = std::move(fallback);
    f.help = std::move(help);
    return f;
}
Field integer(std::string key, json fallback, std::string help) {
    Field f = number(std::move(key), std::move(fallback), std::move(help));
    f.type = Type::Integer;
    return f;
}
Field typed(Type t, std::string key, json fallback, std::string help) {
    Field f = number(std::move(key), std::move(fallback), std::move(help));
    f.type = t;
    return f;
}
Field positive(Field f) {
    f.min = 0;
    f.min_open = true;
    return f;
}
Field unit_open(Field f) {
    f.min = 0;
    f.max = 1;
    f.min_open = f.max_open = true;
    return f;
}
Field at_least(Field f, double lo) {
    f.min = lo;
    return f;
}
Field named(Field f, std::string symbol) {
    f.symbol = std::move(symbol);
    return f;
}
Field required(Field f) {
    f.required = true;
    return f;
}
Field choice(std::string key, json fallback, std::vector<std::string> choices, std::string help) {
    Field f = typed(Type::String, std::move(key), std::move(fallback), std::move(help));
    f.choices = std::move(choices);
    return f;
}

std::string flag_name(const std::string &key) {
    std::string s = "--" + key;
    std::replace(s.begin(), s.end(), '_', '-');
    return s;
}

std::string range_text(const Field &f) {
    const std::string name = f.symbol.empty() ? f.key : f.symbol;
    if (f.min && f.max) {
        return name + " in " + (f.min_open ? "(" : "[") + format_number(*f.min) + ", " + format_number(*f.max) +
               (f.max_open ? ")" : "]");
    }
    if (f.min) {
        return name + (f.min_open ? " > " : " >= ") + format_number(*f.min);
    }
    if (f.max) {
        return name + (f.max_open ? " < " : " <= ") + format_number(*f.max);
    }
    return name;
}

bool in_range(const Field &f, double v) {
    if (!std::isfinite(v)) {
        return false;
    }
    if (f.min && (f.min_open ? !(v > *f.min) : !(v >= *f.min))) {
        return false;
    }
    if (f.max && (f.max_open ? !(v < *f.max) : !(v <= *f.max))) {
        return false;
    }
    return true;
}

std::optional<double> parse_double(std::string_view s) {
    while (!s.empty() && s.front() == ' ') {
        s.remove_prefix(1);
    }
    while (!s.empty() && s.back() == ' ') {
        s.remove_suffix(1);
    }
    if (!s.empty() && s.front() == '+') {
        s.remove_prefix(1);
    }
    double v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        return std::nullopt;
    }
    return v;
}

std::optional<std::uint64_t> parse_u64(std::string_view s) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        return std::nullopt;
    }
    return v;
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

// Coerces a raw value (typed JSON or a flag string) to the field's canonical JSON form.
std::optional<json> coerce(const Field &f, const json &raw, std::vector<Diagnostic> &diags) {
    const auto bad = [&](const std::string &why) {
        diags.push_back({f.key, why});
        return std::optional<json>{};
    };
    const auto check_numbers = [&](const std::vector<double> &values) -> bool {
        for (double v : values) {
            if (!in_range(f, v)) {
                diags.push_back({f.key, f.key + " = " + format_number(v) + " violates " + range_text(f)});
                return false;
            }
        }
        return true;
    };
    switch (f.type) {
        case Type::Number: {
            std::optional<double> v;
            if (raw.is_number()) {
                v = raw.get<double>();
            } else if (raw.is_string()) {
                v = parse_double(raw.get<std::string>());
            }
            if (!v) {
                return bad(f.key + " must be a number");
            }
            if (!check_numbers({*v})) {
                return std::nullopt;
            }
            return json(*v);
        }
        case Type::Integer: {
            std::optional<std::uint64_t> v;
            if (raw.is_number_unsigned()) {
                v = raw.get<std::uint64_t>();
            } else if (raw.is_number_integer() && raw.get<long long>() >= 0) {
                v = static_cast<std::uint64_t>(raw.get<long long>());
            } else if (raw.is_string()) {
                v = parse_u64(raw.get<std::string>());
            }
            if (!v) {
                return bad(f.key + " must be a non-negative integer");
            }
            if (!check_numbers({static_cast<double>(*v)})) {
                return std::nullopt;
            }
            return json(*v);
        }
        case Type::Bool: {
            if (raw.is_boolean()) {
                return raw;
            }
            if (raw.is_string() && (raw == "true" || raw == "false")) {
                return json(raw == "true");
            }
            return bad(f.key + " must be true or false");
        }
        case Type::String:
        case Type::Path: {
            if (!raw.is_string()) {
                return bad(f.key + " must be a string");
            }
            const auto s = raw.get<std::string>();
            if (!f.choices.empty() && std::find(f.choices.begin(), f.choices.end(), s) == f.choices.end()) {
                std::string all;
                for (const auto &c : f.choices) {
                    all += (all.empty() ? "" : ", ") + c;
                }
                return bad(f.key + " = '" + s + "' is not one of {" + all + "}");
            }
            if (f.type == Type::Path && s.empty()) {
                return bad(f.key + " must be a non-empty path");
            }
            return raw;
        }
        case Type::Grid:
        case Type::List: {
            std::vector<double> values;
            try {
                if (raw.is_string()) {
                    values = f.type == Type::Grid ? parse_grid(raw.get<std::string>()) : parse_list(raw.get<std::string>());
                } else if (raw.is_array()) {
                    for (const auto &x : raw) {
                        if (!x.is_number()) {
                            return bad(f.key + " entries must be numbers");
                        }
                        values.push_back(x.get<double>());
                    }
                } else {
                    return bad(f.key + " must be a grid string or a list of numbers");
                }
            } catch (const ConfigError &e) {
                return bad(f.key + ": " + e.what());
            }
            if (values.empty()) {
                return bad(f.key + " is empty");
            }
            if (!check_numbers(values)) {
                return std::nullopt;
            }
            if (f.type == Type::Grid && raw.is_string()) {
                return raw;
            }
            return json(values);
        }
        case Type::Choices: {
            std::vector<std::string> items;
            if (raw.is_string()) {
                items = split(raw.get<std::string>(), ',');
            } else if (raw.is_array()) {
                for (const auto &x : raw) {
                    if (!x.is_string()) {
                        return bad(f.key + " entries must be strings");
                    }
                    items.push_back(x.get<std::string>());
                }
            } else {
                return bad(f.key + " must be a comma-separated string");
            }
            if (items.empty()) {
                return bad(f.key + " is empty");
            }
            for (const auto &it : items) {
                if (std::find(f.choices.begin(), f.choices.end(), it) == f.choices.end()) {
                    return bad(f.key + ": unknown entry '" + it + "'");
                }
            }
            return json(items);
        }
    }
    return std::nullopt;
}

// ---- commands ----

void run_cvb(Context &c) {
    const auto rows = cvb_curve(c.grid("epsilon_grid"), c.num("overhead"), c.num("lambda"), c.num("gamma"));
    CsvTable t;
    t.header = {"epsilon", "v_bare", "v_em", "cvb_exact", "cvb_approx"};
    for (const auto &r : rows) {
        const double exact = r.cvb.exact ? *r.cvb.exact : std::numeric_limits<double>::infinity();
        t.add_row({format_number(r.epsilon), format_number(r.v_bare), format_number(r.v_em), format_number(exact),
                   format_number(r.cvb.approx)});
    }
    c.add_csv("fig1.csv", std::move(t));
}

void run_table3(Context &c) {
    const double eps = c.num("epsilon");
    const auto rows = code_table(builtin_codes(), eps, c.num("lambda"));
    CsvTable t;
    t.header = {"code", "family", "n", "k", "d", "d_is_upper_bound", "n_tot", "net_rate", "gamma_prime",
                "epsilon", "v_ec", "v_lem_lo", "v_lem_hi"};
    for (const auto &r : rows) {
        const auto &s = r.code;
        t.add_row({s.label(), s.family, format_number(static_cast<long long>(s.n)),
                   format_number(static_cast<long long>(s.k)), format_number(static_cast<long long>(s.d)),
                   s.d_is_upper_bound ? "true" : "false", format_number(static_cast<long long>(s.n_tot)),
                   format_number(s.net_rate()), format_number(s.gamma_prime), format_number(eps),
                   format_number(r.v_ec), format_number(r.v_lem.lo), format_number(r.v_lem.hi)});
    }
    c.add_csv("table3.csv", std::move(t));
}

HpcModel hpc_from(const Context &c) {
    HpcModel m;
    m.flops = c.num("flops");
    m.v = c.num("v");
    m.d = static_cast<int>(c.count("d"));
    m.complex_op_factor = c.flag("complex_ops");
    m.real_op_factor = c.flag("real_ops");
    return m;
}

void run_crossover(Context &c) {
    CrossoverConfig cfg;
    cfg.gamma = c.num("gamma");
    cfg.lambda = c.num("lambda");
    cfg.epsilon = c.num("epsilon");
    cfg.overhead = c.num("overhead");
    cfg.timing = HardwareTiming::preset(c.str("platform"));
    if (c.has("t_layer")) {
        cfg.timing.t_layer = c.num("t_layer");
        cfg.timing.label = "custom";
    }
    if (c.has("t_shot_fixed")) {
        cfg.timing.t_shot_fixed = c.num("t_shot_fixed");
        cfg.timing.label = "custom";
    }
    cfg.hpc = hpc_from(c);
    cfg.v_min = c.num("v_min");
    cfg.v_max = c.num("v_max");
    cfg.grid_points = c.count("points");
    cfg.advantage_margin = c.num("margin");
    const auto res = crossover_volume(cfg);
    CsvTable t;
    t.header = {"V", "t_em_seconds", "t_hpc_seconds", "log10_t_em", "log10_t_hpc"};
    for (const auto &r : res.grid) {
        t.add_row({format_number(r.V), format_number(r.t_em_seconds), format_number(r.t_hpc_seconds),
                   format_number(t_em_of_volume_log10(r.V, cfg)),
                   format_number(t_classical_geometry_log10(r.V, cfg.hpc))});
    }
    c.add_csv("fig2.csv", std::move(t));
    if (c.has("v_grid")) {
        const auto rows = velocity_background(c.list("v_grid"), cfg);
        CsvTable b;
        b.header = {"v", "V", "t_hpc_seconds", "log10_t_hpc"};
        for (const auto &r : rows) {
            HpcModel m = cfg.hpc;
            m.v = r.v;
            b.add_row({format_number(r.v), format_number(r.V), format_number(r.t_hpc_seconds),
                       format_number(t_classical_geometry_log10(r.V, m))});
        }
        c.add_csv("fig2_background.csv", std::move(b));
    }
    json report = res.to_json();
    c.status = res.crossover_V ? "ok" : "no-crossover";
    report["status"] = c.status;
    report["timing"] = {{"label", cfg.timing.label},
                        {"t_layer", cfg.timing.t_layer},
                        {"t_shot_fixed", cfg.timing.t_shot_fixed}};
    c.add_json("crossover.json", report,
               res.crossover_V ? "crossover_V=" + format_number(*res.crossover_V) : std::string("no crossover"));
}

json read_json_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read " + path);
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error &e) {
        throw ConfigError(path + ": " + e.what());
    }
}

Circuit load_circuit(const std::string &path) {
    try {
        return circuit_from_json(read_json_file(path));
    } catch (const json::exception &e) {
        throw ConfigError(path + ": " + e.what());
    }
}

PauliObservable load_observable(const Context &c, const Circuit &circuit) {
    if (!c.has("observable")) {
        return PauliObservable("Z" + std::string(circuit.n_qubits() - 1, 'I'));
    }
    try {
        return observable_from_json(read_json_file(c.str("observable")));
    } catch (const json::exception &e) {
        throw ConfigError(c.str("observable") + ": " + e.what());
    }
}

void run_volume(Context &c) {
    const auto circuit = load_circuit(c.str("circuit"));
    if (!c.has("observable")) {
        throw ConfigError("volume needs --observable");
    }
    const auto obs = load_observable(c, circuit);
    const auto cone = light_cone_volume(circuit, obs);
    json report = cone.to_json();
    report["epsilon"] = c.num("epsilon");
    if (c.flag("oracle")) {
        const auto bf = brute_force_active_volume(circuit, obs, c.num("epsilon"), c.count("trials"), c.seed);
        json o = bf.to_json();
        o["subset_of_light_cone"] = std::includes(cone.gate_ids.begin(), cone.gate_ids.end(), bf.gate_ids.begin(),
                                                  bf.gate_ids.end());
        o["trials"] = c.count("trials");
        report["oracle"] = o;
    }
    c.add_json("volume.json", report, "V=" + std::to_string(cone.V()));
}

void run_em(Context &c) {
    const auto method = em_method_from_name(c.str("method"));
    const double gamma = c.num("gamma"), eps = c.num("epsilon"), R = c.num("overhead");
    json report{{"method", em_method_name(method)}, {"gamma", gamma}, {"epsilon", eps}, {"overhead", R}};
    std::string summary;
    if (c.has("circuit")) {
        const auto circuit = load_circuit(c.str("circuit"));
        const auto obs = load_observable(c, circuit);
        NoiseModel model;
        std::string noise = c.str("noise");
        if (noise == "auto") {
            noise = method == EmMethod::Rescale || method == EmMethod::PostSelect ? "global" : "local";
        }
        if (noise == "global") {
            model.kind = GlobalDepolarizing{depolarizing_from_infidelity(gamma, circuit.n_qubits())};
        } else {
            model.kind = LocalDepolarizing{0, gamma};
        }
        const auto noisy = attach_noise(circuit, model);
        const auto budget = static_cast<std::size_t>(std::ceil(R / (eps * eps) - 1e-9));
        report["noise"] = noise;
        report["V"] = noisy.noisy_gate_count();
        report["shot_budget"] = budget;
        try {
            const auto res = mitigate(method, noisy, obs, budget, c.seed, c.num("zne_gain"));
            const double m_required = std::ceil(res.variance_factor / (eps * eps) - 1e-9);
            report["estimate"] = res.estimate.to_json();
            report["cost"] = {{"variance_factor", res.variance_factor},
                              {"M_required", m_required},
                              {"feasible", m_required <= static_cast<double>(budget)},
                              {"sampling_cost", res.sampling_cost},
                              {"acceptance", res.acceptance}};
            report["result"] = res.to_json();
            summary = "mean=" + format_number(res.estimate.mean);
        } catch (const StarvationError &e) {
            c.status = "starvation";
            report["starvation"] = {{"message", e.what()}, {"acceptance", e.acceptance()}};
            summary = "starvation";
        }
        try {
            report["ideal"] = ideal_expectation(circuit, obs);
        } catch (const CapacityError &) {
            report["ideal"] = nullptr;
        }
    }
    if (c.has("sweep_volumes")) {
        BlowupFitConfig cfg;
        cfg.n_qubits = c.count("sweep_qubits");
        cfg.gamma = gamma;
        cfg.volumes.clear();
        for (double v : c.list("sweep_volumes")) {
            cfg.volumes.push_back(static_cast<std::size_t>(std::llround(v)));
        }
        cfg.epsilon = eps;
        cfg.shots = c.count("sweep_shots");
        cfg.seed = c.seed;
        cfg.zne_gain = c.num("sweep_zne_gain");
        const auto fit = fit_blowup_rate(method, cfg);
        CsvTable t;
        t.header = {"V", "M_required", "lambda_fit"};
        for (std::size_t i = 0; i < fit.y.size(); ++i) {
            t.add_row({format_number(static_cast<long long>(cfg.volumes[i])),
                       format_number(std::exp(fit.y[i]) / (eps * eps)), format_number(fit.lambda)});
        }
        c.add_csv("em_sweep.csv", std::move(t));
        report["blowup"] = fit.to_json();
        summary += (summary.empty() ? "" : ", ") + std::string("lambda_fit=") + format_number(fit.lambda);
    }
    report["status"] = c.status;
    c.add_json("em.json", report, summary);
}

void run_lem(Context &c) {
    LemCurveConfig cfg;
    cfg.gamma = c.num("gamma");
    cfg.epsilons = c.grid("epsilon_grid");
    cfg.overhead = c.num("overhead");
    cfg.strategies.clear();
    for (const auto &s : c.params.at("strategies").get<std::vector<std::string>>()) {
        cfg.strategies.push_back(strategy_from_name(s));
    }
    cfg.calibration_depths.clear();
    for (double d : c.list("depths")) {
        cfg.calibration_depths.push_back(static_cast<std::size_t>(std::llround(d)));
    }
    cfg.calibration_shots = c.count("calibration_shots");
    cfg.seed = c.seed;
    json report;
    try {
        const auto curves = lem_cvb_curves(cfg);
        CsvTable t;
        t.header = {"epsilon", "strategy", "max_volume", "cvb"};
        for (const auto &r : curves.rows) {
            t.add_row({format_number(r.epsilon), std::string(strategy_name(r.strategy)), format_number(r.max_volume),
                       format_number(r.cvb)});
        }
        c.add_csv("fig3.csv", std::move(t));
        report = curves.calibration_json();
    } catch (const StarvationError &e) {
        c.status = "starvation";
        report["starvation"] = {{"message", e.what()}, {"acceptance", e.acceptance()}};
    }
    report["status"] = c.status;
    report["gamma"] = cfg.gamma;
    report["overhead"] = cfg.overhead;
    c.add_json("lem_calibration.json", report,
               c.status == "ok" ? "gamma_prime=" + format_number(report["ec"]["gamma_prime"].get<double>())
                                : std::string("starvation"));
}

void run_geometry(Context &c) {
    const auto hpc = hpc_from(c);
    const int d = hpc.d;
    const double v = hpc.v;
    double V = 0, n = 0;
    if (c.has("volume")) {
        V = c.num("volume");
        n = qubits_of_volume(V, d, v);
    } else {
        n = c.num("qubits");
        V = pyramid_volume(n, d, v);
    }
    json report{{"V", V},
                {"n", n},
                {"depth", pyramid_depth(n, v, d)},
                {"v", v},
                {"d", d},
                {"t_classical_seconds", t_classical(V, n, hpc)},
                {"log10_t_classical", t_classical_log10(V, n, hpc)}};
    c.add_json("geometry.json", report, "n=" + format_number(n) + ", V=" + format_number(V));
}

Field epsilon_field(double fallback) { return named(unit_open(number("epsilon", fallback, "target accuracy")), "epsilon"); }
Field overhead_field(double fallback) {
    return named(at_least(number("overhead", fallback, "shot overhead R = M eps^2"), 1), "R");
}
Field lambda_field() { return named(positive(number("lambda", 2.0, "blow-up rate")), "lambda"); }
Field gamma_field(double fallback) {
    return named(unit_open(number("gamma", fallback, "infidelity per two-qubit gate")), "gamma");
}
Field grid_field(const std::string &fallback) {
    return named(unit_open(typed(Type::Grid, "epsilon_grid", fallback, "epsilon grid lo:hi:log[:n]")), "epsilon");
}
std::vector<Field> hpc_fields() {
    return {named(positive(number("v", 0.1, "operator spreading velocity")), "v"),
            at_least(integer("d", 2, "lattice dimension"), 1),
            positive(number("flops", 1e18, "HPC operations per second")),
            typed(Type::Bool, "complex_ops", false, "apply the x4 complex-op factor"),
            typed(Type::Bool, "real_ops", false, "apply the x7.5 real-op factor")};
}

const std::vector<Command> &commands() {
    static const std::vector<Command> all = [] {
        std::vector<Command> cs;
        cs.push_back({"cvb", "circuit volume boost sweep (fig1.csv)",
                      {lambda_field(), overhead_field(10), grid_field("1e-3:0.3:log"),
                       named([] {
                           Field f = number("gamma", 1.0, "physical infidelity; volumes are in units of 1/gamma at 1");
                           f.min = 0;
                           f.max = 1;
                           f.min_open = true;
                           return f;
                       }(),
                             "gamma")},
                      run_cvb, nullptr});
        cs.push_back({"table3", "code table with EC and LEM volumes (table3.csv)",
                      {epsilon_field(0.01), lambda_field()}, run_table3, nullptr});
        {
            std::vector<Field> f{gamma_field(1e-3),
                                 lambda_field(),
                                 epsilon_field(0.05),
                                 overhead_field(10),
                                 choice("platform", "sc", {"sc", "superconducting", "ion", "trapped-ion"},
                                        "hardware timing preset"),
                                 at_least(number("t_layer", nullptr, "override: seconds per layer"), 0),
                                 at_least(number("t_shot_fixed", nullptr, "override: fixed seconds per shot"), 0)};
            for (auto &h : hpc_fields()) {
                f.push_back(h);
            }
            f.push_back(positive(number("v_min", 1.0, "smallest volume on the grid")));
            f.push_back(positive(number("v_max", 1e9, "largest volume on the grid")));
            f.push_back(at_least(integer("points", 361, "grid points"), 2));
            f.push_back(at_least(number("margin", 10.0, "advantage factor below HPC time"), 1));
            f.push_back(named(positive(typed(Type::List, "v_grid", nullptr, "velocities for the background dataset")),
                              "v"));
            cs.push_back({"crossover", "EM vs HPC run-time crossover (fig2.csv, crossover.json)", f, run_crossover,
                          [](const json &p, std::vector<Diagnostic> &d) {
                              if (p.contains("v_min") && p.contains("v_max") &&
                                  !(p["v_min"].get<double>() < p["v_max"].get<double>())) {
                                  d.push_back({"v_max", "v_max must exceed v_min"});
                              }
                          }});
        }
        cs.push_back({"volume", "active volume of a circuit and observable (volume.json)",
                      {required(typed(Type::Path, "circuit", nullptr, "circuit JSON")),
                       required(typed(Type::Path, "observable", nullptr, "observable JSON")), epsilon_field(0.05),
                       typed(Type::Bool, "oracle", false, "also run the brute-force replacement oracle"),
                       at_least(integer("trials", 20, "random replacements per oracle test"), 1)},
                      run_volume, nullptr});
        cs.push_back(
            {"em", "error-mitigated estimate and blow-up sweep (em.json, em_sweep.csv)",
             {required(choice("method", nullptr, {"unmitigated", "rescale", "postselect", "pec", "zne"}, "EM method")),
              typed(Type::Path, "circuit", nullptr, "circuit JSON"),
              typed(Type::Path, "observable", nullptr, "observable JSON (default Z on qubit 0)"),
              choice("noise", "auto", {"auto", "local", "global"},
                     "noise model; auto is global for rescale and postselect, local otherwise"), gamma_field(1e-3), epsilon_field(0.05),
              overhead_field(10), named([] {
                  Field f = number("zne_gain", 2.0, "ZNE noise gain G");
                  f.min = 1;
                  f.min_open = true;
                  return f;
              }(), "G"),
              named(at_least(typed(Type::List, "sweep_volumes", nullptr, "volumes for the blow-up fit"), 1), "V"),
              at_least(integer("sweep_qubits", 4, "qubits in the blow-up fit instance"), 2),
              at_least(integer("sweep_shots", 20000, "shots per sweep point"), 2), named([] {
                  Field f = number("sweep_zne_gain", 1.05, "ZNE noise gain in the sweep");
                  f.min = 1;
                  f.min_open = true;
                  return f;
              }(), "G")},
             run_em,
             [](const json &p, std::vector<Diagnostic> &d) {
                 if (!p.contains("circuit") && !p.contains("sweep_volumes")) {
                     d.push_back({"circuit", "em needs --circuit or --sweep-volumes"});
                 }
             }});
        cs.push_back({"lem", "Steane logical memory CVB curves (fig3.csv, lem_calibration.json)",
                      {gamma_field(5e-4), grid_field("0.01:0.3:log"), overhead_field(2), [] {
                           Field f = typed(Type::Choices, "strategies", "bare,ec,em,ecps,extlem",
                                           "comma-separated strategies");
                           f.choices = {"bare", "ec", "em", "ecps", "extlem", "salem"};
                           return f;
                       }(),
                       at_least(typed(Type::List, "depths", "4,8,16,32", "calibration cycle depths"), 1),
                       at_least(integer("calibration_shots", 1000000, "shots per calibration depth"), 1)},
                      run_lem,
                      [](const json &p, std::vector<Diagnostic> &d) {
                          if (p.contains("depths") && p["depths"].size() < 2) {
                              d.push_back({"depths", "at least 2 calibration depths are needed"});
                          }
                          if (p.contains("strategies")) {
                              for (const auto &s : p["strategies"]) {
                                  if (s == "salem") {
                                      d.push_back({"strategies", "salem is an extension point and is not implemented"});
                                  }
                              }
                          }
                      }});
        {
            std::vector<Field> f{positive(number("volume", nullptr, "circuit volume V")),
                                 positive(number("qubits", nullptr, "qubit count n"))};
            for (auto &h : hpc_fields()) {
                f.push_back(h);
            }
            cs.push_back({"geometry", "pyramid n <-> V conversion and HPC time (geometry.json)", f, run_geometry,
                          [](const json &p, std::vector<Diagnostic> &d) {
                              if (p.contains("volume") == p.contains("qubits")) {
                                  d.push_back({"volume", "give exactly one of --volume and --qubits"});
                              }
                          }});
        }
        return cs;
    }();
    return all;
}

const Command *find_command(const std::string &name) {
    for (const auto &c : commands()) {
        if (c.name == name) {
            return &c;
        }
    }
    return nullptr;
}

// Resolves raw parameters against the schema; diagnostics on failure.
json resolve(const Command &cmd, const json &raw, std::vector<Diagnostic> &diags) {
    json out = json::object();
    for (const auto &[k, v] : raw.items()) {
        if (std::none_of(cmd.fields.begin(), cmd.fields.end(), [&](const Field &f) { return f.key == k; })) {
            diags.push_back({k, "unknown parameter '" + k + "' for command " + cmd.name});
        }
    }
    for (const auto &f : cmd.fields) {
        if (raw.contains(f.key) && !raw.at(f.key).is_null()) {
            if (auto v = coerce(f, raw.at(f.key), diags)) {
                out[f.key] = *v;
            }
        } else if (f.required) {
            diags.push_back({f.key, "missing required parameter " + f.key});
        } else if (!f.fallback.is_null()) {
            if (auto v = coerce(f, f.fallback, diags)) {
                out[f.key] = *v;
            }
        }
    }
    if (cmd.cross_check && diags.empty()) {
        cmd.cross_check(out, diags);
    }
    return out;
}

struct ParsedConfig {
    std::string command;
    json parameters = json::object();
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output_dir;
};

void line_column(const std::string &text, std::size_t byte, std::size_t &line, std::size_t &column) {
    line = 1;
    column = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
}

// Structural check of a config document.
ParsedConfig read_config_document(const json &doc, std::vector<Diagnostic> &diags) {
    ParsedConfig cfg;
    if (!doc.is_object()) {
        diags.push_back({"", "config must be a JSON object"});
        return cfg;
    }
    for (const auto &[k, v] : doc.items()) {
        if (k != "command" && k != "seed" && k != "output_dir" && k != "parameters") {
            diags.push_back({k, "unknown top-level key '" + k + "'"});
        }
    }
    if (doc.contains("command")) {
        if (doc["command"].is_string()) {
            cfg.command = doc["command"].get<std::string>();
        } else {
            diags.push_back({"command", "command must be a string"});
        }
    }
    if (doc.contains("seed")) {
        if (doc["seed"].is_number_unsigned()) {
            cfg.seed = doc["seed"].get<std::uint64_t>();
        } else if (doc["seed"].is_number_integer() && doc["seed"].get<long long>() >= 0) {
            cfg.seed = static_cast<std::uint64_t>(doc["seed"].get<long long>());
        } else {
            diags.push_back({"seed", "seed must be a non-negative integer"});
        }
    }
    if (doc.contains("output_dir")) {
        if (doc["output_dir"].is_string()) {
            cfg.output_dir = doc["output_dir"].get<std::string>();
        } else {
            diags.push_back({"output_dir", "output_dir must be a string"});
        }
    }
    if (doc.contains("parameters")) {
        if (doc["parameters"].is_object()) {
            cfg.parameters = doc["parameters"];
        } else {
            diags.push_back({"parameters", "parameters must be an object"});
        }
    }
    return cfg;
}

json error_json(const std::string &kind, const std::string &message, int code,
                const std::vector<Diagnostic> &diags = {}) {
    json j{{"status", "error"}, {"kind", kind}, {"message", message}, {"exit_code", code}};
    if (!diags.empty()) {
        json d = json::array();
        for (const auto &x : diags) {
            d.push_back({{"field", x.field}, {"message", x.message}});
        }
        j["diagnostics"] = d;
    }
    return j;
}

int fail(std::ostream &err, const std::string &kind, const std::string &message, int code,
         const std::vector<Diagnostic> &diags = {}) {
    err << error_json(kind, message, code, diags).dump() << "\n";
    return code;
}

int exit_code_for(const Error &e) {
    const std::string kind = e.kind();
    if (kind == "capacity") {
        return kExitCapacity;
    }
    if (kind == "config" || kind == "geometry") {
        return kExitSchema;
    }
    return kExitFailure;
}

}  // namespace

std::vector<double> parse_list(std::string_view spec) {
    std::vector<double> out;
    for (const auto &part : split(spec, ',')) {
        const auto v = parse_double(part);
        if (!v) {
            throw ConfigError("'" + part + "' is not a number");
        }
        out.push_back(*v);
    }
    return out;
}

std::vector<double> parse_grid(std::string_view spec) {
    if (spec.find(':') == std::string_view::npos) {
        return parse_list(spec);
    }
    const auto parts = split(spec, ':');
    if (parts.size() < 3 || parts.size() > 4) {
        throw ConfigError("grid must be lo:hi:log[:n] or lo:hi:lin[:n]");
    }
    const auto lo = parse_double(parts[0]), hi = parse_double(parts[1]);
    if (!lo || !hi) {
        throw ConfigError("grid endpoints must be numbers");
    }
    const bool log = parts[2] == "log";
    if (!log && parts[2] != "lin") {
        throw ConfigError("grid scale must be log or lin");
    }
    std::size_t n = 25;
    if (parts.size() == 4) {
        const auto v = parse_u64(parts[3]);
        if (!v || *v < 2) {
            throw ConfigError("grid point count must be an integer >= 2");
        }
        n = static_cast<std::size_t>(*v);
    }
    if (!(*lo < *hi)) {
        throw ConfigError("grid needs lo < hi");
    }
    if (log && !(*lo > 0)) {
        throw ConfigError("log grid needs lo > 0");
    }
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(n - 1);
        out[i] = log ? std::exp(std::log(*lo) + t * (std::log(*hi) - std::log(*lo))) : *lo + t * (*hi - *lo);
    }
    out.front() = *lo;
    out.back() = *hi;
    return out;
}

std::uint64_t config_hash(const json &j) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : j.dump()) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

void write_atomic(const std::filesystem::path &path, const std::string &content) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    auto tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        }
        out << content;
        out.flush();
        if (!out) {
            std::filesystem::remove(tmp);
            throw std::runtime_error("failed writing " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

json ValidationReport::to_json() const {
    json d = json::array();
    for (const auto &x : diagnostics) {
        d.push_back({{"field", x.field}, {"message", x.message}});
    }
    json j{{"status", !parsed ? "parse-error" : (valid() ? "valid" : "invalid")}, {"diagnostics", d}};
    if (!parsed) {
        j["line"] = line;
        j["column"] = column;
        j["message"] = parse_message;
    }
    return j;
}

ValidationReport validate_config_text(const std::string &text) {
    ValidationReport rep;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error &e) {
        rep.parsed = false;
        line_column(text, e.byte > 0 ? e.byte - 1 : 0, rep.line, rep.column);
        rep.parse_message = e.what();
        return rep;
    }
    const auto cfg = read_config_document(doc, rep.diagnostics);
    if (cfg.command.empty()) {
        if (doc.is_object() && !doc.contains("command")) {
            rep.diagnostics.push_back({"command", "missing command"});
        }
        return rep;
    }
    const Command *cmd = find_command(cfg.command);
    if (!cmd) {
        rep.diagnostics.push_back({"command", "unknown command '" + cfg.command + "'"});
        return rep;
    }
    resolve(*cmd, cfg.parameters, rep.diagnostics);
    return rep;
}

ValidationReport validate_config(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        ValidationReport rep;
        rep.parsed = false;
        rep.parse_message = "cannot read " + path.string();
        return rep;
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return validate_config_text(ss.str());
}

std::vector<std::string> command_names() {
    std::vector<std::string> out;
    for (const auto &c : commands()) {
        out.push_back(c.name);
    }
    return out;
}

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
    CLI::App app{"Resource estimator and simulator for error-mitigated quantum computation", kToolName};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    struct Common {
        std::string config;
        std::string out_dir;
        std::string seed;
        std::size_t threads = 0;
    };
    std::map<std::string, Common> common;
    std::map<std::string, std::map<std::string, std::string>> values;
    std::map<std::string, std::map<std::string, bool>> flags;
    std::map<std::string, CLI::App *> subs;

    for (const auto &cmd : commands()) {
        auto *sub = app.add_subcommand(cmd.name, cmd.help);
        subs[cmd.name] = sub;
        auto &cm = common[cmd.name];
        sub->add_option("--config", cm.config, "JSON config file; flags override it");
        sub->add_option("--out", cm.out_dir, "output directory (default .)");
        sub->add_option("--seed", cm.seed, "RNG seed (u64, default 1)");
        sub->add_option("--threads", cm.threads, "worker cap (falls back to CVB_LAB_THREADS)");
        for (const auto &f : cmd.fields) {
            std::string help = f.help;
            if (!f.fallback.is_null()) {
                help += " (default " + (f.fallback.is_string() ? f.fallback.get<std::string>() : f.fallback.dump()) + ")";
            }
            if (f.type == Type::Bool) {
                sub->add_flag(flag_name(f.key), flags[cmd.name][f.key], help);
            } else {
                sub->add_option(flag_name(f.key), values[cmd.name][f.key], help);
            }
        }
    }
    std::string validate_path;
    auto *validate = app.add_subcommand("validate", "check a JSON config file without running it");
    validate->add_option("path", validate_path, "config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion &) {
        out << kVersion << "\n";
        return kExitOk;
    } catch (const CLI::ParseError &e) {
        return fail(err, "schema", e.what(), kExitSchema);
    }

    if (validate->parsed()) {
        const auto rep = validate_config(validate_path);
        out << rep.to_json().dump() << "\n";
        return rep.valid() ? kExitOk : kExitSchema;
    }

    const Command *cmd = nullptr;
    for (const auto &c : commands()) {
        if (subs[c.name]->parsed()) {
            cmd = &c;
        }
    }
    if (!cmd) {
        return fail(err, "schema", "no command given", kExitSchema);
    }
    const auto &cm = common[cmd->name];
    auto *sub = subs[cmd->name];

    std::vector<Diagnostic> diags;
    ParsedConfig file;
    if (!cm.config.empty()) {
        const auto rep = validate_config(cm.config);
        if (!rep.parsed) {
            json e = error_json("parse", rep.parse_message, kExitSchema);
            e["line"] = rep.line;
            e["column"] = rep.column;
            err << e.dump() << "\n";
            return kExitSchema;
        }
        std::ifstream in(cm.config);
        file = read_config_document(json::parse(in), diags);
        if (!file.command.empty() && file.command != cmd->name) {
            diags.push_back({"command", "config is for '" + file.command + "', not '" + cmd->name + "'"});
        }
    }
    json raw = file.parameters;
    for (const auto &f : cmd->fields) {
        if (sub->count(flag_name(f.key)) == 0) {
            continue;
        }
        if (f.type == Type::Bool) {
            raw[f.key] = flags[cmd->name][f.key];
        } else {
            raw[f.key] = values[cmd->name][f.key];
        }
    }
    std::uint64_t seed = file.seed.value_or(1);
    if (sub->count("--seed") > 0) {
        const auto s = parse_u64(cm.seed);
        if (!s) {
            diags.push_back({"seed", "seed must be a non-negative integer"});
        } else {
            seed = *s;
        }
    }
    const json params = resolve(*cmd, raw, diags);
    if (!diags.empty()) {
        return fail(err, "schema", "invalid configuration for " + cmd->name, kExitSchema, diags);
    }
    if (sub->count("--threads") > 0) {
        set_thread_count(cm.threads);
    }
    const std::filesystem::path out_dir = sub->count("--out") > 0 ? cm.out_dir : file.output_dir.value_or(".");

    Context ctx;
    ctx.params = params;
    ctx.seed = seed;
    const json hashed{{"command", cmd->name}, {"parameters", params}, {"seed", seed}};
    ctx.metadata = {{"tool", kToolName},
                    {"version", kVersion},
                    {"command", cmd->name},
                    {"config_hash", hex64(config_hash(hashed))},
                    {"seed", seed}};
    try {
        cmd->run(ctx);
    } catch (const Error &e) {
        return fail(err, e.kind(), e.what(), exit_code_for(e));
    } catch (const json::exception &e) {
        return fail(err, "schema", e.what(), kExitSchema);
    } catch (const std::exception &e) {
        return fail(err, "internal", e.what(), kExitFailure);
    }
    try {
        for (const auto &a : ctx.artifacts) {
            write_atomic(out_dir / a.name, a.content);
            out << "wrote " << (out_dir / a.name).string() << ": " << a.summary << "\n";
        }
    } catch (const std::exception &e) {
        return fail(err, "io", e.what(), kExitFailure);
    }
    out << json{{"status", ctx.status}, {"command", cmd->name}, {"config_hash", ctx.metadata["config_hash"]}}.dump()
        << "\n";
    return kExitOk;
}

}  // namespace cvb::cli
