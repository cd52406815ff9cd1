#include "cvblab/crossover.hpp"

#include <cmath>
#include <limits>

#include "cvblab/active_volume.hpp"
#include "cvblab/cvb.hpp"
#include "cvblab/errors.hpp"
#include "cvblab/parallel.hpp"

namespace cvb {

namespace {

constexpr double kLn10 = 2.302585092994046;

double log10_or_inf(double log10_value) {
    if (log10_value > std::numeric_limits<double>::max_exponent10) {
        return std::numeric_limits<double>::infinity();
    }
    return std::pow(10.0, log10_value);
}

// ln t_em - ln t_hpc at V
double log_gap(double V, const CrossoverConfig &cfg) {
    return (t_em_of_volume_log10(V, cfg) - t_classical_geometry_log10(V, cfg.hpc)) * kLn10;
}

double bisect(double a, double b, double fa, double offset, const CrossoverConfig &cfg) {
    // bisection in ln V on g(V) = log_gap(V) - offset
    double la = std::log(a), lb = std::log(b);
    for (int i = 0; i < 200 && lb - la > 1e-13; ++i) {
        const double lm = 0.5 * (la + lb);
        const double fm = log_gap(std::exp(lm), cfg) - offset;
        if ((fm > 0) == (fa > 0)) {
            la = lm;
            fa = fm;
        } else {
            lb = lm;
        }
    }
    return std::exp(0.5 * (la + lb));
}

struct Crossing {
    double V;
    bool rising;  // gap goes from negative to positive
};

std::vector<Crossing> crossings(const std::vector<double> &grid, double offset, const CrossoverConfig &cfg) {
    std::vector<Crossing> out;
    double prev = log_gap(grid[0], cfg) - offset;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double cur = log_gap(grid[i], cfg) - offset;
        if ((prev > 0) != (cur > 0)) {
            out.push_back({bisect(grid[i - 1], grid[i], prev, offset, cfg), cur > 0});
        }
        prev = cur;
    }
    return out;
}

}  // namespace

void HardwareTiming::validate() const {
    if (!(t_layer >= 0) || !(t_shot_fixed >= 0)) {
        throw ConfigError("timing constants must be non-negative");
    }
}

HardwareTiming HardwareTiming::superconducting() { return {100e-9, 1e-3, "superconducting"}; }
HardwareTiming HardwareTiming::trapped_ion() { return {1e-3, 10e-3, "trapped-ion"}; }

HardwareTiming HardwareTiming::preset(const std::string &name) {
    if (name == "sc" || name == "superconducting") {
        return superconducting();
    }
    if (name == "ion" || name == "trapped-ion") {
        return trapped_ion();
    }
    throw ConfigError("unknown platform '" + name + "' (expected sc or ion)");
}

void HpcModel::validate() const {
    if (!(flops > 0)) {
        throw ConfigError("flops must be positive");
    }
    if (!(v >= 0)) {
        throw ConfigError("spreading velocity must be non-negative");
    }
    c_d(d);
}

double HpcModel::op_factor() const { return (complex_op_factor ? 4.0 : 1.0) * (real_op_factor ? 7.5 : 1.0); }

double t_em_lower(double depth, double shots, const HardwareTiming &timing) {
    timing.validate();
    if (!(depth >= 0) || !(shots >= 0)) {
        throw ConfigError("depth and shots must be non-negative");
    }
    return shots * (timing.t_shot_fixed + timing.t_layer * depth);
}

double t_classical_log10(double V, double n, const HpcModel &model) {
    if (!(model.flops > 0)) {
        throw ConfigError("flops must be positive");
    }
    if (!(V >= 0) || !(n >= 0)) {
        throw ConfigError("volume and qubit count must be non-negative");
    }
    if (V == 0) {
        return -std::numeric_limits<double>::infinity();
    }
    return std::log10(model.op_factor()) + std::log10(V) + n * std::log10(2.0) - std::log10(model.flops);
}

double t_classical(double V, double n, const HpcModel &model) {
    const double l = t_classical_log10(V, n, model);
    return std::isinf(l) && l < 0 ? 0.0 : log10_or_inf(l);
}

double t_classical_geometry_log10(double V, const HpcModel &model) {
    return t_classical_log10(V, qubits_of_volume(V, model.d, model.v), model);
}

double t_classical_geometry(double V, const HpcModel &model) {
    return t_classical(V, qubits_of_volume(V, model.d, model.v), model);
}

double depth_of_volume(double V, int d, double v) {
    if (v == 0) {
        throw GeometryError("spreading velocity 0 gives a singular pyramid");
    }
    return pyramid_depth(qubits_of_volume(V, d, v), v, d);
}

void CrossoverConfig::validate() const {
    if (!(gamma >= 0 && gamma < 1)) {
        throw ConfigError("gamma must lie in [0,1)");
    }
    if (!(lambda > 0)) {
        throw ConfigError("lambda must be positive");
    }
    if (!(epsilon > 0 && epsilon < 1)) {
        throw ConfigError("epsilon must lie in (0,1)");
    }
    if (!(overhead >= 1)) {
        throw ConfigError("overhead R must be >= 1");
    }
    if (!(v_min > 0) || !(v_max > v_min) || grid_points < 2) {
        throw ConfigError("volume grid needs 0 < v_min < v_max and at least 2 points");
    }
    if (!(advantage_margin >= 1)) {
        throw ConfigError("advantage margin must be >= 1");
    }
    timing.validate();
    hpc.validate();
    if (hpc.v == 0) {
        throw GeometryError("spreading velocity 0 gives a singular pyramid");
    }
}

double t_em_of_volume(double V, const CrossoverConfig &cfg) {
    const double shots = std::exp(cfg.lambda * cfg.gamma * V) / (cfg.epsilon * cfg.epsilon);
    return t_em_lower(depth_of_volume(V, cfg.hpc.d, cfg.hpc.v), shots, cfg.timing);
}

double t_em_of_volume_log10(double V, const CrossoverConfig &cfg) {
    const double per_shot = cfg.timing.t_shot_fixed + cfg.timing.t_layer * depth_of_volume(V, cfg.hpc.d, cfg.hpc.v);
    return std::log10(per_shot) + (cfg.lambda * cfg.gamma * V - 2 * std::log(cfg.epsilon)) / kLn10;
}

std::vector<double> log_grid(double lo, double hi, std::size_t points) {
    if (!(lo > 0) || !(hi >= lo) || points < 1) {
        throw ConfigError("log grid needs 0 < lo <= hi and at least one point");
    }
    std::vector<double> g(points);
    const double a = std::log(lo), b = std::log(hi);
    for (std::size_t i = 0; i < points; ++i) {
        g[i] = points == 1 ? lo : std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1));
    }
    g.back() = hi;
    return g;
}

bool CrossoverResult::has_advantage_at(double V) const {
    for (const auto &w : advantage) {
        if (V >= w.lo && V <= w.hi) {
            return true;
        }
    }
    return false;
}

nlohmann::json CrossoverResult::to_json() const {
    nlohmann::json j;
    j["crossover_V"] = crossover_V ? nlohmann::json(*crossover_V) : nlohmann::json(nullptr);
    j["onset_V"] = onset_V ? nlohmann::json(*onset_V) : nlohmann::json(nullptr);
    j["no_crossover"] = !crossover_V.has_value();
    j["em_below_hpc_anywhere"] = em_below_hpc_anywhere;
    j["em_budget_volume"] = em_budget_volume;
    auto w = nlohmann::json::array();
    for (const auto &a : advantage) {
        w.push_back({a.lo, a.hi});
    }
    j["advantage_windows"] = w;
    return j;
}

CrossoverResult crossover_volume(const CrossoverConfig &cfg) {
    cfg.validate();
    CrossoverResult res;
    const auto grid = log_grid(cfg.v_min, cfg.v_max, cfg.grid_points);
    res.grid.resize(grid.size());
    parallel_for(grid.size(), 16, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            res.grid[i] = {grid[i], t_em_of_volume(grid[i], cfg), t_classical_geometry(grid[i], cfg.hpc)};
        }
    });
    res.em_budget_volume = cfg.gamma > 0 ? std::log(cfg.overhead) / (cfg.lambda * cfg.gamma)
                                         : std::numeric_limits<double>::infinity();

    bool below = log_gap(grid[0], cfg) < 0;
    res.em_below_hpc_anywhere = below;
    for (const auto &c : crossings(grid, 0.0, cfg)) {
        if (!c.rising) {
            res.em_below_hpc_anywhere = true;
            if (!res.onset_V) {
                res.onset_V = c.V;
            }
        } else if (res.em_below_hpc_anywhere) {
            res.crossover_V = c.V;
        }
    }

    const double offset = -std::log(cfg.advantage_margin);
    std::optional<double> open;
    if (log_gap(grid[0], cfg) - offset < 0) {
        open = grid[0];
    }
    for (const auto &c : crossings(grid, offset, cfg)) {
        if (!c.rising) {
            open = c.V;
        } else if (open) {
            res.advantage.push_back({*open, c.V});
            open.reset();
        }
    }
    if (open) {
        res.advantage.push_back({*open, grid.back()});
    }
    return res;
}

std::vector<VelocityRow> velocity_background(const std::vector<double> &velocities, const CrossoverConfig &cfg) {
    const auto grid = log_grid(cfg.v_min, cfg.v_max, cfg.grid_points);
    std::vector<VelocityRow> rows;
    rows.reserve(velocities.size() * grid.size());
    for (double v : velocities) {
        HpcModel m = cfg.hpc;
        m.v = v;
        m.validate();
        for (double V : grid) {
            rows.push_back({v, V, t_classical_geometry(V, m)});
        }
    }
    return rows;
}

}  // namespace cvb
