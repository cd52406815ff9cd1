#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace cvb {

struct HardwareTiming {
    double t_layer = 100e-9;     // seconds per circuit layer
    double t_shot_fixed = 1e-3;  // per-shot overhead in seconds
    std::string label = "custom";

    void validate() const;
    static HardwareTiming superconducting();
    static HardwareTiming trapped_ion();
    // "sc"/"superconducting" or "ion"/"trapped-ion"
    static HardwareTiming preset(const std::string &name);
};

struct HpcModel {
    double flops = 1e18;
    double v = 0.1;  // spreading velocity
    int d = 2;       // lattice dimension
    bool complex_op_factor = false;  // x4: four complex ops per amplitude and gate
    bool real_op_factor = false;     // x7.5: complex-to-real op conversion

    void validate() const;
    double op_factor() const;
};

// M (t_shot_fixed + t_layer D)
double t_em_lower(double depth, double shots, const HardwareTiming &timing);
// factor V 2^n / flops
double t_classical(double V, double n, const HpcModel &model);
// log10 of t_classical; -inf for V = 0
double t_classical_log10(double V, double n, const HpcModel &model);
// t_classical at n = qubits_of_volume(V, d, v)
double t_classical_geometry(double V, const HpcModel &model);
double t_classical_geometry_log10(double V, const HpcModel &model);

// Depth of the light-cone pyramid holding volume V: (d/2v) n(V)^(1/d).
double depth_of_volume(double V, int d, double v);

struct CrossoverConfig {
    double gamma = 1e-3;
    double lambda = 2;
    double epsilon = 0.05;
    double overhead = 10;  // R, used for the EM budget volume in the report
    HardwareTiming timing = HardwareTiming::superconducting();
    HpcModel hpc;
    double v_min = 1;
    double v_max = 1e9;
    std::size_t grid_points = 361;
    double advantage_margin = 10;  // EM must be this factor below HPC

    void validate() const;
};

struct CrossoverRow {
    double V = 0;
    double t_em_seconds = 0;
    double t_hpc_seconds = 0;
};

struct Window {
    double lo = 0;
    double hi = 0;
};

struct CrossoverResult {
    std::vector<CrossoverRow> grid;
    // Upper crossing: largest V at which EM time climbs back above HPC time.
    // Empty when EM stays below HPC up to v_max or is never below it.
    std::optional<double> crossover_V;
    // Lower crossing, where HPC time first exceeds EM time.
    std::optional<double> onset_V;
    // Volumes where t_em < t_hpc / advantage_margin; empty when there are none.
    std::vector<Window> advantage;
    double em_budget_volume = 0;  // v_em(gamma, lambda, R)
    bool em_below_hpc_anywhere = false;

    bool has_advantage_at(double V) const;
    nlohmann::json to_json() const;
};

// Time of the EM lower bound at volume V for a brickwork light-cone pyramid.
double t_em_of_volume(double V, const CrossoverConfig &cfg);
double t_em_of_volume_log10(double V, const CrossoverConfig &cfg);

CrossoverResult crossover_volume(const CrossoverConfig &cfg);

struct VelocityRow {
    double v = 0;
    double V = 0;
    double t_hpc_seconds = 0;
};

// HPC curves for several spreading velocities on the same volume grid.
std::vector<VelocityRow> velocity_background(const std::vector<double> &velocities, const CrossoverConfig &cfg);

std::vector<double> log_grid(double lo, double hi, std::size_t points);

}  // namespace cvb
