#include "cvblab/cvb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cvblab/errors.hpp"

namespace cvb {

namespace {

void require_unit_interval(double x, const char *name) {
    if (!(x > 0 && x < 1)) {
        throw ConfigError(std::string(name) + " must lie in (0,1)");
    }
}

void require_overhead(double r) {
    if (!(r >= 1) || std::isnan(r)) {
        throw ConfigError("overhead R must be >= 1");
    }
}

}  // namespace

void BudgetParams::validate() const {
    require_unit_interval(gamma, "gamma");
    require_unit_interval(epsilon, "epsilon");
    require_overhead(overhead);
    if (!(lambda > 0)) {
        throw ConfigError("lambda must be positive");
    }
}

double v_bare(double gamma, double epsilon, double overhead) {
    require_unit_interval(gamma, "gamma");
    require_unit_interval(epsilon, "epsilon");
    if (!(overhead > 1)) {
        return 0;
    }
    return -std::log1p(-epsilon * (1 - 1 / std::sqrt(overhead))) / gamma;
}

double v_bare_approx(double gamma, double epsilon, double overhead) {
    require_unit_interval(gamma, "gamma");
    require_unit_interval(epsilon, "epsilon");
    if (!(overhead > 1)) {
        return 0;
    }
    return epsilon / gamma * (1 - 1 / std::sqrt(overhead));
}

double v_em(double gamma, double lambda, double overhead) {
    require_unit_interval(gamma, "gamma");
    require_overhead(overhead);
    if (!(lambda > 0)) {
        throw ConfigError("lambda must be positive");
    }
    return std::log(overhead) / (lambda * gamma);
}

double overhead_factor(double overhead) {
    require_overhead(overhead);
    if (overhead == 1) {
        return 2;
    }
    // ln R / (1 - R^-1/2) with both parts computed accurately near R = 1
    const double l = std::log(overhead);
    return l / -std::expm1(-0.5 * l);
}

nlohmann::json CvbValue::to_json() const {
    nlohmann::json j;
    j["infinite"] = infinite();
    j["exact"] = exact ? nlohmann::json(*exact) : nlohmann::json(nullptr);
    j["approx"] = approx;
    return j;
}

CvbValue cvb(double epsilon, double overhead, double lambda) {
    require_unit_interval(epsilon, "epsilon");
    require_overhead(overhead);
    if (!(lambda > 0)) {
        throw ConfigError("lambda must be positive");
    }
    CvbValue v;
    v.approx = overhead_factor(overhead) / (lambda * epsilon);
    if (overhead > 1) {
        // gamma cancels: ln R / lambda over -ln(1 - eps + eps/sqrt R)
        v.exact = std::log(overhead) / lambda / -std::log1p(-epsilon * (1 - 1 / std::sqrt(overhead)));
    }
    return v;
}

double v_ec(double gamma_prime, double epsilon) {
    require_unit_interval(gamma_prime, "gamma'");
    require_unit_interval(epsilon, "epsilon");
    return epsilon / gamma_prime;
}

double v_lem(double gamma_prime, double overhead, double lambda) { return v_em(gamma_prime, lambda, overhead); }

VolumeBand overhead_factor_range(double r_lo, double r_hi) {
    if (!(r_lo > 1) || !(r_hi >= r_lo) || std::isinf(r_hi)) {
        throw ConfigError("overhead range needs 1 < R_lo <= R_hi < inf");
    }
    VolumeBand b{overhead_factor(r_lo), overhead_factor(r_lo)};
    const int steps = r_hi == r_lo ? 0 : 512;
    const double a = std::log(r_lo), z = std::log(r_hi);
    for (int i = 1; i <= steps; ++i) {
        const double r = i == steps ? r_hi : std::exp(a + (z - a) * i / steps);
        const double f = overhead_factor(r);
        b.lo = std::min(b.lo, f);
        b.hi = std::max(b.hi, f);
    }
    return b;
}

VolumeBand v_lem_band(double gamma_prime, double lambda, double r_lo, double r_hi) {
    require_unit_interval(gamma_prime, "gamma'");
    if (!(lambda > 0)) {
        throw ConfigError("lambda must be positive");
    }
    const auto f = overhead_factor_range(r_lo, r_hi);
    return {f.lo / (lambda * gamma_prime), f.hi / (lambda * gamma_prime)};
}

double LogValue::value() const {
    if (log10 > std::numeric_limits<double>::max_exponent10) {
        return std::numeric_limits<double>::infinity();
    }
    return std::pow(10.0, log10);
}

nlohmann::json LogValue::to_json() const {
    const double v = value();
    return {{"log10", log10}, {"value", std::isinf(v) ? nlohmann::json(nullptr) : nlohmann::json(v)}};
}

LogValue corollary_classical_bound(double t_em, double gamma_bar, double constant) {
    if (!(gamma_bar > 0 && gamma_bar <= 1)) {
        throw ConfigError("gamma_bar must lie in (0,1]");
    }
    if (!(t_em > 0) || !(constant > 0)) {
        throw ConfigError("T_em and the constant must be positive");
    }
    return {std::log10(constant) + std::log10(t_em) / gamma_bar};
}

std::string CodeSpec::label() const {
    return "[[" + std::to_string(n) + "," + std::to_string(k) + "," + (d_is_upper_bound ? "<=" : "") +
           std::to_string(d) + "]]";
}

void CodeSpec::validate() const {
    if (k == 0 || k > n || n > n_tot) {
        throw ConfigError("code " + label() + " needs 0 < k <= n <= n_tot");
    }
    require_unit_interval(gamma_prime, "gamma'");
}

std::vector<CodeSpec> builtin_codes() {
    return {
        {"surface", 81, 1, 9, false, 161, 9e-6},
        {"surface", 121, 1, 11, false, 241, 9e-7},
        {"bb-qldpc", 72, 12, 6, false, 144, 6e-6},
        {"bb-qldpc", 144, 12, 12, false, 288, 2e-8},
        {"lp-qldpc", 544, 80, 12, true, 1367, 1e-6},
        {"lp-qldpc", 1428, 184, 24, true, 2670, 1e-7},
    };
}

std::vector<CodeRow> code_table(const std::vector<CodeSpec> &codes, double epsilon, double lambda) {
    std::vector<CodeRow> rows;
    rows.reserve(codes.size());
    for (const auto &c : codes) {
        c.validate();
        CodeRow r;
        r.code = c;
        r.v_ec_per_epsilon = 1 / c.gamma_prime;
        r.v_ec = v_ec(c.gamma_prime, epsilon);
        r.v_lem = v_lem_band(c.gamma_prime, lambda);
        rows.push_back(r);
    }
    return rows;
}

std::vector<CvbCurveRow> cvb_curve(const std::vector<double> &epsilons, double overhead, double lambda,
                                   double gamma) {
    if (!(gamma > 0)) {
        throw ConfigError("gamma must be positive");
    }
    std::vector<CvbCurveRow> rows;
    rows.reserve(epsilons.size());
    for (double e : epsilons) {
        require_unit_interval(e, "epsilon");
        CvbCurveRow r;
        r.epsilon = e;
        // gamma = 1 gives volumes in units of 1/gamma; the formulas are linear in 1/gamma
        r.v_bare = overhead > 1 ? -std::log1p(-e * (1 - 1 / std::sqrt(overhead))) / gamma : 0;
        r.v_em = std::log(overhead) / (lambda * gamma);
        r.cvb = cvb(e, overhead, lambda);
        rows.push_back(r);
    }
    return rows;
}

}  // namespace cvb
