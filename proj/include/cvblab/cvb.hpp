#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace cvb {

struct BudgetParams {
    double gamma = 1e-3;
    double epsilon = 0.01;
    double overhead = 10;  // R
    double lambda = 2;

    void validate() const;
};

// -(1/gamma) ln(1 - eps + eps/sqrt(R)); 0 when R <= 1.
double v_bare(double gamma, double epsilon, double overhead);
// (eps/gamma)(1 - 1/sqrt(R))
double v_bare_approx(double gamma, double epsilon, double overhead);
// ln(R)/(lambda gamma)
double v_em(double gamma, double lambda, double overhead);

// f(R) = ln(R)/(1 - 1/sqrt(R)); tends to 2 as R -> 1.
double overhead_factor(double overhead);

struct CvbValue {
    std::optional<double> exact;  // empty when v_bare = 0 (infinite boost)
    double approx = 0;            // (1/eps) f(R)/lambda
    bool infinite() const { return !exact.has_value(); }
    nlohmann::json to_json() const;
};

CvbValue cvb(double epsilon, double overhead, double lambda);

double v_ec(double gamma_prime, double epsilon);
double v_lem(double gamma_prime, double overhead, double lambda);

struct VolumeBand {
    double lo = 0;
    double hi = 0;
};

// f(R)/(lambda gamma') evaluated over R in [r_lo, r_hi].
VolumeBand v_lem_band(double gamma_prime, double lambda = 2, double r_lo = 2, double r_hi = 1e9);

// min/max of f over [r_lo, r_hi].
VolumeBand overhead_factor_range(double r_lo, double r_hi);

// Value too large for a double, carried as log10.
struct LogValue {
    double log10 = 0;
    double value() const;  // inf on overflow
    nlohmann::json to_json() const;
};

// constant * T_em^(1/gamma_bar), an asymptotic-style upper bound.
LogValue corollary_classical_bound(double t_em, double gamma_bar, double constant = 1);

struct CodeSpec {
    std::string family;
    std::size_t n = 0;
    std::size_t k = 0;
    std::size_t d = 0;
    bool d_is_upper_bound = false;
    std::size_t n_tot = 0;
    double gamma_prime = 0;

    double net_rate() const { return static_cast<double>(k) / static_cast<double>(n_tot); }
    std::string label() const;
    void validate() const;
};

// Six built-in codes: two surface, two bivariate-bicycle, two lifted-product.
std::vector<CodeSpec> builtin_codes();

struct CodeRow {
    CodeSpec code;
    double v_ec_per_epsilon = 0;
    double v_ec = 0;
    VolumeBand v_lem;
};

std::vector<CodeRow> code_table(const std::vector<CodeSpec> &codes, double epsilon, double lambda = 2);

struct CvbCurveRow {
    double epsilon = 0;
    double v_bare = 0;
    double v_em = 0;
    CvbValue cvb;
};

// Fig. 1 style dataset; volumes in units of 1/gamma.
std::vector<CvbCurveRow> cvb_curve(const std::vector<double> &epsilons, double overhead, double lambda,
                                   double gamma = 1);

}  // namespace cvb
