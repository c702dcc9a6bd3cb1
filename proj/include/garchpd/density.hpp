#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "garchpd/extended.hpp"
#include "garchpd/model.hpp"

namespace garchpd {

class PsiCache;

struct SeriesConfig {
    int j_max = 100;         // outer truncation; may be doubled up to j_cap
    int j_cap = 800;
    int inner_k_max = 400;   // per-level cap on k_t
    double term_tol = 1e-34; // inner adaptive cut, relative to the level's largest term
    double outer_tol = 1e-15;// tail term allowed at the trust edge, relative to |f|
    double psi_tol = 1e-30;
    double eval_tol = 1e-9;  // absolute error target on the standardized pdf in range
    int max_h = kDefaultMaxHorizon;
    double trusted_range = 6;  // in standard deviations of x_h
    bool auto_extend = true;
    int threads = 0;           // 0: hardware concurrency
    int min_tier = 0;          // force at least this precision tier (0 quad, 1..3 MPFR 60/110/200 digits)

    void validate() const;
};

// Series coefficients for one (params, h). Stored scaled:
//   ct_j = c_j * B^j,  B = (omega + beta sigma1^2) beta^(h-2),
// so that f_x(u) = (2 pi)^(-h/2) sum_j (-rho)^j / j! ct_j with rho = u^2/(2B).
// The unscaled c_j overflow a double for small omega.
struct CoefficientTable {
    GarchParams params;
    int h = 1;
    SeriesConfig config;
    ValidityReport validity;
    double B = 1;
    double scale = 1;  // sqrt(E x_h^2)
    std::vector<SignVector> signs;
    std::vector<std::vector<DoubleDouble>> per_sign;
    std::vector<DoubleDouble> averaged;
    std::vector<double> error;   // absolute error bound on averaged[j]
    std::vector<int> capped;     // 1 where an inner sum hit inner_k_max
    double edge_error = 0;       // error bound of the standardized pdf at the trust edge
    int engine_digits = 33;      // working precision of the coefficient engine

    int j_max() const { return static_cast<int>(averaged.size()) - 1; }
    double scaled_coeff(int j) const { return averaged.at(j).hi; }
    double log_coeff(int j) const;  // log c_j
    double coeff(int j) const;      // c_j; may be inf/0 outside double range

    // quad copy of `averaged`, filled on build/load
    std::vector<Ext> ext;
};

double coeff_single(int j, const SignVector& signs, const GarchParams& params, int h,
                    const SeriesConfig& config);

std::shared_ptr<const CoefficientTable> build_table(const GarchParams& params, int h,
                                                    const SeriesConfig& config = {},
                                                    PsiCache* cache = nullptr);

struct Evaluation {
    double value = 0;
    double error = 0;          // bound from coefficient error, rounding and truncation
    bool outside_trust = false;
    bool clamped = false;      // raw series left [0, inf) or [0, 1]
    double raw = 0;
};

Evaluation eval_pdf_x(const CoefficientTable& t, double u);
Evaluation eval_cdf_x(const CoefficientTable& t, double u);
Evaluation eval_pdf_z(const CoefficientTable& t, double w);
Evaluation eval_cdf_z(const CoefficientTable& t, double w);

double pdf_x(const CoefficientTable& t, double u);
double cdf_x(const CoefficientTable& t, double u);
double pdf_z(const CoefficientTable& t, double w);
double cdf_z(const CoefficientTable& t, double w);

// E x_h^(2m), exact finite sums.
double moment(const GarchParams& params, int h, int m);

// Law of x_h / sqrt(E x_h^2).
struct StandardizedTable {
    std::shared_ptr<const CoefficientTable> table;
    double scale = 1;

    double pdf(double u) const { return scale * pdf_x(*table, scale * u); }
    double cdf(double u) const { return cdf_x(*table, scale * u); }
    Evaluation eval_pdf(double u) const;
    Evaluation eval_cdf(double u) const;
    int h() const { return table->h; }
};

StandardizedTable standardize(std::shared_ptr<const CoefficientTable> table);

nlohmann::json table_to_json(const CoefficientTable& t);
std::shared_ptr<const CoefficientTable> table_from_json(const nlohmann::json& j);

}  // namespace garchpd
