#pragma once

#include <string>
#include <utility>

#include "garchpd/density.hpp"

namespace garchpd {

struct RiskOptions {
    double newton_tol = 1e-7;  // relative step
    double pdf_floor = 1e-14;  // below this, bisect instead of dividing by f
    int max_iter = 50;
    double lower_cut = -6;     // replaces -infinity in the ES integrals
    double quad_tol = 1e-9;    // absolute
};

struct RiskResult {
    double p = 0;
    int h = 0;
    double var = 0;
    double es = 0;
    int iterations = 0;
    int bisections = 0;
    double gaussian_var = 0;
    double gaussian_es = 0;
    double ratio_var = 0;  // gaussian / exact
    double ratio_es = 0;
    double newton_residual = 0;  // |F(-var) - p|
    double quad_error = 0;
};

// Q with F(-Q) = p for the standardized law; Newton from the Gaussian
// quantile, kept inside a bracket. newton_tol bounds the relative update.
RiskResult var_newton(const StandardizedTable& t, double p, const RiskOptions& opt = {});

// ES = Q + (1/p) int_{lower_cut}^{-Q} F(u) du
double es_exact(const StandardizedTable& t, double p, double var, const RiskOptions& opt = {},
                double* error = nullptr);

// ES = -(1/p) int_{lower_cut}^{-Q} u f(u) du, the defining form
double es_tail_mean(const StandardizedTable& t, double p, double var, const RiskOptions& opt = {},
                    double* error = nullptr);

// (-z_p, phi(z_p)/p)
std::pair<double, double> gaussian_reference(double p);

// VaR, ES and the Gaussian comparison columns.
RiskResult risk_row(const StandardizedTable& t, double p, const RiskOptions& opt = {});

std::string risk_csv_header();
std::string risk_csv_row(const RiskResult& r);

}  // namespace garchpd
