#pragma once

#include "garchpd/model.hpp"

// Reference values computed straight from the integral definitions, sharing
// no code with the series engine.
namespace oracle {

// c_j for h = 2 from the one-dimensional integral
//   sqrt(beta/alpha_s) int_0^inf exp(-beta v / (2 alpha_s)) sigma_2^(2r) v^(-1/2) dv,  r = -j - 1/2,
// averaged over the sign of x_1.
long double coeff_h2(const garchpd::GarchParams& p, int j);

// c_{j,s} for h = 3 from the two-dimensional integral gamma_3^(1/2) A_3(-j - 1/2);
// signs[t] selects alpha_{t+1}.
long double coeff_h3(const garchpd::GarchParams& p, int j, const garchpd::SignVector& signs);

// f_{x_h}(u) in raw units for h = 2 or 3 by nested adaptive quadrature of the
// conditional density over v = (alpha_t / beta) eps_t^2, averaged over signs.
double pdf(const garchpd::GarchParams& p, int h, double u);

}  // namespace oracle
