#pragma once

// Rows Psi(1/2, 1-n; z), n = 0..n_max, in any floating type R.
//
// DLMF 13.3.8 in the second parameter gives
//   (n + 1/2) U_{n+1} = (n - z) U_n + z U_{n-1},   U_n = Psi(1/2, 1-n; z).
// The companion solution behaves like z^n/n!, so the forward direction is
// stable once n > z; before that it can amplify seed errors by about e^z.
// Seeds come from quadrature tightened by e^-z, and the last entry is
// checked against an independent quadrature. Failing that, the row falls
// back to quadrature for every n at once.

#include <cmath>
#include <limits>
#include <vector>

#include "garchpd/errors.hpp"
#include "garchpd/quadrature.hpp"

#include <boost/math/constants/constants.hpp>

namespace garchpd::detail {

template <class R>
struct PsiQuadPlan {
    R S;
    int levels;
};

// s-space cut and grading for the a = 1/2 integrand e^{-z s^2}(1+s^2)^{-n-1/2}
inline PsiQuadPlan<long double> psi_plan(double z, double n_hi, double log_tol) {
    long double drop = -log_tol + 25;
    long double lo = 0, hi = 1;
    auto ell = [&](long double s) { return -z * s * s - 0.5L * std::log1p(s * s); };
    while (ell(hi) > -drop) {
        lo = hi;
        hi *= 2;
    }
    for (int i = 0; i < 80; ++i) {
        long double mid = 0.5L * (lo + hi);
        (ell(mid) > -drop ? lo : hi) = mid;
    }
    long double width = 1 / std::sqrt(1 + z + n_hi);
    int lv = 2;
    while (hi / std::ldexp(1.0L, lv) > 0.1L * width && lv < 200) ++lv;
    return {hi, lv};
}

template <class R>
std::vector<R> psi_quadrature(double z, const std::vector<std::size_t>& ns, R tol) {
    using std::log;
    // panel sums carry rounding noise of a few hundred ulps
    const R floor_tol = 2048 * std::numeric_limits<R>::epsilon();
    if (tol < floor_tol) tol = floor_tol;
    using std::sqrt;
    using std::exp;
    std::size_t nhi = 0;
    for (auto n : ns) nhi = std::max(nhi, n);
    const double log_tol = static_cast<double>(log(tol));
    auto plan = psi_plan(z, static_cast<double>(nhi), log_tol);
    const R rz(z);
    const int digits = std::numeric_limits<R>::digits10;
    quad::GradedOptions opt;
    opt.order = std::max(20, digits);
    opt.max_doublings = 10;
    const bool dense = ns.size() == nhi + 1;  // full row 0..nhi
    auto eval = [&](const R& s, std::vector<R>& out) {
        R q = 1 + s * s;
        R base = exp(-rz * s * s) / sqrt(q);
        R r = 1 / q;
        if (dense) {
            for (std::size_t i = 0; i < out.size(); ++i) {
                out[i] = base;
                base *= r;
            }
        } else {
            for (std::size_t i = 0; i < ns.size(); ++i) out[i] = base * pow(r, static_cast<long>(ns[i]));
        }
    };
    auto I = quad::graded_integrate<R>(eval, ns.size(), R(plan.S), plan.levels, tol / 8, opt);
    const R two_over_sqrt_pi = 2 / sqrt(boost::math::constants::pi<R>());
    for (auto& v : I) v *= two_over_sqrt_pi;
    return I;
}

template <class R>
std::vector<R> psi_half_row(double z, std::size_t n_max, double tol_d) {
    if (!(z > 0)) throw DomainError("Psi row: need z > 0");
    const R eps = std::numeric_limits<R>::epsilon();
    R tol(tol_d);
    if (tol < 4096 * eps) tol = 4096 * eps;
    using std::exp;
    const R seed_tol = tol * exp(-R(z));
    if (n_max >= 2 && seed_tol >= 2048 * eps) {
        auto seeds = psi_quadrature<R>(z, {0, 1, n_max}, seed_tol);
        std::vector<R> row(n_max + 1);
        row[0] = seeds[0];
        row[1] = seeds[1];
        const R rz(z);
        for (std::size_t n = 1; n < n_max; ++n)
            row[n + 1] = ((R(n) - rz) * row[n] + rz * row[n - 1]) / (R(n) + R(0.5));
        using std::abs;
        if (abs(row[n_max] - seeds[2]) <= 4 * tol * seeds[2]) return row;
    }
    std::vector<std::size_t> all(n_max + 1);
    for (std::size_t i = 0; i <= n_max; ++i) all[i] = i;
    return psi_quadrature<R>(z, all, tol);
}

}  // namespace garchpd::detail
