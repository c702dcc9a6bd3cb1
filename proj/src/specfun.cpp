#include "garchpd/specfun.hpp"

#include <bit>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/erf.hpp>

#include "garchpd/errors.hpp"
#include "garchpd/quadrature.hpp"

namespace garchpd {

namespace {

// The integrand in s = t^a is exp(ell(t)) with
//   ell(t) = -z t + (c - a - 1) log(1 + t).
// Returns the s at which ell has fallen `drop` below its maximum.
long double truncation_point(long double a, long double c, long double z, long double drop) {
    long double e = c - a - 1;
    auto ell = [&](long double t) { return -z * t + e * std::log1p(t); };
    long double tpk = std::max(0.0L, e / z - 1);
    long double top = ell(tpk);
    long double lo = tpk, hi = std::max(1.0L, 2 * tpk);
    while (ell(hi) > top - drop) {
        lo = hi;
        hi *= 2;
    }
    for (int i = 0; i < 80; ++i) {
        long double mid = 0.5L * (lo + hi);
        (ell(mid) > top - drop ? lo : hi) = mid;
    }
    return std::pow(hi, a);
}

int grading_levels(long double a, long double c, long double z, long double S) {
    // Width of the peak near s = 0 is about (z + |c-a-1| + 1)^-a.
    long double width = std::pow(1 + z + std::fabs(c - a - 1), -a);
    int lv = 2;
    while (S / std::ldexp(1.0L, lv) > 0.1L * width && lv < 200) ++lv;
    if (a > 1) lv += 40;  // s^(1/a) is not smooth at the origin
    return lv;
}

}  // namespace

double tricomi_psi(double a, double c, double z, double tol) {
    if (!(a > 0) || !(z > 0) || !std::isfinite(c))
        throw DomainError("tricomi_psi: need a > 0, z > 0, finite c");
    if (!(tol > 0) || tol > 1e-6) throw DomainError("tricomi_psi: tol must lie in (0, 1e-6]");
    using R = long double;
    const R ra = a, rc = c, rz = z, e = rc - ra - 1;
    R S = truncation_point(ra, rc, rz, -std::log(static_cast<R>(tol)) + 25);
    int lv = grading_levels(ra, rc, rz, S);
    auto eval = [&](const R& s, std::vector<R>& out) {
        R t = std::pow(s, 1 / ra);
        out[0] = std::exp(-rz * t + e * std::log1p(t));
    };
    auto I = quad::graded_integrate<R>(eval, 1, S, lv, static_cast<R>(tol) / 8);
    return static_cast<double>(I[0] / std::tgamma(ra + 1));
}

template <class R>
static R finite_psi(int m, int k, const R& xi) {
    using std::sqrt;
    const int n = m - k;
    R term = 1 / sqrt(xi);  // i = 0: C(n,0) Gamma(1/2)/sqrt(pi) xi^-1/2
    R sum = term;
    for (int i = 1; i <= n; ++i) {
        // C(n,i)/C(n,i-1) = (n-i+1)/i ; Gamma(i+1/2)/Gamma(i-1/2) = i - 1/2
        term *= R(n - i + 1) / R(i) * (R(i) - R(0.5)) / xi;
        sum += term;
    }
    return sum;
}

double tricomi_psi_finite(int m, int k, double xi) {
    if (m < 0 || k < 0 || k > m || !(xi > 0))
        throw DomainError("tricomi_psi_finite: need 0 <= k <= m and xi > 0");
    return finite_psi<double>(m, k, xi);
}

Ext tricomi_psi_finite_ext(int m, int k, const Ext& xi) {
    if (m < 0 || k < 0 || k > m || !(xi > 0))
        throw DomainError("tricomi_psi_finite: need 0 <= k <= m and xi > 0");
    return finite_psi<Ext>(m, k, xi);
}

double gen_binom(double r, int k) {
    double b = 1;
    for (int i = 0; i < k; ++i) b *= (r - i) / (i + 1);
    return b;
}

double gaussian_pdf(double u) {
    return std::exp(-0.5 * u * u) * 0.398942280401432677939946059934;
}

double gaussian_cdf(double u) { return 0.5 * std::erfc(-u * 0.707106781186547524400844362105); }

double gaussian_quantile(double p) {
    if (!(p > 0 && p < 1)) throw DomainError("gaussian_quantile: p must lie in (0,1)");
    return -1.41421356237309504880168872421 * boost::math::erfc_inv(2 * p);
}

std::vector<Ext> tricomi_half_row(double z, std::size_t n_max, double tol) {
    if (!(tol > 0) || tol > 1e-6) throw DomainError("tricomi_half_row: tol must lie in (0, 1e-6]");
    return detail::psi_half_row<Ext>(z, n_max, tol);
}

double PsiCache::value(double c, double z) {
    const auto key = std::make_pair(std::bit_cast<std::uint64_t>(c), std::bit_cast<std::uint64_t>(z));
    {
        std::lock_guard<std::mutex> lk(mu_);
        auto it = values_.find(key);
        if (it != values_.end()) return it->second;
    }
    double v = tricomi_psi(0.5, c, z, std::max(tol_, 1e-15));
    std::lock_guard<std::mutex> lk(mu_);
    values_.emplace(key, v);
    return v;
}

}  // namespace garchpd
