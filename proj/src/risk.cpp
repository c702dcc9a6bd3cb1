#include "garchpd/risk.hpp"

#include <cmath>
#include <cstdio>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "garchpd/errors.hpp"
#include "garchpd/specfun.hpp"

namespace garchpd {

namespace {

void check_p(double p) {
    if (!(p > 0 && p <= 0.5)) throw DomainError("tail probability must lie in (0, 1/2]");
}

template <class F>
double integrate(F&& f, double a, double b, const RiskOptions& opt, double* error) {
    using boost::math::quadrature::gauss_kronrod;
    double err = 0;
    // Boost's stopping tolerance is relative; the integrals here are O(1e-2),
    // so 1e-12 relative sits well inside an absolute quad_tol. The reported
    // estimate is absolute but measured on the [-1, 1] image of each panel,
    // hence the half-width factor.
    double v = gauss_kronrod<double, 31>::integrate(f, a, b, 20, 1e-12, &err);
    double abs_err = err * std::max(1.0, 0.5 * (b - a));
    if (error) *error = abs_err;
    if (!(abs_err <= opt.quad_tol)) throw ConvergenceError("ES quadrature above tolerance", v);
    return v;
}

}  // namespace

std::pair<double, double> gaussian_reference(double p) {
    check_p(p);
    double z = gaussian_quantile(p);
    return {-z, gaussian_pdf(z) / p};
}

RiskResult var_newton(const StandardizedTable& t, double p, const RiskOptions& opt) {
    check_p(p);
    RiskResult r;
    r.p = p;
    r.h = t.h();
    double lo = opt.lower_cut, hi = 0;
    if (t.cdf(lo) - p >= 0) throw DomainError("quantile lies below the lower cut");
    // Stop on a relative update |u_{n+1} - u_n| <= tol |u_{n+1}|; iterations
    // counts updates, including the one that meets the tolerance.
    double u = gaussian_quantile(p);
    double H = t.cdf(u) - p;
    for (int it = 0; H != 0; ++it) {
        if (it == opt.max_iter) throw ConvergenceError("Newton iteration for the quantile did not converge", -u);
        (H < 0 ? lo : hi) = u;
        double G = t.pdf(u);
        double next = G >= opt.pdf_floor ? u - H / G : lo - 1;
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
            ++r.bisections;
        }
        bool done = std::fabs(next - u) <= opt.newton_tol * std::fabs(next);
        u = next;
        H = t.cdf(u) - p;
        r.iterations = it + 1;
        if (done) break;
    }
    r.var = u == 0 ? 0.0 : -u;
    r.newton_residual = std::fabs(H);
    return r;
}

double es_exact(const StandardizedTable& t, double p, double var, const RiskOptions& opt, double* error) {
    check_p(p);
    if (-var <= opt.lower_cut) throw DomainError("-VaR must exceed the lower cut");
    double I = integrate([&](double u) { return t.cdf(u); }, opt.lower_cut, -var, opt, error);
    if (error) *error /= p;
    return var + I / p;
}

double es_tail_mean(const StandardizedTable& t, double p, double var, const RiskOptions& opt, double* error) {
    check_p(p);
    if (-var <= opt.lower_cut) throw DomainError("-VaR must exceed the lower cut");
    double I = integrate([&](double u) { return u * t.pdf(u); }, opt.lower_cut, -var, opt, error);
    if (error) *error /= p;
    return -I / p;
}

RiskResult risk_row(const StandardizedTable& t, double p, const RiskOptions& opt) {
    RiskResult r = var_newton(t, p, opt);
    r.es = es_exact(t, p, r.var, opt, &r.quad_error);
    auto [gv, ge] = gaussian_reference(p);
    r.gaussian_var = gv;
    r.gaussian_es = ge;
    r.ratio_var = r.var != 0 ? gv / r.var : 1.0;
    r.ratio_es = ge / r.es;
    return r;
}

std::string risk_csv_header() {
    return "p,var,iterations,gaussian_var,ratio_var,es,gaussian_es,ratio_es";
}

std::string risk_csv_row(const RiskResult& r) {
    char buf[512];
    std::snprintf(buf, sizeof buf, "%.10g,%.17g,%d,%.17g,%.17g,%.17g,%.17g,%.17g", r.p, r.var, r.iterations,
                  r.gaussian_var, r.ratio_var, r.es, r.gaussian_es, r.ratio_es);
    return buf;
}

}  // namespace garchpd
