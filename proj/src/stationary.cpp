#include "garchpd/stationary.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "garchpd/errors.hpp"
#include "garchpd/specfun.hpp"

namespace garchpd {

namespace {

void check_coeffs(double alpha, double beta) {
    if (!(alpha > 0 && beta > 0 && std::isfinite(alpha) && std::isfinite(beta)))
        throw DomainError("alpha and beta must be positive");
}

// 2 int_0^inf g(e) phi(e) de
template <class G>
double gauss_expect(G&& g, const KestenOptions& opt) {
    using boost::math::quadrature::gauss_kronrod;
    auto f = [&](double e) { return 2 * g(e) * gaussian_pdf(e); };
    double err = 0, v;
    if (opt.gk_points == 61)
        v = gauss_kronrod<double, 61>::integrate(f, 0.0, std::numeric_limits<double>::infinity(), 25, opt.rel_tol,
                                                 &err);
    else if (opt.gk_points == 31)
        v = gauss_kronrod<double, 31>::integrate(f, 0.0, std::numeric_limits<double>::infinity(), 25, opt.rel_tol,
                                                 &err);
    else
        throw DomainError("gk_points must be 31 or 61");
    if (!std::isfinite(v) || err > 1e-9 * std::max(1.0, std::fabs(v)))
        throw ConvergenceError("Kesten expectation quadrature did not stabilize", v);
    return v;
}

}  // namespace

double kesten_expectation(double alpha, double beta, double kappa, const KestenOptions& opt) {
    check_coeffs(alpha, beta);
    if (!(kappa > 0)) throw DomainError("kappa must be positive");
    return gauss_expect([&](double e) { return std::pow(alpha * e * e + beta, kappa); }, opt);
}

double kesten_expectation_sum(double alpha, double beta, int kappa) {
    check_coeffs(alpha, beta);
    if (kappa < 0) throw DomainError("kappa must be nonnegative");
    // term_n = C(k, n) alpha^n beta^(k-n) (2n-1)!!, built by ratio
    double term = std::pow(beta, kappa), sum = term;
    for (int n = 1; n <= kappa; ++n) {
        term *= double(kappa - n + 1) / n * (alpha / beta) * (2 * n - 1);
        sum += term;
    }
    return sum;
}

double kesten_log_expectation(double alpha, double beta, const KestenOptions& opt) {
    check_coeffs(alpha, beta);
    return gauss_expect([&](double e) { return std::log(alpha * e * e + beta); }, opt);
}

std::string to_string(TailMethod m) {
    return m == TailMethod::moment_sum ? "moment-sum" : "quadrature-root";
}

TailIndexResult tail_index(double alpha, double beta, const TailIndexOptions& opt) {
    check_coeffs(alpha, beta);
    if (!(opt.tol > 0)) throw DomainError("tolerance must be positive");
    TailIndexResult res;
    res.alpha = alpha;
    res.beta = beta;
    if (!(kesten_log_expectation(alpha, beta, opt.kesten) < 0))
        throw ConvergenceError("E ln(alpha eps^2 + beta) >= 0: no positive tail index", 0);
    auto g = [&](double k) { return kesten_expectation(alpha, beta, k, opt.kesten) - 1; };

    // g < 0 just right of 0 and convex in kappa; find the first point with g >= 0.
    double lo = 0, hi = 0.5, ghi = g(hi);
    while (ghi > 0 && hi > 1e-6) {
        hi *= 0.5;
        ghi = g(hi);
    }
    if (ghi > 0) throw ConvergenceError("tail index below 1e-6", hi);
    while (ghi < 0) {
        if (hi >= opt.kappa_max) throw ConvergenceError("no root of the Kesten equation below kappa_max", hi);
        lo = hi;
        hi = std::min(opt.kappa_max, hi * 2);
        ghi = g(hi);
    }
    if (std::fabs(ghi) <= opt.tol) {
        res.kappa = hi;
        res.residual = std::fabs(ghi);
        double ki = std::round(hi);
        if (ki == hi) {
            res.residual = std::fabs(kesten_expectation_sum(alpha, beta, int(ki)) - 1);
            res.method = TailMethod::moment_sum;
        }
        return res;
    }
    std::uintmax_t iters = 200;
    auto bracket = boost::math::tools::toms748_solve(
        g, lo, hi, lo == 0 ? -1.0 : g(lo), ghi,
        [&](double a, double b) { return std::fabs(b - a) <= 1e-3 * opt.tol; }, iters);
    double k = 0.5 * (bracket.first + bracket.second);
    double r = std::fabs(g(k));
    if (!(r <= opt.tol)) throw ConvergenceError("Kesten root residual above tolerance", k);
    res.kappa = k;
    res.residual = r;
    return res;
}

std::vector<LevelPoint> level_grid(const std::vector<double>& ratios, const std::vector<int>& kappas) {
    std::vector<LevelPoint> out;
    for (int k : kappas)
        for (double rho : ratios) {
            LevelPoint pt;
            pt.ratio = rho;
            pt.kappa = k;
            if (rho > 0 && std::isfinite(rho) && k >= 1) {
                // beta^k S(rho) = 1 with S = sum C(k,n) rho^-n (2n-1)!!
                double S = kesten_expectation_sum(1 / rho, 1, k);
                if (std::isfinite(S) && S > 0) {
                    pt.beta = std::pow(S, -1.0 / k);
                    pt.alpha = pt.beta / rho;
                    pt.solved = true;
                }
            }
            out.push_back(pt);
        }
    return out;
}

std::string level_grid_csv(const std::vector<LevelPoint>& grid) {
    std::string s = "ratio,kappa,alpha,beta\n";
    char buf[128];
    for (const auto& pt : grid) {
        if (pt.solved)
            std::snprintf(buf, sizeof buf, "%.17g,%d,%.17g,%.17g\n", pt.ratio, pt.kappa, pt.alpha, pt.beta);
        else
            std::snprintf(buf, sizeof buf, "%.17g,%d,NA,NA\n", pt.ratio, pt.kappa);
        s += buf;
    }
    return s;
}

}  // namespace garchpd
