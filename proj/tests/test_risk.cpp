#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "garchpd/errors.hpp"
#include "garchpd/risk.hpp"
#include "garchpd/specfun.hpp"

using namespace garchpd;

namespace {

GarchParams linton() {
    const double w = 1.14e-5, a = 0.131007, b = 0.845708;
    return GarchParams::from_sigma1(w, a, b, 0, w / (1 - a - b));
}

const StandardizedTable& linton_h2() {
    static const StandardizedTable st = standardize(build_table(linton(), 2));
    return st;
}

}  // namespace

TEST_SUITE("risk") {
    TEST_CASE("Linton h=2 VaR and ES") {
        const double p[] = {0.05, 0.025, 0.01, 0.005};
        const double Q[] = {1.6415, 1.9635, 2.3443, 2.6092};
        const double ES[] = {2.0745, 2.3620, 2.7121, 2.9612};
        const int iters[] = {3, 3, 3, 4};
        for (int i = 0; i < 4; ++i) {
            RiskResult r = risk_row(linton_h2(), p[i]);
            CAPTURE(p[i]);
            CHECK(std::fabs(r.var - Q[i]) <= 5e-5);
            CHECK(std::fabs(r.es - ES[i]) <= 5e-5);
            CHECK(r.iterations == iters[i]);
            CHECK(r.bisections == 0);
            CHECK(r.newton_residual <= 1e-10);
            CHECK(r.ratio_es < 1);
        }
    }

    TEST_CASE("median gives zero") {
        RiskResult r = var_newton(linton_h2(), 0.5);
        CHECK(r.var == 0);
        CHECK_FALSE(std::signbit(r.var));
        CHECK(r.iterations == 0);
    }

    TEST_CASE("h=1 reproduces the Gaussian") {
        auto st = standardize(build_table(linton(), 1));
        for (double p : {0.05, 0.01, 0.001}) {
            RiskResult r = risk_row(st, p);
            auto g = gaussian_reference(p);
            CHECK(r.var == doctest::Approx(g.first).epsilon(1e-9));
            // the cut at -6 drops int_{-inf}^{-6} Phi = phi(6)/36 (1 + O(1/36))
            double cut = gaussian_pdf(6) / 36 / p;
            CHECK(g.second - r.es == doctest::Approx(cut).epsilon(0.1));
            CHECK(r.ratio_var == doctest::Approx(1).epsilon(1e-9));
            CHECK(r.ratio_es == doctest::Approx(1).epsilon(1e-7));
        }
    }

    TEST_CASE("gaussian reference values") {
        auto g = gaussian_reference(0.05);
        CHECK(g.first == doctest::Approx(1.6448536269514722).epsilon(1e-14));
        CHECK(g.second == doctest::Approx(2.0627128075074257).epsilon(1e-14));
    }

    TEST_CASE("the two ES forms agree") {
        for (double p : {0.05, 0.01, 0.002}) {
            double q = var_newton(linton_h2(), p).var;
            double e1 = 0, e2 = 0;
            double a = es_exact(linton_h2(), p, q, {}, &e1);
            double b = es_tail_mean(linton_h2(), p, q, {}, &e2);
            // integration by parts leaves the boundary term at the lower cut
            double boundary = 6 * linton_h2().cdf(-6) / p;
            CHECK(a - b == doctest::Approx(boundary).epsilon(1e-6));
            CHECK(e1 <= 1e-9);
            CHECK(e2 <= 1e-9);
            CHECK(a > q);
        }
    }

    TEST_CASE("bisection fallback lands on the same quantile") {
        RiskOptions o;
        o.pdf_floor = 1e3;  // never trust the derivative
        for (double p : {0.05, 0.005}) {
            RiskResult b = var_newton(linton_h2(), p, o);
            RiskResult n = var_newton(linton_h2(), p);
            CHECK(b.bisections > 0);
            CHECK(b.var == doctest::Approx(n.var).epsilon(1e-6));
        }
    }

    TEST_CASE("argument checks") {
        CHECK_THROWS_AS(var_newton(linton_h2(), 0), DomainError);
        CHECK_THROWS_AS(var_newton(linton_h2(), 0.6), DomainError);
        CHECK_THROWS_AS(var_newton(linton_h2(), std::nan("")), DomainError);
        // below the lower cut
        CHECK_THROWS_AS(var_newton(linton_h2(), 1e-12), DomainError);
        CHECK_THROWS_AS(es_exact(linton_h2(), 0.05, 7.0), DomainError);
        RiskOptions o;
        o.max_iter = 1;
        CHECK_THROWS_AS(var_newton(linton_h2(), 0.005, o), ConvergenceError);
    }

    TEST_CASE("csv row") {
        RiskResult r = risk_row(linton_h2(), 0.05);
        std::string row = risk_csv_row(r);
        CHECK(row.rfind("0.05,", 0) == 0);
        auto commas = [](const std::string& s) { return std::count(s.begin(), s.end(), ','); };
        CHECK(commas(row) == commas(risk_csv_header()));
    }
}
