#include "oracles.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace oracle {

namespace {

using boost::math::quadrature::gauss_kronrod;

template <class R, class F>
R half_line(F&& f) {
    R err = 0;
    R v = gauss_kronrod<R, 61>::integrate(f, R(0), std::numeric_limits<R>::infinity(), 30, R(1e-13), &err);
    return v;
}

// sigma_h^2 given v_1..v_{h-1}, through the nested form
//   omega + (1 + v_{h-1}) (omega beta + (1 + v_{h-2}) ( ... (omega beta^(h-2) + (1 + v_1) beta^(h-1) sigma_1^2)))
double sigma_h_sq(const garchpd::GarchParams& p, const std::vector<double>& v) {
    const int h = static_cast<int>(v.size()) + 1;
    double S = p.omega * std::pow(p.beta, h - 2) + (1 + v[0]) * std::pow(p.beta, h - 1) * garchpd::sigma1_sq(p);
    for (int t = 2; t <= h - 1; ++t) S = p.omega * std::pow(p.beta, h - 1 - t) + (1 + v[t - 1]) * S;
    return S;
}

}  // namespace

long double coeff_h2(const garchpd::GarchParams& p, int j) {
    const long double s1 = garchpd::sigma1_sq(p);
    const long double r = -j - 0.5L;
    long double sum = 0;
    for (int sign : {1, -1}) {
        const long double a = p.alpha_at(sign);
        // v = s^2 removes the endpoint singularity
        auto f = [&](long double s) {
            long double v = s * s;
            return 2 * std::exp(-p.beta * v / (2 * a)) * std::pow(p.omega + (1 + v) * p.beta * s1, r);
        };
        sum += std::sqrt(p.beta / a) * half_line<long double>(f);
    }
    return sum / 2;
}

long double coeff_h3(const garchpd::GarchParams& p, int j, const garchpd::SignVector& signs) {
    const long double s1 = garchpd::sigma1_sq(p), w = p.omega, b = p.beta;
    const long double a1 = p.alpha_at(signs.at(0)), a2 = p.alpha_at(signs.at(1));
    const long double r = -j - 0.5L;
    long double inner_total = half_line<long double>([&](long double x) {
        long double v1 = x * x;
        long double mid = w * b + (1 + v1) * b * b * s1;
        return 2 * std::exp(-b * v1 / (2 * a1)) * half_line<long double>([&](long double y) {
                   long double v2 = y * y;
                   return 2 * std::exp(-b * v2 / (2 * a2)) * std::pow(w + (1 + v2) * mid, r);
               });
    });
    return std::sqrt(b * b / (a1 * a2)) * inner_total;
}

double pdf(const garchpd::GarchParams& p, int h, double u) {
    if (h != 2 && h != 3) throw std::invalid_argument("oracle::pdf covers h = 2, 3");
    const double c = 1 / std::sqrt(2 * M_PI);
    auto g = [&](double x) { return c * std::exp(-x / 2); };
    auto terminal = [&](const std::vector<double>& v) {
        double s2 = sigma_h_sq(p, v);
        return g(u * u / s2) / std::sqrt(s2);
    };
    double total = 0;
    const int nsign = 1 << (h - 1);
    for (int mask = 0; mask < nsign; ++mask) {
        std::vector<double> a(h - 1);
        double gamma = std::pow(p.beta, h - 1);
        for (int t = 0; t < h - 1; ++t) {
            a[t] = p.alpha_at(mask >> t & 1 ? -1 : 1);
            gamma /= a[t];
        }
        std::vector<double> v(h - 1);
        auto weight = [&](int t, double s) { return 2 * g(p.beta * s * s / a[t]); };
        double val;
        if (h == 2) {
            val = half_line<double>([&](double s) {
                v[0] = s * s;
                return weight(0, s) * terminal(v);
            });
        } else {
            val = half_line<double>([&](double s1) {
                double w1 = weight(0, s1);
                return w1 * half_line<double>([&](double s2) {
                           std::vector<double> vv{s1 * s1, s2 * s2};
                           return weight(1, s2) * terminal(vv);
                       });
            });
        }
        total += std::sqrt(gamma) * val;
    }
    return total / nsign;
}

}  // namespace oracle
