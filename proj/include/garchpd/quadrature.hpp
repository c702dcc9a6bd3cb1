#pragma once

// Gauss-Legendre panels on a grid graded geometrically toward the origin.
// Used for the Tricomi integral, whose integrand is sharply peaked at s = 0
// once c is very negative.

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <cstddef>
#include <vector>

#include "garchpd/errors.hpp"

namespace garchpd::quad {

template <class R>
struct GaussLegendre {
    std::vector<R> x;  // nodes on [-1, 1]
    std::vector<R> w;

    explicit GaussLegendre(int n) : x(n), w(n) {
        using std::abs;
        using std::cos;
        const R pi = R(3.14159265358979323846264338327950288L);
        const R eps = std::numeric_limits<R>::epsilon();
        for (int i = 0; i < (n + 1) / 2; ++i) {
            R z = cos(pi * (R(i) + R(0.75)) / (R(n) + R(0.5)));
            R dp = 0;
            for (int it = 0; it < 100; ++it) {
                R p0 = 1, p1 = z;
                for (int k = 2; k <= n; ++k) {
                    R p2 = (R(2 * k - 1) * z * p1 - R(k - 1) * p0) / R(k);
                    p0 = p1;
                    p1 = p2;
                }
                if (n == 1) p0 = 1;
                dp = R(n) * (z * p1 - p0) / (z * z - 1);
                R dz = p1 / dp;
                z -= dz;
                if (abs(dz) <= 4 * eps * abs(z) + eps) break;
            }
            // recompute derivative at the converged node
            R p0 = 1, p1 = z;
            for (int k = 2; k <= n; ++k) {
                R p2 = (R(2 * k - 1) * z * p1 - R(k - 1) * p0) / R(k);
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1;
            dp = R(n) * (z * p1 - p0) / (z * z - 1);
            R wi = 2 / ((1 - z * z) * dp * dp);
            x[i] = -z;
            x[n - 1 - i] = z;
            w[i] = wi;
            w[n - 1 - i] = wi;
        }
    }
};

struct GradedOptions {
    int order = 20;        // Gauss points per panel
    int max_doublings = 8;  // subpanel refinement budget
};

// Integrates a family of n nonnegative integrands over [0, S]. eval(s, out)
// writes the n integrand values at s. Breakpoints are S*2^-k for k = 0..levels,
// each panel cut into m equal pieces; m doubles until every component agrees
// with the previous pass to relative tolerance `tol`.
template <class R, class Eval>
std::vector<R> graded_integrate(Eval&& eval, std::size_t n, R S, int levels,
                                const R& tol, const GradedOptions& opt = {}) {
    using std::abs;
    static thread_local std::vector<std::pair<int, GaussLegendre<R>>> rules;
    const GaussLegendre<R>* rule = nullptr;
    for (auto& r : rules)
        if (r.first == opt.order) rule = &r.second;
    if (!rule) {
        rules.emplace_back(opt.order, GaussLegendre<R>(opt.order));
        rule = &rules.back().second;
    }

    std::vector<R> edges;
    edges.push_back(R(0));
    R b = S;
    for (int k = 0; k < levels; ++k) b /= 2;
    for (int k = levels; k >= 0; --k) {
        edges.push_back(b);
        b *= 2;
    }

    std::vector<R> vals(n), prev, cur(n);
    auto pass = [&](int m) {
        std::fill(cur.begin(), cur.end(), R(0));
        for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
            R lo = edges[e], width = (edges[e + 1] - edges[e]) / R(m);
            for (int p = 0; p < m; ++p) {
                R a = lo + width * R(p);
                R half = width / 2, mid = a + half;
                for (std::size_t g = 0; g < rule->x.size(); ++g) {
                    eval(mid + half * rule->x[g], vals);
                    R wg = half * rule->w[g];
                    for (std::size_t i = 0; i < n; ++i) cur[i] += wg * vals[i];
                }
            }
        }
    };

    pass(1);
    prev = cur;
    for (int d = 1, m = 2; d <= opt.max_doublings; ++d, m *= 2) {
        pass(m);
        bool ok = true;
        for (std::size_t i = 0; i < n && ok; ++i)
            if (abs(cur[i] - prev[i]) > tol * abs(cur[i])) ok = false;
        if (ok) return cur;
        prev.swap(cur);
        cur.assign(n, R(0));
    }
    throw ConvergenceError("graded quadrature did not reach tolerance",
                           static_cast<double>(prev.empty() ? R(0) : prev[0]));
}

}  // namespace garchpd::quad
