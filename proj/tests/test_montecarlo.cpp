#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "garchpd/errors.hpp"
#include "garchpd/montecarlo.hpp"
#include "garchpd/philox.hpp"
#include "garchpd/specfun.hpp"

using namespace garchpd;

namespace {

GarchParams linton() {
    const double w = 1.14e-5, a = 0.131007, b = 0.845708;
    return GarchParams::from_sigma1(w, a, b, 0, w / (1 - a - b));
}
GarchParams gjr() { return GarchParams::from_state(0.25, 0.1, 0.7, 0.2, 1, 1); }

std::filesystem::path tmp_file(const char* name) {
    return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_SUITE("montecarlo") {
    TEST_CASE("Philox4x32-10 known answers") {
        using C = Philox4x32::Counter;
        CHECK(Philox4x32(0)({0, 0, 0, 0}) == C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
        CHECK(Philox4x32(~0ull)({~0u, ~0u, ~0u, ~0u}) == C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
        CHECK(Philox4x32(0x299f31d0a4093822ull)({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}) ==
              C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
    }

    TEST_CASE("uniforms stay inside (0,1)") {
        CHECK(philox_uniform(0) > 0);
        CHECK(philox_uniform(~0ull) < 1);
        CHECK(std::isfinite(gaussian_quantile(philox_uniform(0))));
    }

    TEST_CASE("draws are addressable") {
        double a = mc_normal(7, 123456, 3), b = mc_normal(7, 123456, 3);
        CHECK(a == b);
        CHECK(mc_normal(7, 123456, 2) != a);
        CHECK(mc_normal(8, 123456, 3) != a);
        // path r of a batch equals the single path
        auto x = simulate_terminal(gjr(), 5, 1000, 7, 1);
        for (std::uint64_t r : {0u, 1u, 517u, 999u}) CHECK(x[r] == simulate_path(gjr(), 5, 7, r));
    }

    TEST_CASE("normal draws pass a KS test") {
        const std::size_t n = 200'000;
        std::vector<double> z(n);
        for (std::size_t r = 0; r < n; ++r) z[r] = mc_normal(3, r, r % 5);
        std::sort(z.begin(), z.end());
        double D = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double F = gaussian_cdf(z[i]);
            D = std::max({D, F - double(i) / n, double(i + 1) / n - F});
        }
        // 0.1% critical value
        CHECK(D < 1.95 / std::sqrt(double(n)));
    }

    TEST_CASE("h=1 terminal values are N(0, sigma1^2)") {
        auto p = linton();
        const std::size_t n = 100'000;
        auto x = simulate_terminal(p, 1, n, 11);
        double s = std::sqrt(sigma1_sq(p));
        std::sort(x.begin(), x.end());
        double D = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double F = gaussian_cdf(x[i] / s);
            D = std::max({D, F - double(i) / n, double(i + 1) / n - F});
        }
        CHECK(D < 1.95 / std::sqrt(double(n)));
    }

    TEST_CASE("deterministic across thread counts") {
        auto a = simulate_terminal(gjr(), 4, 300'000, 42, 1);
        auto b = simulate_terminal(gjr(), 4, 300'000, 42, 4);
        CHECK(a == b);
        CHECK(sample_digest(a) == sample_digest(b));
        auto c = simulate_terminal(gjr(), 4, 300'000, 43, 4);
        CHECK(sample_digest(a) != sample_digest(c));

        std::vector<double> grid{-2, -1, 0, 1, 2};
        auto s1 = simulate_stream(gjr(), 4, 300'000, 42, grid, 2, -1.5, 1);
        auto s4 = simulate_stream(gjr(), 4, 300'000, 42, grid, 2, -1.5, 4);
        CHECK(s1.power_sums == s4.power_sums);
        CHECK(s1.below == s4.below);
        CHECK(s1.tail_sum == s4.tail_sum);
    }

    TEST_CASE("streaming agrees with the stored sample") {
        const std::uint64_t R = 200'000;
        auto x = simulate_terminal(gjr(), 3, R, 9);
        std::vector<double> grid{-3, -1, 0, 0.5, 2};
        auto s = simulate_stream(gjr(), 3, R, 9, grid, 2, -1.0);
        CHECK(s.count == R);
        for (std::size_t i = 0; i < grid.size(); ++i)
            CHECK(s.below[i] == std::uint64_t(std::count_if(x.begin(), x.end(), [&](double v) { return v <= grid[i]; })));
        double m2 = 0, m4 = 0, tail = 0;
        std::uint64_t hits = 0;
        for (double v : x) {
            m2 += v * v;
            m4 += v * v * v * v;
            if (v <= -1.0) {
                tail -= v;
                ++hits;
            }
        }
        CHECK(s.power_sums[0] == doctest::Approx(m2).epsilon(1e-12));
        CHECK(s.power_sums[1] == doctest::Approx(m4).epsilon(1e-12));
        CHECK(s.tail_count == hits);
        CHECK(s.tail_sum == doctest::Approx(tail).epsilon(1e-12));
        CHECK(mc_es(x, double(hits) / R, 1.0) == doctest::Approx(s.tail_sum / hits).epsilon(1e-12));
        CHECK_THROWS_AS(simulate_stream(gjr(), 3, 10, 9, {1, 0}, 0, 0), DomainError);
    }

    TEST_CASE("order statistic and tail mean") {
        std::vector<double> v(100);
        for (int i = 0; i < 100; ++i) v[i] = 100 - i;
        CHECK(mc_quantile(v, 0.05) == 6);
        CHECK(mc_quantile(v, 0.999) == 100);
        CHECK(mc_quantile_reliable(100, 0.01));
        CHECK_FALSE(mc_quantile_reliable(99, 0.01));
        std::vector<double> w{-3, 1, 2, 3, 4, 5, 6, 7, 8, 9};
        CHECK(mc_es(w, 0.1, 3) == 3.0);
        CHECK_THROWS_AS(mc_es(w, 0.1, 4), DomainError);
        CHECK_THROWS_AS(mc_quantile({}, 0.1), DomainError);
        CHECK_THROWS_AS(mc_quantile(v, 0), DomainError);
    }

    TEST_CASE("sample files round trip") {
        auto x = simulate_terminal(gjr(), 2, 5000, 1);
        auto path = tmp_file("garchpd_sample_test.bin");
        write_sample(path.string(), x);
        CHECK(std::filesystem::file_size(path) == 16 + 8 * x.size());
        auto y = read_sample(path.string());
        CHECK(y == x);
        CHECK(sample_digest(y) == sample_digest(x));

        {
            std::ofstream f(path, std::ios::binary | std::ios::trunc);
            f << "not a sample file at all";
        }
        CHECK_THROWS_AS(read_sample(path.string()), FormatError);
        std::filesystem::resize_file(path, 0);
        write_sample(path.string(), x);
        std::filesystem::resize_file(path, 16 + 8 * 100);
        CHECK_THROWS_AS(read_sample(path.string()), FormatError);
        std::filesystem::remove(path);
        CHECK_THROWS_AS(read_sample(path.string()), ResourceError);
    }

    TEST_CASE("storage cap") {
        CHECK_THROWS_AS(simulate_terminal(gjr(), 2, 1000, 1, 0, 999), ResourceError);
        CHECK_THROWS_AS(simulate_terminal(gjr(), 0, 10, 1), DomainError);
    }

    TEST_CASE("replication planner") {
        auto st = standardize(build_table(linton(), 2));
        McPlan v = plan_var(st, 0.05, 0.05, 5);
        double z = 1.959963984540054;
        double expect = 4 * z * z * 0.05 * 0.95 * 1e10 / (v.f_at_q * v.f_at_q);
        CHECK(double(v.R_var) == doctest::Approx(std::ceil(expect)).epsilon(1e-15));
        CHECK(double(v.R_var) == doctest::Approx(7.0710e11).epsilon(5e-5));
        CHECK(v.ci_len_var <= 1e-5);
        CHECK(v.ci_len_var > 0.99999e-5);

        McPlan e = plan(st, 0.05, 0.05, 5, EsVarianceKernel::cdf);
        CHECK(e.R_var == v.R_var);
        CHECK(double(e.R_es) == doctest::Approx(5.0484e12).epsilon(5e-5));
        CHECK(e.ci_len_es <= 1e-5);
        McPlan d = plan_es(st, 0.05, 0.05, 5);
        CHECK(d.R_es > e.R_es);
        CHECK(d.V_sq > 0);

        // tiny precision still asks for one replication
        CHECK(plan_var(st, 0.05, 0.05, -10).R_var == 1);
        CHECK_THROWS_AS(plan_var(st, 0.05, 0, 5), DomainError);
        CHECK_THROWS_AS(plan_var(st, 0.05, 0.05, 30), ResourceError);
    }

    TEST_CASE("estimators are consistent") {
        auto st = standardize(build_table(linton(), 2));
        const std::uint64_t R = 2'000'000;
        auto x = simulate_terminal(linton(), 2, R, 2024);
        for (auto& v : x) v /= st.scale;
        for (double p : {0.05, 0.01}) {
            RiskResult r = risk_row(st, p);
            double se = std::sqrt(p * (1 - p)) / (st.pdf(-r.var) * std::sqrt(double(R)));
            CHECK(std::fabs(-mc_quantile(x, p) - r.var) <= 4 * se);
            // the planner's V^2 is the variance of v = -z 1[z <= -Q]
            McPlan m = plan_es(st, p, 0.05, 3);
            double se_es = std::sqrt(m.V_sq) / (p * std::sqrt(double(R)));
            CHECK(std::fabs(mc_es(x, p, r.var) - r.es) <= 4 * se_es);
        }
    }
}
