#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "garchpd/density.hpp"
#include "garchpd/model.hpp"
#include "garchpd/risk.hpp"

namespace garchpd {

// The d-th standard normal draw of path r under `seed`. Inverse-CDF of a
// Philox uniform, so every (seed, r, d) maps to one fixed value.
double mc_normal(std::uint64_t seed, std::uint64_t r, unsigned d);

// x_h of path r started from sigma1^2.
double simulate_path(const GarchParams& p, int h, std::uint64_t seed, std::uint64_t r);

// R terminal values, path r at index r whatever the thread count.
std::vector<double> simulate_terminal(const GarchParams& p, int h, std::uint64_t R, std::uint64_t seed,
                                      int threads = 0, std::uint64_t max_stored = 200'000'000);

// Aggregates without storing the sample. Paths are processed in fixed blocks
// and merged in block order, so totals are bit-identical across thread counts.
struct StreamStats {
    std::uint64_t count = 0;
    std::vector<double> power_sums;   // sum x^(2m), m = 1..power_sums.size()
    std::vector<double> grid;         // ECDF abscissae (raw units)
    std::vector<std::uint64_t> below;  // #{x <= grid[i]}
    double threshold = 0;             // tail threshold (raw units)
    std::uint64_t tail_count = 0;
    double tail_sum = 0;              // sum of -x over x <= threshold
    double tail_sum_sq = 0;

    void merge(const StreamStats& o);
};

StreamStats simulate_stream(const GarchParams& p, int h, std::uint64_t R, std::uint64_t seed,
                            const std::vector<double>& grid, int max_power, double threshold, int threads = 0);

// Order statistic q_{floor(R p) + 1}; estimates -Q.
double mc_quantile(const std::vector<double>& sample, double p);
bool mc_quantile_reliable(std::size_t R, double p);

// (1/(pR)) sum -x 1[x <= -var]
double mc_es(const std::vector<double>& sample, double p, double var);

enum class EsVarianceKernel {
    pdf,  // E v^2 = int u^2 f(u) du, the definition
    cdf   // int u^2 F(u) du; reproduces the reference ES replication counts
};

struct McPlan {
    double p = 0;
    double eta = 0;
    double a = 5;
    std::uint64_t R_var = 0;
    std::uint64_t R_es = 0;
    double var = 0;
    double es = 0;
    double f_at_q = 0;
    double V_sq = 0;
    double ci_len_var = 0;  // at R_var
    double ci_len_es = 0;   // at R_es
};

McPlan plan_var(const StandardizedTable& t, double p, double eta, double a, const RiskOptions& opt = {});
McPlan plan_es(const StandardizedTable& t, double p, double eta, double a,
               EsVarianceKernel kernel = EsVarianceKernel::pdf, const RiskOptions& opt = {});
// both halves
McPlan plan(const StandardizedTable& t, double p, double eta, double a,
            EsVarianceKernel kernel = EsVarianceKernel::pdf, const RiskOptions& opt = {});

// 16-byte header (magic "GPDS", uint32 version, uint64 R) then R float64,
// all little-endian.
void write_sample(const std::string& path, const std::vector<double>& sample);
std::vector<double> read_sample(const std::string& path);

// FNV-1a over the little-endian bytes; a cheap reproducibility digest.
std::uint64_t sample_digest(const std::vector<double>& sample);

}  // namespace garchpd
