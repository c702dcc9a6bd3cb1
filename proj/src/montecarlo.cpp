#include "garchpd/montecarlo.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "garchpd/errors.hpp"
#include "garchpd/parallel.hpp"
#include "garchpd/philox.hpp"
#include "garchpd/specfun.hpp"
#include "garchpd/summation.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace garchpd {

namespace {

constexpr std::uint64_t kBlock = 1u << 16;
constexpr char kMagic[4] = {'G', 'P', 'D', 'S'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little, "sample files assume a little-endian host");

void check_plan_args(double p, double eta, double a) {
    if (!(p > 0 && p <= 0.5)) throw DomainError("tail probability must lie in (0, 1/2]");
    if (!(eta > 0 && eta < 1)) throw DomainError("eta must lie in (0, 1)");
    if (!std::isfinite(a)) throw DomainError("precision exponent must be finite");
}

std::uint64_t ceil_count(double x) {
    if (!(x < 1.8e19)) throw ResourceError("replication count exceeds 64-bit range");
    return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(x)));
}

}  // namespace

double mc_normal(std::uint64_t seed, std::uint64_t r, unsigned d) {
    Philox4x32 gen(seed);
    auto out = gen({d / 2, 0, static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(r >> 32)});
    std::uint64_t bits = d % 2 ? (std::uint64_t(out[2]) << 32 | out[3]) : (std::uint64_t(out[0]) << 32 | out[1]);
    return gaussian_quantile(philox_uniform(bits));
}

double simulate_path(const GarchParams& p, int h, std::uint64_t seed, std::uint64_t r) {
    Philox4x32 gen(seed);
    double s2 = sigma1_sq(p);
    double x = 0;
    for (int t = 0; t < h; t += 2) {
        auto out = gen({static_cast<std::uint32_t>(t / 2), 0, static_cast<std::uint32_t>(r),
                        static_cast<std::uint32_t>(r >> 32)});
        const std::uint64_t words[2] = {std::uint64_t(out[0]) << 32 | out[1], std::uint64_t(out[2]) << 32 | out[3]};
        for (int k = 0; k < 2 && t + k < h; ++k) {
            Step st = simulate_step(s2, gaussian_quantile(philox_uniform(words[k])), p);
            x = st.x;
            s2 = st.next_sigma_sq;
        }
    }
    return x;
}

std::vector<double> simulate_terminal(const GarchParams& p, int h, std::uint64_t R, std::uint64_t seed, int threads,
                                      std::uint64_t max_stored) {
    p.validate();
    if (h < 1) throw DomainError("horizon must be >= 1");
    if (R < 1) throw DomainError("R must be >= 1");
    if (R > max_stored) throw ResourceError("sample too large to store; use the streaming mode");
    std::vector<double> out(R);
    const std::uint64_t blocks = (R + kBlock - 1) / kBlock;
    parallel_for(blocks, threads, [&](std::size_t b) {
        std::uint64_t end = std::min<std::uint64_t>(R, (b + 1) * kBlock);
        for (std::uint64_t r = b * kBlock; r < end; ++r) out[r] = simulate_path(p, h, seed, r);
    });
    return out;
}

void StreamStats::merge(const StreamStats& o) {
    count += o.count;
    if (power_sums.size() < o.power_sums.size()) power_sums.resize(o.power_sums.size(), 0);
    for (std::size_t i = 0; i < o.power_sums.size(); ++i) power_sums[i] += o.power_sums[i];
    if (below.size() < o.below.size()) below.resize(o.below.size(), 0);
    for (std::size_t i = 0; i < o.below.size(); ++i) below[i] += o.below[i];
    if (grid.empty()) grid = o.grid;
    threshold = o.threshold;
    tail_count += o.tail_count;
    tail_sum += o.tail_sum;
    tail_sum_sq += o.tail_sum_sq;
}

StreamStats simulate_stream(const GarchParams& p, int h, std::uint64_t R, std::uint64_t seed,
                            const std::vector<double>& grid, int max_power, double threshold, int threads) {
    p.validate();
    if (h < 1) throw DomainError("horizon must be >= 1");
    if (R < 1) throw DomainError("R must be >= 1");
    if (!std::is_sorted(grid.begin(), grid.end())) throw DomainError("ECDF grid must be ascending");
    const std::uint64_t blocks = (R + kBlock - 1) / kBlock;
    std::vector<StreamStats> parts(blocks);
    parallel_for(blocks, threads, [&](std::size_t b) {
        StreamStats& s = parts[b];
        s.grid = grid;
        s.below.assign(grid.size(), 0);
        s.power_sums.assign(std::max(0, max_power), 0);
        s.threshold = threshold;
        std::uint64_t end = std::min<std::uint64_t>(R, (b + 1) * kBlock);
        for (std::uint64_t r = b * kBlock; r < end; ++r) {
            double x = simulate_path(p, h, seed, r);
            ++s.count;
            double x2 = x * x, pw = 1;
            for (auto& ps : s.power_sums) ps += (pw *= x2);
            auto it = std::lower_bound(grid.begin(), grid.end(), x);
            for (auto i = static_cast<std::size_t>(it - grid.begin()); i < grid.size(); ++i) ++s.below[i];
            if (x <= threshold) {
                ++s.tail_count;
                s.tail_sum -= x;
                s.tail_sum_sq += x2;
            }
        }
    });
    StreamStats total;
    total.grid = grid;
    total.below.assign(grid.size(), 0);
    total.power_sums.assign(std::max(0, max_power), 0);
    total.threshold = threshold;
    for (const auto& s : parts) total.merge(s);
    return total;
}

bool mc_quantile_reliable(std::size_t R, double p) {
    return static_cast<double>(R) * p >= 1;
}

double mc_quantile(const std::vector<double>& sample, double p) {
    if (!(p > 0 && p < 1)) throw DomainError("p must lie in (0, 1)");
    if (sample.empty()) throw DomainError("empty sample");
    std::size_t k = static_cast<std::size_t>(std::floor(static_cast<double>(sample.size()) * p));
    k = std::min(k, sample.size() - 1);  // 0-based index of q_{floor(Rp)+1}
    std::vector<double> tmp(sample);
    std::nth_element(tmp.begin(), tmp.begin() + static_cast<std::ptrdiff_t>(k), tmp.end());
    return tmp[k];
}

double mc_es(const std::vector<double>& sample, double p, double var) {
    if (!(p > 0 && p < 1)) throw DomainError("p must lie in (0, 1)");
    if (sample.empty()) throw DomainError("empty sample");
    CompensatedSum<double> s;
    std::size_t hits = 0;
    for (double x : sample)
        if (x <= -var) {
            s.add(-x);
            ++hits;
        }
    if (!hits) throw DomainError("no sample point in the tail; sample too small for p");
    return s.value() / (p * static_cast<double>(sample.size()));
}

McPlan plan_var(const StandardizedTable& t, double p, double eta, double a, const RiskOptions& opt) {
    check_plan_args(p, eta, a);
    McPlan m;
    m.p = p;
    m.eta = eta;
    m.a = a;
    RiskResult r = var_newton(t, p, opt);
    m.var = r.var;
    m.f_at_q = t.pdf(-r.var);
    if (!(m.f_at_q > 0)) throw DomainError("density vanishes at the quantile");
    double z = -gaussian_quantile(eta / 2);
    double R = 4 * z * z * p * (1 - p) * std::pow(10.0, 2 * a) / (m.f_at_q * m.f_at_q);
    m.R_var = ceil_count(R);
    m.ci_len_var = 2 * z * std::sqrt(p * (1 - p)) / (m.f_at_q * std::sqrt(static_cast<double>(m.R_var)));
    return m;
}

McPlan plan_es(const StandardizedTable& t, double p, double eta, double a, EsVarianceKernel kernel,
               const RiskOptions& opt) {
    check_plan_args(p, eta, a);
    using boost::math::quadrature::gauss_kronrod;
    McPlan m;
    m.p = p;
    m.eta = eta;
    m.a = a;
    RiskResult r = var_newton(t, p, opt);
    m.var = r.var;
    m.f_at_q = t.pdf(-r.var);
    m.es = es_exact(t, p, r.var, opt);
    double err = 0;
    double Ev2 = kernel == EsVarianceKernel::pdf
                     ? gauss_kronrod<double, 31>::integrate([&](double u) { return u * u * t.pdf(u); }, opt.lower_cut,
                                                            -r.var, 20, 1e-12, &err)
                     : gauss_kronrod<double, 31>::integrate([&](double u) { return u * u * t.cdf(u); }, opt.lower_cut,
                                                            -r.var, 20, 1e-12, &err);
    if (!(err * std::max(1.0, 0.5 * (-r.var - opt.lower_cut)) <= opt.quad_tol))
        throw ConvergenceError("second tail moment quadrature above tolerance", Ev2);
    double Ev = p * m.es;
    m.V_sq = std::max(0.0, Ev2 - Ev * Ev);
    double z = -gaussian_quantile(eta / 2);
    m.R_es = ceil_count(4 * z * z * m.V_sq * std::pow(10.0, 2 * a) / (p * p));
    m.ci_len_es = 2 * z * std::sqrt(m.V_sq) / (p * std::sqrt(static_cast<double>(m.R_es)));
    return m;
}

McPlan plan(const StandardizedTable& t, double p, double eta, double a, EsVarianceKernel kernel,
            const RiskOptions& opt) {
    McPlan v = plan_var(t, p, eta, a, opt);
    McPlan e = plan_es(t, p, eta, a, kernel, opt);
    e.R_var = v.R_var;
    e.ci_len_var = v.ci_len_var;
    return e;
}

void write_sample(const std::string& path, const std::vector<double>& sample) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw ResourceError("cannot open " + path + " for writing");
    std::uint64_t R = sample.size();
    os.write(kMagic, 4);
    os.write(reinterpret_cast<const char*>(&kVersion), 4);
    os.write(reinterpret_cast<const char*>(&R), 8);
    os.write(reinterpret_cast<const char*>(sample.data()), static_cast<std::streamsize>(R * sizeof(double)));
    if (!os) throw ResourceError("write failed: " + path);
}

std::vector<double> read_sample(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ResourceError("cannot open " + path);
    char magic[4];
    std::uint32_t version = 0;
    std::uint64_t R = 0;
    is.read(magic, 4);
    is.read(reinterpret_cast<char*>(&version), 4);
    is.read(reinterpret_cast<char*>(&R), 8);
    if (!is || std::memcmp(magic, kMagic, 4) != 0) throw FormatError("not a sample file: " + path);
    if (version != kVersion) throw FormatError("unsupported sample file version");
    is.seekg(0, std::ios::end);
    auto size = static_cast<std::uint64_t>(is.tellg());
    if (size != 16 + R * sizeof(double)) throw FormatError("sample file length does not match header");
    is.seekg(16);
    std::vector<double> out(R);
    is.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(R * sizeof(double)));
    if (!is) throw FormatError("truncated sample file");
    return out;
}

std::uint64_t sample_digest(const std::vector<double>& sample) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (double x : sample) {
        auto bits = std::bit_cast<std::uint64_t>(x);
        for (int i = 0; i < 8; ++i) {
            h ^= (bits >> (8 * i)) & 0xff;
            h *= 0x100000001b3ull;
        }
    }
    return h;
}

}  // namespace garchpd
