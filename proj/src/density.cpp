#include "garchpd/density.hpp"

#include <cmath>
#include <limits>
#include <map>

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include "garchpd/errors.hpp"
#include "garchpd/parallel.hpp"
#include "garchpd/specfun.hpp"
#include "garchpd/summation.hpp"

namespace garchpd {

namespace {

using boost::multiprecision::mpfr_float_backend;
using boost::multiprecision::number;
using boost::multiprecision::et_off;
using Mp60 = number<mpfr_float_backend<60>, et_off>;
using Mp110 = number<mpfr_float_backend<110>, et_off>;
using Mp200 = number<mpfr_float_backend<200>, et_off>;

const Ext kPi = boost::math::constants::pi<Ext>();
const Ext kEps = std::numeric_limits<Ext>::epsilon();

// Everything about one sign vector that does not depend on j.
template <class R>
struct SignSetup {
    R pref;                 // pi^((h-1)/2) sigma1^-1 prod_t alpha_t^-1/2
    double xi = 0;          // (omega + beta sigma1^2) / (2 alpha_1 sigma1^2)
    std::vector<double> z;  // z_t = beta / (2 alpha_{h-t}), t = 1..h-2
    std::vector<R> q;       // q_t = omega / (D beta^(h-1-t))
};

template <class R>
SignSetup<R> make_setup(const GarchParams& p, int h, const SignVector& s) {
    SignSetup<R> S;
    const R s1(sigma1_sq(p));
    const R D = R(p.omega) + R(p.beta) * s1;
    auto alpha = [&](int t) { return p.alpha_at(s[t - 1]); };  // 1-based
    S.pref = pow(boost::math::constants::pi<R>(), R(h - 1) / 2) / sqrt(s1);
    for (int t = 1; t <= h - 1; ++t) S.pref /= sqrt(R(alpha(t)));
    S.xi = static_cast<double>(D / (2 * R(alpha(1)) * s1));
    for (int t = 1; t <= h - 2; ++t) {
        S.z.push_back(p.beta / (2 * alpha(h - t)));
        S.q.push_back(R(p.omega) / (D * pow(R(p.beta), h - 1 - t)));
    }
    return S;
}

struct CoeffResult {
    DoubleDouble value;
    double abs = 0;   // sum of |path terms|
    double err = 0;   // absolute error bound
    bool capped = false;
};

// Scaled c_{j,s}: nested binomial sums collapsed level by level onto the
// running index K_t (the Psi factor of a level depends only on K_t).
template <class R>
CoeffResult scaled_coefficient(int j, const SignSetup<R>& S, const std::vector<const std::vector<R>*>& zrows,
                               const std::vector<R>& xirow, const SeriesConfig& cfg, double psi_tol) {
    using std::abs;
    CoeffResult res;
    const std::size_t levels = S.z.size();
    const R r = -R(0.5) - R(j);
    const R tol(std::min(cfg.term_tol, psi_tol * 1e-4));
    int kmax_used = 0;

    std::vector<R> V{R(1)}, A{R(1)};
    R tail_rel = 0;
    for (std::size_t t = 0; t < levels; ++t) {
        const std::vector<R>& row = *zrows[t];
        const R q = S.q[t];
        std::vector<CompensatedSum<R>> nv;
        std::vector<R> na;
        R level_max = 0, level_tail = 0;
        for (std::size_t K = 0; K < V.size(); ++K) {
            if (A[K] == 0) continue;
            const R a = R(j) + R(0.5) + R(K);
            const double peak = static_cast<double>((a * q - 1) / (1 - q));
            R b = 1;  // C(r-K, k) q^k
            for (int k = 0;; ++k) {
                const std::size_t Kp = K + k;
                if (Kp >= nv.size()) {
                    nv.resize(Kp + 1);
                    na.resize(Kp + 1, R(0));
                }
                nv[Kp].add(V[K] * b);
                const R absb = abs(b);
                na[Kp] += A[K] * absb;
                const R mag = A[K] * absb * row[j + Kp];
                if (mag > level_max) level_max = mag;
                kmax_used = std::max(kmax_used, k);
                if (k >= peak && mag <= tol * level_max) break;
                if (k >= cfg.inner_k_max) {
                    const R ratio = (a + R(k)) / R(k + 1) * q;
                    res.capped = true;
                    level_tail += ratio < 1 ? mag * ratio / (1 - ratio)
                                            : R(std::numeric_limits<double>::max());
                    break;
                }
                b *= (r - R(K) - R(k)) / R(k + 1) * q;
            }
        }
        V.assign(nv.size(), R(0));
        R total = 0;
        for (std::size_t Kp = 0; Kp < nv.size(); ++Kp) {
            V[Kp] = nv[Kp].value() * row[j + Kp];
            na[Kp] *= row[j + Kp];
            total += na[Kp];
        }
        A.swap(na);
        if (total > 0) tail_rel += level_tail / total;
    }

    CompensatedSum<R> acc;
    R absum = 0;
    for (std::size_t K = 0; K < V.size(); ++K) {
        acc.add(V[K] * xirow[j + K]);
        absum += A[K] * xirow[j + K];
    }
    const R value = S.pref * acc.value();
    absum *= S.pref;
    const R eps = std::numeric_limits<R>::epsilon();
    const int h = static_cast<int>(levels) + 2;
    const R rounding = eps * R(4 * (h - 1) * (kmax_used + 4) + 16);
    R err = absum * (rounding + R(h - 1) * R(psi_tol)) + absum * tail_rel;
    // storage as double-double
    err += abs(value) * R(std::ldexp(1.0, -104));
    res.value.hi = static_cast<double>(value);
    res.value.lo = static_cast<double>(value - R(res.value.hi));
    res.abs = static_cast<double>(absum);
    res.err = static_cast<double>(err);
    if (!std::isfinite(res.err)) res.err = std::numeric_limits<double>::max();
    return res;
}

// Precision tiers for the coefficient engine. Rounding in the inner sums is
// amplified by roughly exp(rho * L), L = prod_t (1+q_t)/(1-q_t), once the
// outer series is summed at rho.
struct Tier {
    int digits;
    double unit;  // effective relative accuracy of rows and arithmetic
};

Tier tier_info(int tier, const SeriesConfig& cfg) {
    switch (tier) {
        case 0: return {33, std::max(cfg.psi_tol, 1e-32)};
        case 1: return {60, 1e-52};
        case 2: return {110, 1e-102};
        default: return {200, 1e-192};
    }
}
constexpr int kTopTier = 3;

template <class R>
std::vector<CoeffResult> compute_block(const GarchParams& params, int h, const std::vector<SignVector>& signs,
                                       std::size_t ncomp, int j_from, int j_to, const SeriesConfig& cfg,
                                       double psi_tol, PsiCache& pc) {
    std::vector<SignSetup<R>> setups;
    for (std::size_t s = 0; s < ncomp; ++s) setups.push_back(make_setup<R>(params, h, signs[s]));
    const std::size_t n_max = j_to + static_cast<std::size_t>(h - 2) * (cfg.inner_k_max + 1);
    std::vector<std::shared_ptr<const std::vector<R>>> xrows(ncomp);
    std::vector<std::vector<std::shared_ptr<const std::vector<R>>>> zrows(ncomp);
    std::vector<std::vector<const std::vector<R>*>> zraw(ncomp);
    for (std::size_t s = 0; s < ncomp; ++s) {
        xrows[s] = pc.row<R>(setups[s].xi, n_max, psi_tol);
        for (double z : setups[s].z) {
            zrows[s].push_back(pc.row<R>(z, n_max, psi_tol));
            zraw[s].push_back(zrows[s].back().get());
        }
    }
    const std::size_t per = j_to + 1 - j_from;
    std::vector<CoeffResult> out(ncomp * per);
    parallel_for(ncomp * per, cfg.threads, [&](std::size_t i) {
        std::size_t s = i / per;
        int j = j_from + static_cast<int>(i % per);
        out[i] = scaled_coefficient<R>(j, setups[s], zraw[s], *xrows[s], cfg, psi_tol);
    });
    return out;
}

std::vector<CoeffResult> compute_tier(int tier, const GarchParams& params, int h,
                                      const std::vector<SignVector>& signs, std::size_t ncomp, int j_from,
                                      int j_to, const SeriesConfig& cfg, PsiCache& pc) {
    const double psi_tol = tier_info(tier, cfg).unit;
    switch (tier) {
        case 0: return compute_block<Ext>(params, h, signs, ncomp, j_from, j_to, cfg, psi_tol, pc);
        case 1: return compute_block<Mp60>(params, h, signs, ncomp, j_from, j_to, cfg, psi_tol, pc);
        case 2: return compute_block<Mp110>(params, h, signs, ncomp, j_from, j_to, cfg, psi_tol, pc);
        default: return compute_block<Mp200>(params, h, signs, ncomp, j_from, j_to, cfg, psi_tol, pc);
    }
}

enum class Kind { pdf, cdf_x, cdf_z };

struct SeriesOut {
    Ext sum = 0;
    Ext abs = 0;
    Ext coeff_err = 0;
    Ext last = 0;  // |last term|, a proxy for the truncation error
};

// sum_j (-rho)^j / j! * weight_j * ct_j
SeriesOut series(const CoefficientTable& t, const Ext& rho, Kind kind) {
    SeriesOut out;
    CompensatedSum<Ext> acc;
    Ext term = 1;
    const int J = t.j_max();
    for (int j = 0; j <= J; ++j) {
        Ext w = term;
        if (kind == Kind::cdf_x) w /= Ext(2 * j + 1);
        if (kind == Kind::cdf_z) w /= Ext(j) + Ext(0.5);
        Ext x = w * t.ext[j];
        acc.add(x);
        Ext aw = w < 0 ? -w : w;
        out.coeff_err += aw * Ext(t.error[j]);
        if (j == J) out.last = x < 0 ? -x : x;
        term *= -rho / Ext(j + 1);
    }
    out.sum = acc.value();
    out.abs = acc.magnitude();
    return out;
}

Ext series_prefactor(int h) { return pow(2 * kPi, -Ext(h) / 2); }

double to_finite(const Ext& x) {
    double d = static_cast<double>(x);
    return std::isfinite(d) ? d : std::numeric_limits<double>::max();
}

bool outside(const CoefficientTable& t, double absu) {
    return absu > t.config.trusted_range * t.scale * (1 + 1e-12);
}

}  // namespace

void SeriesConfig::validate() const {
    if (j_max < 1) throw DomainError("j_max must be >= 1");
    if (j_cap < j_max) throw DomainError("j_cap must be >= j_max");
    if (inner_k_max < 0) throw DomainError("inner_k_max must be >= 0");
    if (term_tol < 0) throw DomainError("term_tol must be >= 0");
    if (!(psi_tol > 0) || psi_tol > 1e-6) throw DomainError("psi_tol must lie in (0, 1e-6]");
    if (!(trusted_range > 0)) throw DomainError("trusted_range must be positive");
    if (max_h < 1) throw DomainError("max_h must be >= 1");
}

double CoefficientTable::log_coeff(int j) const {
    return static_cast<double>(log(averaged.at(j).value()) - Ext(j) * log(Ext(B)));
}

double CoefficientTable::coeff(int j) const { return std::exp(log_coeff(j)); }

double coeff_single(int j, const SignVector& signs, const GarchParams& params, int h,
                    const SeriesConfig& cfg) {
    params.validate();
    cfg.validate();
    if (h < 2) throw DomainError("coeff_single needs h >= 2");
    if (static_cast<int>(signs.size()) != h - 1) throw DomainError("sign vector length must be h-1");
    if (j < 0 || j > cfg.j_cap) throw DomainError("j out of range");
    const auto S = make_setup<Ext>(params, h, signs);
    for (const Ext& q : S.q)
        if (q >= 1) throw ConvergenceError("inner binomial expansion diverges (q >= 1)");
    PsiCache pc(cfg.psi_tol);
    // A lone coefficient needs no outer-series headroom; quad suffices unless
    // the inner cancellation alone eats the digits.
    double L = 1;
    for (const Ext& q : S.q) L *= static_cast<double>((1 + q) / (1 - q));
    int tier = 0;
    while (tier < kTopTier && j * std::log10(L) + 20 > tier_info(tier, cfg).digits) ++tier;
    auto res = compute_tier(tier, params, h, {signs}, 1, j, j, cfg, pc);
    const double s1 = sigma1_sq(params);
    const Ext B = (Ext(params.omega) + Ext(params.beta) * Ext(s1)) * pow(Ext(params.beta), h - 2);
    return static_cast<double>(res[0].value.value() / pow(B, j));
}

std::shared_ptr<const CoefficientTable> build_table(const GarchParams& params, int h,
                                                    const SeriesConfig& cfg, PsiCache* cache) {
    params.validate();
    cfg.validate();
    if (h < 1) throw DomainError("horizon must be >= 1");
    if (h > cfg.max_h) throw ResourceError("horizon exceeds configured cap");

    auto T = std::make_shared<CoefficientTable>();
    T->params = params;
    T->h = h;
    T->config = cfg;
    T->validity = check_assumption1(params, h);
    T->signs = enumerate_sign_vectors(h, cfg.max_h);
    const double s1 = sigma1_sq(params);

    if (h == 1) {
        // N(0, sigma1^2): ct_j = sigma1^-1 with B = sigma1^2
        T->B = s1;
        T->scale = std::sqrt(s1);
        auto c = DoubleDouble::from(1 / sqrt(Ext(s1)));
        T->averaged.assign(cfg.j_max + 1, c);
        T->per_sign = {T->averaged};
        T->error.assign(cfg.j_max + 1, 0.0);
        T->capped.assign(cfg.j_max + 1, 0);
        T->ext.assign(cfg.j_max + 1, c.value());
        return T;
    }

    T->B = static_cast<double>((Ext(params.omega) + Ext(params.beta) * Ext(s1)) *
                               pow(Ext(params.beta), h - 2));
    T->scale = std::sqrt(moment(params, h, 1));

    // With lambda = 0 every sign vector gives the same coefficients.
    const bool symmetric = params.lambda == 0;
    const std::size_t nsign = T->signs.size();
    const std::size_t ncomp = symmetric ? 1 : nsign;
    double L = 1;
    {
        const auto S = make_setup<Ext>(params, h, T->signs[0]);
        for (const Ext& q : S.q) {
            if (q >= 1)
                throw ConvergenceError(
                    "inner binomial expansion diverges: omega >= (omega + beta sigma1^2) beta^(h-2)");
            L *= static_cast<double>((1 + q) / (1 - q));
        }
    }

    PsiCache local(cfg.psi_tol);
    PsiCache& pc = cache ? *cache : local;

    const Ext pref = series_prefactor(h);
    const double edge = cfg.trusted_range * T->scale;
    const Ext rho_edge = Ext(edge) * Ext(edge) / (2 * Ext(T->B));
    const double rho_e = static_cast<double>(rho_edge);

    // smallest tier whose predicted edge error meets eval_tol
    int tier = 0;
    auto predicted = [&](int t) {
        return std::log10(tier_info(t, cfg).unit) + rho_e * L / std::log(10.0) + 1;
    };
    while (tier < kTopTier && predicted(tier) > std::log10(cfg.eval_tol)) ++tier;
    if (cfg.min_tier > tier) tier = std::min(cfg.min_tier, kTopTier);

    std::vector<CoeffResult> res;  // [sign][j] flattened per block below
    std::vector<std::vector<CoeffResult>> by_sign(ncomp);
    int J = cfg.j_max, done = 0;
    for (;;) {
        auto block = compute_tier(tier, params, h, T->signs, ncomp, done, J, cfg, pc);
        const std::size_t per = J + 1 - done;
        for (std::size_t s = 0; s < ncomp; ++s)
            for (std::size_t k = 0; k < per; ++k) by_sign[s].push_back(block[s * per + k]);
        done = J + 1;

        T->averaged.assign(J + 1, {});
        T->ext.assign(J + 1, Ext(0));
        T->error.assign(J + 1, 0.0);
        T->capped.assign(J + 1, 0);
        for (int j = 0; j <= J; ++j) {
            CompensatedSum<Ext> acc;
            Ext err = 0;
            bool cap = false;
            for (std::size_t s = 0; s < nsign; ++s) {
                const CoeffResult& c = by_sign[symmetric ? 0 : s][j];
                acc.add(c.value.value());
                err += Ext(c.err);
                cap = cap || c.capped;
            }
            Ext avg = acc.value() / Ext(nsign);
            T->averaged[j] = DoubleDouble::from(avg);
            T->ext[j] = T->averaged[j].value();
            T->error[j] = to_finite(err / Ext(nsign) + abs(avg) * kEps);
            T->capped[j] = cap;
        }

        SeriesOut so = series(*T, rho_edge, Kind::pdf);
        const Ext f = abs(so.sum);
        const Ext coeff_part = Ext(T->scale) * pref * so.coeff_err;
        if (coeff_part > Ext(cfg.eval_tol) && tier < kTopTier) {
            ++tier;  // the error model undershot; redo everything one tier up
            for (auto& v : by_sign) v.clear();
            done = 0;
            continue;
        }
        const bool tail_ok = so.last <= Ext(cfg.outer_tol) * f;
        if (!tail_ok && cfg.auto_extend && J < cfg.j_cap) {
            J = std::min(2 * J, cfg.j_cap);
            continue;
        }
        const Ext err = Ext(T->scale) * pref * (so.coeff_err + so.abs * kEps * 4 + so.last);
        T->edge_error = to_finite(err);
        T->engine_digits = tier_info(tier, cfg).digits;
        if (!tail_ok && so.last * Ext(T->scale) * pref > Ext(cfg.eval_tol))
            throw ConvergenceError("outer series not converged at the trust edge; raise j_cap",
                                   T->edge_error);
        if (T->edge_error > cfg.eval_tol)
            throw ConvergenceError("coefficient error too large at the trust edge", T->edge_error);
        break;
    }

    T->per_sign.assign(nsign, {});
    for (std::size_t s = 0; s < nsign; ++s)
        for (const auto& c : by_sign[symmetric ? 0 : s]) T->per_sign[s].push_back(c.value);
    return T;
}

Evaluation eval_pdf_x(const CoefficientTable& t, double u) {
    Evaluation e;
    e.outside_trust = outside(t, std::fabs(u));
    if (t.h == 1) {
        e.value = e.raw = gaussian_pdf(u / t.scale) / t.scale;
        return e;
    }
    const Ext pref = series_prefactor(t.h);
    const Ext rho = Ext(u) * Ext(u) / (2 * Ext(t.B));
    SeriesOut so = series(t, rho, Kind::pdf);
    e.raw = static_cast<double>(pref * so.sum);
    e.error = static_cast<double>(pref * (so.coeff_err + so.abs * kEps * 4 + so.last));
    e.clamped = e.raw < 0;
    e.value = e.clamped ? 0.0 : e.raw;
    return e;
}

Evaluation eval_cdf_x(const CoefficientTable& t, double u) {
    Evaluation e;
    e.outside_trust = outside(t, std::fabs(u));
    if (t.h == 1) {
        e.value = e.raw = gaussian_cdf(u / t.scale);
        return e;
    }
    const Ext pref = series_prefactor(t.h);
    const Ext rho = Ext(u) * Ext(u) / (2 * Ext(t.B));
    SeriesOut so = series(t, rho, Kind::cdf_x);
    const Ext au = Ext(std::fabs(u));
    e.raw = static_cast<double>(Ext(0.5) + pref * Ext(u) * so.sum);
    e.error = static_cast<double>(pref * au * (so.coeff_err + so.abs * kEps * 4 + so.last));
    e.clamped = e.raw < 0 || e.raw > 1;
    e.value = std::clamp(e.raw, 0.0, 1.0);
    return e;
}

Evaluation eval_pdf_z(const CoefficientTable& t, double w) {
    if (w < 0 || std::isnan(w)) throw DomainError("pdf_z: w must be >= 0");
    Evaluation e;
    if (w == 0) {
        e.value = e.raw = std::numeric_limits<double>::infinity();
        return e;
    }
    e.outside_trust = outside(t, std::sqrt(w));
    if (t.h == 1) {
        double x = std::sqrt(w);
        e.value = e.raw = gaussian_pdf(x / t.scale) / (t.scale * x);
        return e;
    }
    const Ext pref = series_prefactor(t.h) / sqrt(Ext(w));
    SeriesOut so = series(t, Ext(w) / (2 * Ext(t.B)), Kind::pdf);
    e.raw = static_cast<double>(pref * so.sum);
    e.error = static_cast<double>(pref * (so.coeff_err + so.abs * kEps * 4 + so.last));
    e.clamped = e.raw < 0;
    e.value = e.clamped ? 0.0 : e.raw;
    return e;
}

Evaluation eval_cdf_z(const CoefficientTable& t, double w) {
    if (w < 0 || std::isnan(w)) throw DomainError("cdf_z: w must be >= 0");
    Evaluation e;
    if (w == 0) return e;
    e.outside_trust = outside(t, std::sqrt(w));
    if (t.h == 1) {
        e.value = e.raw = std::erf(std::sqrt(w) / (t.scale * std::sqrt(2.0)));
        return e;
    }
    const Ext pref = series_prefactor(t.h) * sqrt(Ext(w));
    SeriesOut so = series(t, Ext(w) / (2 * Ext(t.B)), Kind::cdf_z);
    e.raw = static_cast<double>(pref * so.sum);
    e.error = static_cast<double>(pref * (so.coeff_err + so.abs * kEps * 4 + so.last));
    e.clamped = e.raw < 0 || e.raw > 1;
    e.value = std::clamp(e.raw, 0.0, 1.0);
    return e;
}

double pdf_x(const CoefficientTable& t, double u) { return eval_pdf_x(t, u).value; }
double cdf_x(const CoefficientTable& t, double u) { return eval_cdf_x(t, u).value; }
double pdf_z(const CoefficientTable& t, double w) { return eval_pdf_z(t, w).value; }
double cdf_z(const CoefficientTable& t, double w) { return eval_cdf_z(t, w).value; }

double moment(const GarchParams& params, int h, int m) {
    params.validate();
    if (m < 1) throw DomainError("moment order must be >= 1");
    if (h < 1) throw DomainError("horizon must be >= 1");
    const double s1 = sigma1_sq(params);
    Ext dfact = 1;  // (2m-1)!!
    for (int i = 1; i <= m; ++i) dfact *= Ext(2 * i - 1);
    if (h == 1) return static_cast<double>(dfact * pow(Ext(s1), m));

    const auto signs = enumerate_sign_vectors(h, std::max(h, kDefaultMaxHorizon));
    const bool symmetric = params.lambda == 0;
    const Ext B = (Ext(params.omega) + Ext(params.beta) * Ext(s1)) * pow(Ext(params.beta), h - 2);
    CompensatedSum<Ext> total;
    for (std::size_t s = 0; s < (symmetric ? 1 : signs.size()); ++s) {
        const auto S = make_setup<Ext>(params, h, signs[s]);
        // r = m: binomials C(m - K, k) terminate, Psi factors are finite sums.
        std::vector<Ext> V{Ext(1)};
        for (std::size_t t = 0; t < S.z.size(); ++t) {
            std::vector<Ext> nv(m + 1, Ext(0));
            for (int K = 0; K < static_cast<int>(V.size()); ++K) {
                Ext b = 1;
                for (int k = 0; K + k <= m; ++k) {
                    nv[K + k] += V[K] * b;
                    b *= Ext(m - K - k) / Ext(k + 1) * S.q[t];
                }
            }
            const Ext z(S.z[t]);
            for (int K = 0; K <= m; ++K) nv[K] *= tricomi_psi_finite_ext(m, K, z);
            V.swap(nv);
        }
        Ext acc = 0;
        for (int K = 0; K < static_cast<int>(V.size()); ++K)
            acc += V[K] * tricomi_psi_finite_ext(m, K, Ext(S.xi));
        total.add(S.pref * acc * pow(B, Ext(m) + Ext(0.5)));
    }
    const Ext avg = total.value() / Ext(symmetric ? 1 : signs.size());
    return static_cast<double>(dfact * pow(2 * kPi, -Ext(h - 1) / 2) * avg);
}

Evaluation StandardizedTable::eval_pdf(double u) const {
    Evaluation e = eval_pdf_x(*table, scale * u);
    e.value *= scale;
    e.raw *= scale;
    e.error *= scale;
    return e;
}

Evaluation StandardizedTable::eval_cdf(double u) const { return eval_cdf_x(*table, scale * u); }

StandardizedTable standardize(std::shared_ptr<const CoefficientTable> table) {
    StandardizedTable st;
    st.scale = table->scale;
    st.table = std::move(table);
    return st;
}

nlohmann::json table_to_json(const CoefficientTable& t) {
    using nlohmann::json;
    auto dd = [](const std::vector<DoubleDouble>& v) {
        json hi = json::array(), lo = json::array();
        for (auto& d : v) {
            hi.push_back(d.hi);
            lo.push_back(d.lo);
        }
        return json{{"hi", hi}, {"lo", lo}};
    };
    json j;
    j["format"] = "garchpd-coefficients";
    j["version"] = 1;
    j["params"] = params_to_json(t.params);
    j["h"] = t.h;
    const SeriesConfig& c = t.config;
    j["config"] = {{"j_max", c.j_max},         {"j_cap", c.j_cap},       {"inner_k_max", c.inner_k_max},
                   {"term_tol", c.term_tol},   {"outer_tol", c.outer_tol}, {"psi_tol", c.psi_tol},
                   {"eval_tol", c.eval_tol},   {"max_h", c.max_h}, {"min_tier", c.min_tier},     {"trusted_range", c.trusted_range},
                   {"auto_extend", c.auto_extend}};
    j["validity"] = {{"theta", t.validity.theta},
                     {"beta_lower", t.validity.beta_lower},
                     {"status", to_string(t.validity.status)}};
    j["B"] = t.B;
    j["scale"] = t.scale;
    j["edge_error"] = t.edge_error;
    j["engine_digits"] = t.engine_digits;
    j["signs"] = t.signs;
    json ps = json::array();
    for (auto& row : t.per_sign) ps.push_back(dd(row));
    j["per_sign"] = ps;
    j["averaged"] = dd(t.averaged);
    j["error"] = t.error;
    j["capped"] = t.capped;
    return j;
}

std::shared_ptr<const CoefficientTable> table_from_json(const nlohmann::json& j) {
    try {
        if (j.at("format") != "garchpd-coefficients") throw FormatError("not a coefficient table");
        if (j.at("version") != 1) throw FormatError("unsupported coefficient table version");
        auto T = std::make_shared<CoefficientTable>();
        T->params = params_from_json(j.at("params"));
        T->h = j.at("h").get<int>();
        const auto& c = j.at("config");
        SeriesConfig& cfg = T->config;
        cfg.j_max = c.at("j_max");
        cfg.j_cap = c.at("j_cap");
        cfg.inner_k_max = c.at("inner_k_max");
        cfg.term_tol = c.at("term_tol");
        cfg.outer_tol = c.at("outer_tol");
        cfg.psi_tol = c.at("psi_tol");
        cfg.eval_tol = c.at("eval_tol");
        cfg.max_h = c.at("max_h");
        cfg.min_tier = c.at("min_tier");
        cfg.trusted_range = c.at("trusted_range");
        cfg.auto_extend = c.at("auto_extend");
        T->validity = check_assumption1(T->params, T->h);
        T->B = j.at("B");
        T->scale = j.at("scale");
        T->edge_error = j.at("edge_error");
        T->engine_digits = j.at("engine_digits");
        T->signs = j.at("signs").get<std::vector<SignVector>>();
        auto dd = [](const nlohmann::json& o) {
            auto hi = o.at("hi").get<std::vector<double>>();
            auto lo = o.at("lo").get<std::vector<double>>();
            if (hi.size() != lo.size()) throw FormatError("hi/lo length mismatch");
            std::vector<DoubleDouble> v(hi.size());
            for (std::size_t i = 0; i < hi.size(); ++i) v[i] = {hi[i], lo[i]};
            return v;
        };
        for (auto& row : j.at("per_sign")) T->per_sign.push_back(dd(row));
        T->averaged = dd(j.at("averaged"));
        T->error = j.at("error").get<std::vector<double>>();
        T->capped = j.at("capped").get<std::vector<int>>();
        if (T->averaged.empty() || T->error.size() != T->averaged.size() ||
            T->capped.size() != T->averaged.size() || T->per_sign.size() != T->signs.size())
            throw FormatError("coefficient table arrays are inconsistent");
        for (auto& d : T->averaged) T->ext.push_back(d.value());
        return T;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("coefficient table: ") + e.what());
    }
}

}  // namespace garchpd
