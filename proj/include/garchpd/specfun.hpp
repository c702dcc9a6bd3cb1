#pragma once

#include <bit>
#include <cstdint>
#include <limits>
#include <tuple>
#include <map>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include "garchpd/extended.hpp"
#include "garchpd/psi_row.hpp"

namespace garchpd {

// Tricomi's confluent hypergeometric function of the second kind,
//   Psi(a, c; z) = 1/Gamma(a) * int_0^inf e^{-zt} t^{a-1} (1+t)^{c-a-1} dt,
// for a > 0, z > 0 and any real c. Relative error target `tol` (<= 1e-6).
double tricomi_psi(double a, double c, double z, double tol = 1e-12);

// Psi(1/2, 3/2 + m - k; xi), which terminates:
//   sum_{i=0}^{n} C(n,i) Gamma(i+1/2)/sqrt(pi) xi^{-i-1/2},  n = m - k.
double tricomi_psi_finite(int m, int k, double xi);
Ext tricomi_psi_finite_ext(int m, int k, const Ext& xi);

// r(r-1)...(r-k+1)/k!
double gen_binom(double r, int k);

double gaussian_pdf(double u);
double gaussian_cdf(double u);
double gaussian_quantile(double p);

// Psi(1/2, 1-n; z) for n = 0..n_max in quad precision: forward recurrence
// from quadrature seeds, checked against quadrature at n_max.
std::vector<Ext> tricomi_half_row(double z, std::size_t n_max, double tol);

// Memo for the coefficient engine. Rows are keyed by z; a request for a
// longer row than cached recomputes and replaces it. Safe to share between
// threads; returned rows are immutable snapshots.
class PsiCache {
public:
    explicit PsiCache(double tol = 1e-30) : tol_(tol) {}

    std::shared_ptr<const std::vector<Ext>> half_row(double z, std::size_t n_max) {
        return row<Ext>(z, n_max, tol_);
    }

    // Row in precision R at tolerance tol; rows are keyed by (R, z, tol).
    template <class R>
    std::shared_ptr<const std::vector<R>> row(double z, std::size_t n_max, double tol) {
        const Key key{std::numeric_limits<R>::digits, bits(z), bits(tol)};
        {
            std::lock_guard<std::mutex> lk(mu_);
            auto it = rows_.find(key);
            if (it != rows_.end() && it->second.size > n_max)
                return std::static_pointer_cast<const std::vector<R>>(it->second.ptr);
        }
        auto r = std::make_shared<const std::vector<R>>(detail::psi_half_row<R>(z, n_max, tol));
        std::lock_guard<std::mutex> lk(mu_);
        auto& slot = rows_[key];
        if (!slot.ptr || slot.size < r->size()) slot = {r, r->size()};
        return std::static_pointer_cast<const std::vector<R>>(slot.ptr);
    }

    double value(double c, double z);  // Psi(1/2, c; z) in double
    double tol() const { return tol_; }

private:
    struct Slot {
        std::shared_ptr<const void> ptr;
        std::size_t size = 0;
    };
    using Key = std::tuple<int, std::uint64_t, std::uint64_t>;
    static std::uint64_t bits(double x) { return std::bit_cast<std::uint64_t>(x); }

    double tol_;
    std::mutex mu_;
    std::map<Key, Slot> rows_;
    std::map<std::pair<std::uint64_t, std::uint64_t>, double> values_;
};

}  // namespace garchpd
