#pragma once

// Quad precision used by the coefficient engine and the series evaluators.
// The alternating sums lose many digits, so double is not enough for h > 2.

#include <boost/multiprecision/float128.hpp>

namespace garchpd {

using Ext = boost::multiprecision::float128;

// A quad value stored as an unevaluated sum of two doubles. Enough to carry
// ~106 bits through serialization without a quad-aware JSON writer.
struct DoubleDouble {
    double hi = 0.0;
    double lo = 0.0;

    static DoubleDouble from(const Ext& x) {
        DoubleDouble d;
        d.hi = static_cast<double>(x);
        d.lo = static_cast<double>(x - Ext(d.hi));
        return d;
    }
    Ext value() const { return Ext(hi) + Ext(lo); }
    bool operator==(const DoubleDouble&) const = default;
};

}  // namespace garchpd
