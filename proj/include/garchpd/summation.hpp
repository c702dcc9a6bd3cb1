#pragma once

#include <cmath>

namespace garchpd {

// Neumaier's variant of Kahan summation. Also tracks the sum of magnitudes,
// which bounds the cancellation a caller has suffered.
template <class T>
class CompensatedSum {
public:
    void add(const T& x) {
        using std::abs;
        T t = sum_ + x;
        if (abs(sum_) >= abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
        abs_ += abs(x);
    }
    T value() const { return sum_ + comp_; }
    T magnitude() const { return abs_; }

private:
    T sum_{0};
    T comp_{0};
    T abs_{0};
};

}  // namespace garchpd
