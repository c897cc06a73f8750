#pragma once

#include <cstddef>
#include <span>

namespace ballistic {

/// Kahan-Babuska (Neumaier) compensated accumulator.
template <typename Scalar = double>
class CompensatedSum {
public:
    CompensatedSum& operator+=(Scalar x) {
        const Scalar t = sum_ + x;
        if ((sum_ >= 0 ? sum_ : -sum_) >= (x >= 0 ? x : -x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
        return *this;
    }

    Scalar value() const { return sum_ + comp_; }

private:
    Scalar sum_ = 0;
    Scalar comp_ = 0;
};

template <typename Scalar>
Scalar compensated_sum(std::span<const Scalar> xs) {
    CompensatedSum<Scalar> acc;
    for (Scalar x : xs) acc += x;
    return acc.value();
}

}  // namespace ballistic
