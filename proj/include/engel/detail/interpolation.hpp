// Four-point (cubic) Lagrange interpolation on a uniform grid, O(h^4)
// accurate for smooth data. Two out-of-range policies: strict evaluation
// throws, eval_or_zero returns 0 (used for tabulated eigenfunctions whose
// mass beyond the grid is verified to be negligible).
#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "engel/errors.hpp"

namespace engel::detail {

class UniformCubic {
public:
    UniformCubic() = default;
    UniformCubic(double x0, double step, std::vector<double> values)
        : x0_(x0), h_(step), y_(std::move(values)) {}

    double x_min() const { return x0_; }
    double x_max() const { return x0_ + h_ * (static_cast<double>(y_.size()) - 1.0); }
    double step() const { return h_; }
    const std::vector<double>& values() const { return y_; }

    double operator()(double x) const {
        if (x < x_min() - 1e-12 * h_ || x > x_max() + 1e-12 * h_)
            throw ExtrapolationError("interpolation point outside tabulated domain");
        return eval_clamped(x);
    }

    double eval_or_zero(double x) const {
        if (x < x_min() || x > x_max()) return 0.0;
        return eval_clamped(x);
    }

private:
    double eval_clamped(double x) const {
        const std::size_t n = y_.size();
        double t = (x - x0_) / h_;
        // Stencil j-1..j+2 around the containing cell, clamped at both ends.
        long j = static_cast<long>(std::floor(t));
        long lo = j - 1;
        if (lo < 0) lo = 0;
        if (lo > static_cast<long>(n) - 4) lo = static_cast<long>(n) - 4;
        double s = t - static_cast<double>(lo); // position relative to stencil start
        const double* p = y_.data() + lo;
        // Lagrange basis for nodes 0,1,2,3 evaluated at s.
        double b0 = -(s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0;
        double b1 = s * (s - 2.0) * (s - 3.0) / 2.0;
        double b2 = -s * (s - 1.0) * (s - 3.0) / 2.0;
        double b3 = s * (s - 1.0) * (s - 2.0) / 6.0;
        return b0 * p[0] + b1 * p[1] + b2 * p[2] + b3 * p[3];
    }

    double x0_ = 0.0;
    double h_ = 1.0;
    std::vector<double> y_;
};

} // namespace engel::detail
