// Engel group arithmetic in exponential coordinates of the second kind,
// g = exp(x2 X2 + x3 X3 + x4 X4) exp(x1 X1), together with the left- and
// right-invariant vector fields, the sublaplacian acting on a closed class
// of polynomial-times-Gaussian test functions, and pointwise convolution.
//
// Group law and inverse:
//   x . y = (x1+y1, x2+y2, x3+y3+x1 y2, x4+y4+x1 y3+(x1^2/2) y2)
//   x^-1  = (-x1, -x2, -x3+x1 x2, -x4+x1 x3-(x1^2/2) x2)
// Dilations act with weights (1,1,2,3); the homogeneous dimension is 7.
// Haar measure is plain Lebesgue measure dx1 dx2 dx3 dx4.
#pragma once

#include <array>
#include <vector>

#include "engel/errors.hpp"
#include "engel/numerics.hpp"

namespace engel {

struct GroupElement {
    double x1 = 0.0, x2 = 0.0, x3 = 0.0, x4 = 0.0;
};

// The group operations are templated on the scalar so that unit tests can
// run them in exact rational arithmetic; runtime code uses double.
template <class T>
std::array<T, 4> product_components(const std::array<T, 4>& x,
                                    const std::array<T, 4>& y) {
    return {x[0] + y[0],
            x[1] + y[1],
            x[2] + y[2] + x[0] * y[1],
            x[3] + y[3] + x[0] * y[2] + x[0] * x[0] * y[1] / T(2)};
}

template <class T>
std::array<T, 4> inverse_components(const std::array<T, 4>& x) {
    return {-x[0],
            -x[1],
            -x[2] + x[0] * x[1],
            -x[3] + x[0] * x[2] - x[0] * x[0] * x[1] / T(2)};
}

template <class T>
std::array<T, 4> dilate_components(const T& r, const std::array<T, 4>& x) {
    return {r * x[0], r * x[1], r * r * x[2], r * r * r * x[3]};
}

GroupElement group_product(const GroupElement& x, const GroupElement& y);
GroupElement group_inverse(const GroupElement& x);
GroupElement dilate(double r, const GroupElement& x); // r > 0
GroupElement identity();

enum class Side { left, right };

// u(x) = sum_t c_t x1^e1 x2^e2 x3^e3 x4^e4 * exp(-sum_i a_i (x_i - b_i)^2).
// All terms share one Gaussian envelope (widths a_i > 0, centers b_i,
// default 0). The class is closed under the invariant vector fields and
// under left translation by elements with x1 = 0, and all the integrals
// used by the Fourier side reduce to closed-form Gaussian moments.
class GaussHermiteFunction {
public:
    struct Term {
        double coeff;
        std::array<int, 4> exps;
    };

    GaussHermiteFunction(std::vector<Term> terms, std::array<double, 4> widths,
                         std::array<double, 4> centers = {0.0, 0.0, 0.0, 0.0});

    // c * exp(-sum a_i x_i^2)
    static GaussHermiteFunction gaussian(std::array<double, 4> widths,
                                         double coeff = 1.0);

    const std::vector<Term>& terms() const { return terms_; }
    const std::array<double, 4>& widths() const { return widths_; }
    const std::array<double, 4>& centers() const { return centers_; }

    double operator()(const GroupElement& x) const;

    GaussHermiteFunction derivative(int axis) const;            // d/dx_axis
    GaussHermiteFunction times_monomial(int axis, int power) const;
    GaussHermiteFunction plus(const GaussHermiteFunction& o) const;
    GaussHermiteFunction scaled(double factor) const;

    double integral() const;        // closed-form integral over R^4
    double l2_norm_sq() const;      // closed-form integral of u^2
    // Integral of |u| for a single-term function (closed form for centered
    // axes, 1D quadrature otherwise); throws DomainError on multi-term input.
    double l1_norm_single_term() const;
    // sum over terms of the single-term L1 integrals; an upper bound on the
    // true L1 norm by the triangle inequality.
    double l1_upper_bound() const;

    int max_total_degree() const;

private:
    void merge_terms();

    std::vector<Term> terms_;
    std::array<double, 4> widths_;
    std::array<double, 4> centers_;
};

// Left fields:  X1 = d1, X2 = d2 + x1 d3 + (x1^2/2) d4, X3 = d3 + x1 d4, X4 = d4.
// Right fields: X~1 = d1 + x2 d3 + x3 d4, X~2 = d2, X~3 = d3, X~4 = d4.
GaussHermiteFunction apply_field(int i, Side side, const GaussHermiteFunction& u);

// (X1^2 + X2^2) u for side = left, (X~1^2 + X~2^2) u for side = right.
GaussHermiteFunction sublaplacian(const GaussHermiteFunction& u, Side side);

// (u * v)(x) = integral of u(x . y^-1) v(y) dy, by tensor-product
// Gauss-Legendre quadrature on a box sized from the Gaussian envelope of v
// so the neglected tail is below the requested tolerance.
double convolve_at(const GaussHermiteFunction& u, const GaussHermiteFunction& v,
                   const GroupElement& x, const NumericsSpec& spec);

} // namespace engel
