// Gauss-Legendre quadrature with panel composition and an error-estimating
// refinement wrapper. Rules are computed once per order and cached.
#pragma once

#include <functional>
#include <vector>

namespace engel::detail {

struct QuadRule {
    std::vector<double> x; // nodes on (-1, 1)
    std::vector<double> w; // weights, sum = 2
};

// n-point Gauss-Legendre rule, exact for polynomials of degree 2n-1.
const QuadRule& gauss_legendre(int n);

// Single n-point panel on [a, b].
template <class F>
double gauss_panel(F&& f, double a, double b, int n) {
    const QuadRule& rule = gauss_legendre(n);
    const double c = 0.5 * (a + b), s = 0.5 * (b - a);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.x.size(); ++i)
        acc += rule.w[i] * f(c + s * rule.x[i]);
    return s * acc;
}

// Composite rule: [a, b] split into `panels` equal panels of n points each.
template <class F>
double gauss_composite(F&& f, double a, double b, int n, int panels) {
    double acc = 0.0;
    const double step = (b - a) / panels;
    for (int p = 0; p < panels; ++p)
        acc += gauss_panel(f, a + p * step, a + (p + 1) * step, n);
    return acc;
}

struct QuadResult {
    double value;
    double abs_error; // |last refinement step|, a standard a posteriori estimate
    int panels;       // panel count of the accepted pass
};

// Panel-doubling refinement until successive composite values agree within
// tol (absolute + relative mix). Throws ConvergenceError if the panel budget
// runs out before that happens.
QuadResult integrate_refining(const std::function<double(double)>& f, double a,
                              double b, double tol, int n = 16,
                              int initial_panels = 1, int max_panels = 4096);

} // namespace engel::detail
