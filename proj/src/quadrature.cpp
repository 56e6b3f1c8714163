#include "engel/detail/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include "engel/errors.hpp"

namespace engel::detail {

namespace {

// Newton iteration on the Legendre polynomial P_n, using the three-term
// recurrence for values and the standard identity for the derivative.
QuadRule compute_rule(int n) {
    QuadRule rule;
    rule.x.resize(n);
    rule.w.resize(n);
    const double pi = 3.14159265358979323846;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        double w = 2.0 / ((1.0 - x * x) * pp * pp);
        rule.x[i] = -x;
        rule.w[i] = w;
        rule.x[n - 1 - i] = x;
        rule.w[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.x[n / 2] = 0.0;
    return rule;
}

} // namespace

const QuadRule& gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
    static std::map<int, QuadRule> cache;
    static std::mutex mutex;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, compute_rule(n)).first;
    return it->second;
}

QuadResult integrate_refining(const std::function<double(double)>& f, double a,
                              double b, double tol, int n, int initial_panels,
                              int max_panels) {
    double prev = gauss_composite(f, a, b, n, initial_panels);
    double prev_err = std::abs(prev);
    for (int panels = 2 * initial_panels; panels <= max_panels; panels *= 2) {
        double cur = gauss_composite(f, a, b, n, panels);
        double err = std::abs(cur - prev);
        if (err <= tol * (1.0 + std::abs(cur))) return {cur, err, panels};
        prev = cur;
        prev_err = err;
    }
    throw ConvergenceError("quadrature did not converge within the panel budget",
                           prev_err, tol);
}

} // namespace engel::detail
