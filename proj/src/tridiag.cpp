#include "engel/detail/tridiag.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "engel/errors.hpp"

namespace engel::detail {

int count_below(const Tridiag& t, double x) {
    const std::size_t n = t.size();
    int count = 0;
    double q = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        double sub = 0.0;
        if (i > 0) {
            if (q == 0.0)
                q = std::abs(t.e[i]) * std::numeric_limits<double>::epsilon() +
                    std::numeric_limits<double>::min();
            sub = t.e[i] * t.e[i] / q;
        }
        q = (t.d[i] - x) - sub;
        if (q < 0.0) ++count;
    }
    return count;
}

std::pair<double, double> gershgorin(const Tridiag& t) {
    const std::size_t n = t.size();
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < n; ++i) {
        double r = 0.0;
        if (i > 0) r += std::abs(t.e[i]);
        if (i + 1 < n) r += std::abs(t.e[i + 1]);
        lo = std::min(lo, t.d[i] - r);
        hi = std::max(hi, t.d[i] + r);
    }
    return {lo, hi};
}

namespace {

double bisect_in(const Tridiag& t, int k, double lo, double hi, double rel_tol) {
    for (int iter = 0; iter < 240; ++iter) {
        double width = hi - lo;
        if (width <= rel_tol * (std::abs(lo) + std::abs(hi)) +
                         std::numeric_limits<double>::min())
            break;
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break; // interval at rounding resolution
        if (count_below(t, mid) >= k + 1)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

// LU factorization of (T - lambda I) with partial pivoting, banded storage
// with one fill-in superdiagonal (the dgttrf/dgtts2 scheme).
struct BandedLU {
    std::vector<double> d, du, du2, dl;
    std::vector<char> piv;

    BandedLU(const Tridiag& t, double lambda) {
        const std::size_t n = t.size();
        d.resize(n);
        du.assign(n, 0.0);
        du2.assign(n, 0.0);
        dl.assign(n, 0.0);
        piv.assign(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            d[i] = t.d[i] - lambda;
            if (i + 1 < n) {
                du[i] = t.e[i + 1];
                dl[i] = t.e[i + 1]; // subdiagonal; overwritten by multipliers
            }
        }
        const double tiny = std::numeric_limits<double>::min() * 256.0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (std::abs(d[i]) >= std::abs(dl[i])) {
                if (d[i] == 0.0) d[i] = tiny;
                double fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                double fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                double temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if (i + 2 < n) {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                piv[i] = 1;
            }
        }
        if (d[n - 1] == 0.0) d[n - 1] = tiny;
    }

    void solve(std::vector<double>& b) const {
        const std::size_t n = d.size();
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (piv[i]) std::swap(b[i], b[i + 1]);
            b[i + 1] -= dl[i] * b[i];
        }
        b[n - 1] /= d[n - 1];
        if (n >= 2) b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
        for (std::size_t ii = n - 1; ii-- > 1;) {
            std::size_t i = ii - 1;
            b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
        }
    }
};

} // namespace

double eigenvalue(const Tridiag& t, int k, double rel_tol) {
    if (k < 0 || static_cast<std::size_t>(k) >= t.size())
        throw DomainError("tridiag eigenvalue index out of range");
    auto [lo, hi] = gershgorin(t);
    return bisect_in(t, k, lo, hi, rel_tol);
}

std::vector<double> eigenvalues_upto(const Tridiag& t, int kmax, double rel_tol) {
    if (kmax < 0 || static_cast<std::size_t>(kmax) >= t.size())
        throw DomainError("tridiag eigenvalue index out of range");
    auto [glo, ghi] = gershgorin(t);
    std::vector<double> vals(kmax + 1);
    double lo = glo;
    for (int k = 0; k <= kmax; ++k) {
        vals[k] = bisect_in(t, k, lo, ghi, rel_tol);
        lo = vals[k]; // eigenvalues ascend; reuse as the next lower bound
    }
    return vals;
}

std::vector<double> eigenvector(const Tridiag& t, double lambda, double* residual) {
    const std::size_t n = t.size();
    BandedLU lu(t, lambda);

    double tnorm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double r = std::abs(t.d[i]);
        if (i > 0) r += std::abs(t.e[i]);
        if (i + 1 < n) r += std::abs(t.e[i + 1]);
        tnorm = std::max(tnorm, r);
    }

    std::vector<double> v(n, 1.0 / std::sqrt(static_cast<double>(n)));
    double rel_res = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < 8; ++iter) {
        lu.solve(v);
        double s = 0.0;
        for (double vi : v) s += vi * vi;
        s = std::sqrt(s);
        for (auto& vi : v) vi /= s;
        double rs = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double r = (t.d[i] - lambda) * v[i];
            if (i > 0) r += t.e[i] * v[i - 1];
            if (i + 1 < n) r += t.e[i + 1] * v[i + 1];
            rs += r * r;
        }
        rel_res = std::sqrt(rs) / tnorm;
        if (rel_res < 64.0 * std::numeric_limits<double>::epsilon()) break;
    }
    if (residual) *residual = rel_res;
    if (!(rel_res < 1e-8))
        throw ConvergenceError("inverse iteration failed to converge", rel_res,
                               1e-8);
    return v;
}

} // namespace engel::detail
