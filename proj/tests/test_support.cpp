#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "engel/detail/interpolation.hpp"
#include "engel/detail/parallel.hpp"
#include "engel/detail/quadrature.hpp"
#include "engel/detail/tridiag.hpp"
#include "engel/detail/well.hpp"
#include "engel/errors.hpp"

using namespace engel;
using namespace engel::detail;

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
}

TEST_CASE("gauss rule integrates polynomials of degree 2n-1 exactly") {
    for (int n : {2, 5, 11, 24}) {
        const QuadRule& r = gauss_legendre(n);
        // moments of x^k on [-1, 1]: 0 for odd k, 2/(k+1) for even k
        for (int k = 0; k <= 2 * n - 1; ++k) {
            double s = 0.0;
            for (size_t i = 0; i < r.x.size(); ++i)
                s += r.w[i] * std::pow(r.x[i], k);
            const double exact = (k % 2 == 1) ? 0.0 : 2.0 / (k + 1);
            CHECK(s == doctest::Approx(exact).epsilon(1e-13).scale(1.0));
        }
    }
}

TEST_CASE("gauss rule weights are positive and sum to the interval length") {
    const QuadRule& r = gauss_legendre(40);
    double s = 0.0;
    for (double w : r.w) {
        CHECK(w > 0.0);
        s += w;
    }
    CHECK(s == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("refining quadrature reaches the requested tolerance") {
    const auto f = [](double x) { return std::exp(-x * x); };
    const QuadResult q = integrate_refining(f, -6.0, 6.0, 1e-12);
    CHECK(std::abs(q.value - std::sqrt(kPi)) < 1e-11);
    CHECK(q.abs_error < 1e-11 * (1.0 + q.value));
}

TEST_CASE("refining quadrature reports failure to converge") {
    // |x|^{-1/2} near 0 defeats panel doubling at this tolerance
    const auto f = [](double x) { return 1.0 / std::sqrt(std::abs(x) + 1e-300); };
    CHECK_THROWS_AS(integrate_refining(f, -1.0, 1.0, 1e-13, 8, 1, 64),
                    ConvergenceError);
}

TEST_CASE("sturm bisection matches the discrete Laplacian spectrum") {
    const int n = 37;
    Tridiag t;
    t.d.assign(n, 2.0);
    t.e.assign(n, -1.0);
    const std::vector<double> ev = eigenvalues_upto(t, n - 1, 1e-15);
    for (int k = 1; k <= n; ++k) {
        const double exact = 2.0 - 2.0 * std::cos(k * kPi / (n + 1));
        CHECK(ev[k - 1] == doctest::Approx(exact).epsilon(1e-13).scale(1.0));
    }
}

TEST_CASE("inverse iteration recovers discrete Laplacian eigenvectors") {
    const int n = 24;
    Tridiag t;
    t.d.assign(n, 2.0);
    t.e.assign(n, -1.0);
    for (int k : {1, 3, 11}) {
        const double lambda = 2.0 - 2.0 * std::cos(k * kPi / (n + 1));
        double resid = 0.0;
        const std::vector<double> v = eigenvector(t, lambda, &resid);
        CHECK(resid < 1e-12);
        // compare against sin(k pi j / (n+1)) up to a common factor
        double ratio = 0.0;
        for (int j = 1; j <= n; ++j) {
            const double exact = std::sin(k * kPi * j / (n + 1));
            if (std::abs(exact) > 0.5) {
                ratio = v[j - 1] / exact;
                break;
            }
        }
        for (int j = 1; j <= n; ++j) {
            const double exact = std::sin(k * kPi * j / (n + 1));
            CHECK(v[j - 1] == doctest::Approx(ratio * exact).epsilon(1e-10).scale(1.0));
        }
    }
}

TEST_CASE("cubic interpolation is exact on cubics and fourth order on sin") {
    std::vector<double> vals;
    const double x0 = -1.0, h = 0.125;
    const auto cubic = [](double x) { return ((2.0 * x - 1.0) * x + 3.0) * x - 0.5; };
    for (int i = 0; i <= 16; ++i) vals.push_back(cubic(x0 + i * h));
    const UniformCubic c(x0, h, vals);
    for (double x : {-0.93, -0.2, 0.41, 0.97})
        CHECK(c(x) == doctest::Approx(cubic(x)).epsilon(1e-13));

    double err_coarse = 0.0, err_fine = 0.0;
    for (int pass = 0; pass < 2; ++pass) {
        const double step = pass == 0 ? 0.05 : 0.025;
        const int n = static_cast<int>(std::round(2.0 / step));
        std::vector<double> sv;
        for (int i = 0; i <= n; ++i) sv.push_back(std::sin(-1.0 + i * step));
        const UniformCubic s(-1.0, step, sv);
        double err = 0.0;
        for (int i = 0; i < 200; ++i) {
            const double x = -0.9 + 1.8 * i / 199.0;
            err = std::max(err, std::abs(s(x) - std::sin(x)));
        }
        (pass == 0 ? err_coarse : err_fine) = err;
    }
    CHECK(err_fine < err_coarse / 12.0); // fourth order: factor 16 up to noise
}

TEST_CASE("interpolation outside the table is an extrapolation error") {
    const UniformCubic c(0.0, 0.5, std::vector<double>{0, 1, 2, 3, 4, 5});
    CHECK_THROWS_AS(c(-0.01), ExtrapolationError);
    CHECK_THROWS_AS(c(2.51), ExtrapolationError);
    CHECK(c.eval_or_zero(-0.01) == 0.0);
}

TEST_CASE("parallel map yields identical results for any thread count") {
    const auto job = [](size_t i) {
        double s = 0.0;
        for (int j = 1; j <= 50; ++j) s += std::sin(i * 0.37 + j) / j;
        return s;
    };
    const std::vector<double> one = parallel_map(400, job, 1);
    const std::vector<double> four = parallel_map(400, job, 4);
    REQUIRE(one.size() == four.size());
    for (size_t i = 0; i < one.size(); ++i) CHECK(one[i] == four[i]);
}

TEST_CASE("parallel for propagates worker exceptions") {
    CHECK_THROWS_AS(parallel_for(
                        16,
                        [](size_t i) {
                            if (i == 7) throw DomainError("boom");
                        },
                        4),
                    DomainError);
}

TEST_CASE("well solver reproduces the harmonic oscillator ladder") {
    const auto V = [](double x) { return x * x; };
    const WellDiscretization g{8.0, 2048};
    const std::vector<double> base = well_eigenvalues(V, 1.0, g, 9);
    const std::vector<double> fine = well_eigenvalues(V, 1.0, {g.L, 2 * g.N}, 9);
    for (int k = 0; k <= 9; ++k) {
        const double rich = (4.0 * fine[k] - base[k]) / 3.0;
        CHECK(rich == doctest::Approx(2.0 * k + 1.0).epsilon(1e-9));
        // second-order convergence: the fine-grid error is a quarter of
        // the base-grid error
        const double e_base = base[k] - (2.0 * k + 1.0);
        const double e_fine = fine[k] - (2.0 * k + 1.0);
        CHECK(e_base / e_fine == doctest::Approx(4.0).epsilon(0.05));
    }
}

TEST_CASE("well modes are normalized with the parity of their index") {
    const auto V = [](double x) { return x * x; };
    const WellDiscretization g{8.0, 2048};
    for (int k : {0, 1, 4, 5}) {
        const WellMode m = well_mode(V, 1.0, g, k);
        CHECK(m.residual < 1e-10);
        const double h = 2.0 * g.L / g.N;
        double s2 = 0.0;
        for (size_t i = 1; i + 1 < m.samples.size(); ++i)
            s2 += m.samples[i] * m.samples[i];
        CHECK(s2 * h == doctest::Approx(1.0).epsilon(1e-12));
        const int mid = g.N / 2;
        for (int j = 1; j < g.N / 2; ++j) {
            const double mirrored =
                (k % 2 == 0) ? m.samples[mid - j] : -m.samples[mid - j];
            CHECK(m.samples[mid + j] == mirrored);
        }
        if (k % 2 == 0)
            CHECK(m.samples[mid] > 0.0);
        else
            CHECK(m.samples[mid] == 0.0);
    }
}
