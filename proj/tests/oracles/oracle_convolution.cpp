// Independent reference for the group convolution (u * u)(0) with
// u(x) = exp(-|x|^2), where y^{-1} = (-y1, -y2, -y3 + y1 y2,
// -y4 + y1 y3 - y1^2 y2 / 2) and
//   (u * u)(0) = Integral exp(-|y^{-1}|^2 - |y|^2) dy.
// Route 1 integrates y4, y3, y2 in closed Gaussian form, leaving a smooth
// one-dimensional integral in y1. Route 2 is plain Monte Carlo over the
// Gaussian weight exp(-|y|^2), with a fixed seed.
#include <cmath>
#include <cstdio>
#include <random>

namespace {

// After the y4 and y3 Gaussian steps the y2 dependence collapses to
// exp(-c2(y1) y2^2); see the derivation inline.
double reduced_integrand(double y1) {
    const double t = y1 * y1;
    // y4: exp(-(y4-b)^2 - y4^2) integrates to sqrt(pi/2) exp(-b^2/2) with
    //     b = y1 y3 - y1^2 y2 / 2
    // y3: collecting (y3 - y1 y2)^2 + y3^2 + (y1 y3 - y1^2 y2/2)^2 / 2 =
    //     A y3^2 - 2 B y3 + C with
    const double A = 2.0 + 0.5 * t;
    // B = y1 y2 (1 + t/4), C = y2^2 t (1 + t/8); both carry y2^2 after
    // completing the square, so the y2 step is Gaussian with
    // c2 = 2 + t (1 + t/8) - t (1 + t/4)^2 / A
    const double one_quarter = 1.0 + 0.25 * t;
    const double c2 = 2.0 + t * (1.0 + 0.125 * t) - t * one_quarter * one_quarter / A;
    const double pi = 3.141592653589793238462643383279502884;
    return std::sqrt(pi / 2.0) * std::sqrt(pi / A) * std::sqrt(pi / c2) *
           std::exp(-2.0 * y1 * y1);
}

double simpson_route() {
    const int n = 100000;
    const double L = 7.0;
    const double h = 2.0 * L / n;
    double acc = reduced_integrand(-L) + reduced_integrand(L);
    for (int i = 1; i < n; ++i)
        acc += reduced_integrand(-L + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

double monte_carlo_route() {
    // sample y ~ N(0, 1/2 I) so the weight exp(-|y|^2) is absorbed;
    // the estimator is pi^2 E[exp(-|Y^{-1}|^2)]
    std::mt19937_64 rng(20240817);
    std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
    const long n = 40000000;
    double acc = 0.0;
    for (long i = 0; i < n; ++i) {
        const double y1 = gauss(rng), y2 = gauss(rng), y3 = gauss(rng),
                     y4 = gauss(rng);
        const double i3 = -y3 + y1 * y2;
        const double i4 = -y4 + y1 * y3 - 0.5 * y1 * y1 * y2;
        acc += std::exp(-(y1 * y1 + y2 * y2 + i3 * i3 + i4 * i4));
    }
    const double pi = 3.141592653589793238462643383279502884;
    return pi * pi * acc / n;
}

} // namespace

int main() {
    const double v_reduced = simpson_route();
    const double v_mc = monte_carlo_route();
    std::printf("convolution at 0, reduced route : %.15f\n", v_reduced);
    std::printf("convolution at 0, monte carlo   : %.15f\n", v_mc);
    std::printf("route difference                : %.3e\n",
                std::abs(v_reduced - v_mc));

    const double frozen = 2.335665399931916;
    int rc = 0;
    if (std::abs(v_reduced - frozen) > 1e-9) rc = 1;
    if (std::abs(v_mc - v_reduced) > 2e-3) rc = 1;
    std::printf("%s\n", rc == 0 ? "oracle ok" : "oracle MISMATCH");
    return rc;
}
