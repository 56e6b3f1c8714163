// Independent reference for the unit-energy phase-space volume
//   Vol(1) = area of { (theta, xi) : xi^2 + (theta^2/2)^2 <= 1 }
//          = 4 sqrt(2) * Integral_0^1 sqrt(1 - t^4) dt.
// Two routes: the Beta-function closed form sqrt(2) G(1/4) G(3/2) / G(7/4)
// and direct Simpson quadrature with the substitution t = 1 - s^2 that
// removes the square-root singularity at t = 1.
#include <cmath>
#include <cstdio>

namespace {

double simpson_route() {
    // Integral_0^1 sqrt(1-t^4) dt with t = 1 - s^2, dt = -2s ds:
    // Integral_0^1 sqrt(1-(1-s^2)^4) * 2 s ds, smooth on [0, 1]
    const auto f = [](double s) {
        const double t = 1.0 - s * s;
        return 2.0 * s * std::sqrt(1.0 - t * t * t * t);
    };
    const int n = 200000; // even
    const double h = 1.0 / n;
    double acc = f(0.0) + f(1.0);
    for (int i = 1; i < n; ++i) acc += f(i * h) * (i % 2 ? 4.0 : 2.0);
    return 4.0 * std::sqrt(2.0) * acc * h / 3.0;
}

double gamma_route() {
    // Integral_0^1 (1-t^4)^{1/2} dt = B(1/4, 3/2) / 4
    const double lg =
        std::lgamma(0.25) + std::lgamma(1.5) - std::lgamma(1.75);
    return 4.0 * std::sqrt(2.0) * 0.25 * std::exp(lg);
}

} // namespace

int main() {
    const double v_simpson = simpson_route();
    const double v_gamma = gamma_route();
    std::printf("phase volume, quadrature route : %.15f\n", v_simpson);
    std::printf("phase volume, gamma route      : %.15f\n", v_gamma);
    std::printf("route difference               : %.3e\n",
                std::abs(v_simpson - v_gamma));

    const double frozen = 4.944199139470325;
    int rc = 0;
    if (std::abs(v_gamma - frozen) > 1e-12) rc = 1;
    if (std::abs(v_simpson - v_gamma) > 1e-10) rc = 1;
    std::printf("%s\n", rc == 0 ? "oracle ok" : "oracle MISMATCH");
    return rc;
}
