// Independent reference for the ground energy of -u'' + (theta^2/2)^2.
// Method: Numerov integration of the even solution on [0, L] with shooting
// on u(L) = 0, at two step sizes with sixth-order Richardson pairing.
// Scaling check: -u'' + c theta^4 has energies c^{1/3} E(1), so the result
// must also equal (1/4)^{1/3} times the ground energy of -u'' + theta^4.
#include <cmath>
#include <cstdio>
#include <vector>

namespace {

double potential_quarter(double x) { return 0.25 * x * x * x * x; }
double potential_unit(double x) { return x * x * x * x; }

// Numerov march of u'' = (V - E) u from even initial data; returns u(L).
double shoot(double (*V)(double), double E, double L, int n) {
    const double h = L / n;
    const double h2 = h * h / 12.0;
    const auto g = [&](int i) { return V(i * h) - E; };
    // even parity: u(-h) = u(h); start from u0 = 1 and solve the first
    // Numerov step for u1
    const double u0 = 1.0;
    const double a0 = 1.0 - h2 * g(0);
    const double a1 = 1.0 - h2 * g(1);
    // (1 - h2 g1) u1 - 2(1 + 5 h2 g0) u0 + (1 - h2 g(-1)) u(-1) = 0 with
    // g(-1) = g(1), u(-1) = u1
    const double u1 = (2.0 + 10.0 * h2 * g(0)) * u0 / (2.0 * a1);
    double um = u0, uc = u1;
    double bm = a0 * um, bc = a1 * uc;
    for (int i = 1; i < n; ++i) {
        const double bn = 12.0 * h2 * g(i) * uc + 2.0 * bc - bm;
        bm = bc;
        bc = bn;
        um = uc;
        uc = bn / (1.0 - h2 * g(i + 1));
        // renormalize to dodge overflow in the classically forbidden zone
        if (std::abs(uc) > 1e250) {
            const double s = 1e-250;
            uc *= s;
            um *= s;
            bc *= s;
            bm *= s;
        }
    }
    (void)um;
    return uc;
}

double ground_energy(double (*V)(double), double lo, double hi, double L, int n) {
    // the ground state has no nodes, so u(L) changes sign exactly once as
    // E crosses it from below
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (shoot(V, mid, L, n) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double refined_ground(double (*V)(double), double lo, double hi, double L) {
    const double c = ground_energy(V, lo, hi, L, 40000);
    const double f = ground_energy(V, lo, hi, L, 80000);
    return (16.0 * f - c) / 15.0;
}

} // namespace

int main() {
    const double e_quarter = refined_ground(potential_quarter, 0.1, 2.0, 8.0);
    const double e_unit = refined_ground(potential_unit, 0.5, 2.0, 6.0);
    const double e_scaled = std::cbrt(0.25) * e_unit;

    std::printf("ground energy, potential theta^4/4 : %.15f\n", e_quarter);
    std::printf("ground energy, potential theta^4   : %.15f\n", e_unit);
    std::printf("scaled by (1/4)^(1/3)              : %.15f\n", e_scaled);
    std::printf("internal consistency               : %.3e\n",
                std::abs(e_quarter - e_scaled));

    // frozen reference values
    const double frozen_unit = 1.060362090484183;
    const double frozen_quarter = 0.667986259163;
    int rc = 0;
    if (std::abs(e_unit - frozen_unit) > 1e-10) rc = 1;
    if (std::abs(e_quarter - frozen_quarter) > 1e-10) rc = 1;
    if (std::abs(e_quarter - e_scaled) > 1e-10) rc = 1;
    std::printf("%s\n", rc == 0 ? "oracle ok" : "oracle MISMATCH");
    return rc;
}
