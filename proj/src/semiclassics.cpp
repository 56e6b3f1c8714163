#include "engel/semiclassics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "engel/detail/quadrature.hpp"
#include "engel/detail/well.hpp"
#include "engel/errors.hpp"
#include "engel/oscillator.hpp"

namespace engel {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kAreaTol = 1e-11;
constexpr int kMaxGrid = 1 << 21;

double well_v(WellKind kind, double x) {
    switch (kind) {
    case WellKind::quartic:
        return 0.25 * x * x * x * x;
    case WellKind::single_well: {
        const double q = 0.5 * x * x + 1.0;
        return q * q;
    }
    case WellKind::double_well:
        break;
    }
    const double q = 0.5 * x * x - 1.0;
    return q * q;
}

// Integral of 2 sqrt(level - V) over [a, b] where level - V has simple
// zeros at both ends. The substitutions x = a + t^2 and x = b - t^2 turn
// the square-root edges into integrands that vanish like t^2, so the
// adaptive panels converge at the interior rate.
double area_between(WellKind kind, double level, double a, double b) {
    const double mid = 0.5 * (a + b);
    const auto left = [&](double t) {
        const double x = a + t * t;
        return 4.0 * t * std::sqrt(std::max(level - well_v(kind, x), 0.0));
    };
    const auto right = [&](double t) {
        const double x = b - t * t;
        return 4.0 * t * std::sqrt(std::max(level - well_v(kind, x), 0.0));
    };
    const detail::QuadResult lo =
        detail::integrate_refining(left, 0.0, std::sqrt(mid - a), kAreaTol, 16, 2);
    const detail::QuadResult hi =
        detail::integrate_refining(right, 0.0, std::sqrt(b - mid), kAreaTol, 16, 2);
    return lo.value + hi.value;
}

// Action integrals over the right-hand well of the double well, area when
// derivative is false and the density dx / sqrt(E - V) otherwise. For the
// derivative the turning-point maps alone are not enough: E - V must also
// be evaluated without cancellation, so it is factored as (s - w)(s + w),
// w = x^2/2 - 1, s = sqrt(E), and the factor that vanishes at the near
// turning point is expanded exactly in the map variable.
double dw_well_integral(double energy, bool derivative, double tol,
                        int max_panels) {
    const double s = std::sqrt(energy);
    const double xm = std::sqrt(2.0 * (1.0 - s));
    const double xp = std::sqrt(2.0 * (1.0 + s));
    const double mid = 0.5 * (xm + xp);
    const auto w = [](double x) { return 0.5 * x * x - 1.0; };
    const auto shape = [derivative](double t, double r) {
        return derivative ? 2.0 * t / std::sqrt(r) : 4.0 * t * std::sqrt(r);
    };
    const auto left = [&](double t) {
        const double t2 = t * t;
        const double plus = t2 * (xm + 0.5 * t2);
        const double minus = s - w(xm + t2);
        return shape(t, minus * plus);
    };
    const auto right = [&](double t) {
        const double t2 = t * t;
        const double minus = t2 * (xp - 0.5 * t2);
        const double plus = s + w(xp - t2);
        return shape(t, minus * plus);
    };
    const detail::QuadResult lo = detail::integrate_refining(
        left, 0.0, std::sqrt(mid - xm), tol, 16, 2, max_panels);
    const detail::QuadResult hi = detail::integrate_refining(
        right, 0.0, std::sqrt(xp - mid), tol, 16, 2, max_panels);
    return lo.value + hi.value;
}

void validate_well(const WellSpec& well) {
    if (!(well.h > 0.0)) throw DomainError("well spec needs h > 0");
}

struct DwSpectrum {
    std::vector<double> levels; // Richardson-extrapolated, indices 0..ktop
    double worst_est = 0.0;
};

// Sizing estimate for E_ktop(h): the counting function of P_h is
// Vol(E) / (2 pi h) to leading order, so invert the phase volume at the
// requested level count with margin. An undershoot is caught after the
// solve and costs one extra round.
double dw_e_guess(double h, int ktop) {
    const double target = 2.0 * kPi * h * (ktop + 4.0) * 1.3;
    double lo = 0.0, hi = 1.0;
    while (phase_volume({WellKind::double_well, h}, hi) < target) hi *= 2.0;
    for (int i = 0; i < 50; ++i) {
        const double mid = 0.5 * (lo + hi);
        (phase_volume({WellKind::double_well, h}, mid) < target ? lo : hi) = mid;
    }
    return std::max(hi, 14.0 * h);
}

// Two-grid Richardson solve of P_h = -h^2 d^2/dx^2 + (x^2/2 - 1)^2 for
// levels 0..ktop, same retry structure as the oscillator solver: enlarge
// the sizing estimate when the spectrum tops it, refine the grid while
// the two-grid discrepancy exceeds eig_tol.
DwSpectrum dw_solve(double h, int ktop, const NumericsSpec& spec) {
    if (spec.grid_size != 0 && spec.grid_size < 64)
        throw DomainError("grid_size must be 0 (automatic) or at least 64");
    const auto V = [](double x) {
        const double q = 0.5 * x * x - 1.0;
        return q * q;
    };
    const double c = h * h;
    double e_guess = dw_e_guess(h, ktop);
    int n_floor = 0;
    double worst = 0.0;
    for (int round = 0; round < 12; ++round) {
        const double L =
            spec.half_width > 0.0
                ? spec.half_width
                : 1.15 * std::sqrt(2.0 * (1.0 + 2.0 * std::sqrt(e_guess))) + 0.5;
        int N;
        if (spec.grid_size > 0) {
            N = spec.grid_size;
        } else {
            // shortest local wavelength 2 pi h / sqrt(E), capped so the
            // leading discrepancy term E^2 step^2 / (48 h^2) meets eig_tol
            double step = 2.0 * kPi * h / std::sqrt(e_guess) / 12.0;
            step = std::min(step, std::sqrt(48.0 * spec.eig_tol) * h / e_guess);
            const double n_req = std::ceil(2.0 * L / step);
            N = static_cast<int>(std::min<double>(n_req, 2.0 * kMaxGrid));
            N = std::max({N, 512, n_floor});
            if (N > kMaxGrid) {
                const double h_cap = 2.0 * L / kMaxGrid;
                throw ConvergenceError(
                    "requested eigenvalue tolerance needs a grid beyond budget",
                    std::max(worst / 4.0,
                             e_guess * e_guess * h_cap * h_cap / (48.0 * c)),
                    spec.eig_tol);
            }
        }
        if (N % 2) ++N;

        std::vector<double> base = detail::well_eigenvalues(V, c, {L, N}, ktop);
        if (spec.half_width <= 0.0 && base.back() > e_guess) {
            e_guess = 2.0 * base.back();
            continue;
        }
        const std::vector<double> fine =
            detail::well_eigenvalues(V, c, {L, 2 * N}, ktop);
        DwSpectrum out;
        out.levels.resize(ktop + 1);
        worst = 0.0;
        for (int k = 0; k <= ktop; ++k) {
            out.levels[k] = (4.0 * fine[k] - base[k]) / 3.0;
            worst = std::max(worst, std::abs(fine[k] - base[k]) / 3.0);
        }
        out.worst_est = worst;
        if (worst > spec.eig_tol) {
            if (spec.grid_size > 0)
                throw ConvergenceError(
                    "eigenvalue discrepancy above eig_tol on the requested grid",
                    worst, spec.eig_tol);
            n_floor = 2 * N;
            continue;
        }
        return out;
    }
    throw ConvergenceError(
        "double-well solve did not settle within the retry budget", worst,
        spec.eig_tol);
}

} // namespace

double phase_volume(const WellSpec& well, double level) {
    validate_well(well);
    if (!std::isfinite(level)) throw DomainError("level must be finite");
    switch (well.kind) {
    case WellKind::quartic: {
        if (level <= 0.0) return 0.0;
        const double xt = std::pow(4.0 * level, 0.25);
        return area_between(well.kind, level, -xt, xt);
    }
    case WellKind::single_well: {
        if (level <= 1.0) return 0.0;
        const double xt = std::sqrt(2.0 * (std::sqrt(level) - 1.0));
        return area_between(well.kind, level, -xt, xt);
    }
    case WellKind::double_well:
        break;
    }
    if (level <= 0.0) return 0.0;
    const double xp = std::sqrt(2.0 * (1.0 + std::sqrt(level)));
    if (level < 1.0) {
        const double xm = std::sqrt(2.0 * (1.0 - std::sqrt(level)));
        return 2.0 * area_between(well.kind, level, xm, xp);
    }
    return area_between(well.kind, level, -xp, xp);
}

double action_phi(double energy) {
    if (!(energy >= 0.0) || energy >= 1.0)
        throw DomainError("action is defined for energies in [0, 1)");
    if (energy == 0.0) return 0.0;
    return dw_well_integral(energy, false, kAreaTol, 4096) / (2.0 * kPi);
}

double action_phi_derivative(double energy, bool* reduced_accuracy) {
    if (!(energy > 0.0) || energy >= 1.0)
        throw DomainError("action derivative is defined for energies in (0, 1)");
    // the integral grows like log(1/(1 - E)) at the barrier top and its
    // quadrature cost with it; trade accuracy for robustness up there
    const bool near_top = 1.0 - energy < 0.03;
    if (reduced_accuracy) *reduced_accuracy = near_top;
    const double tol = near_top ? 1e-7 : 1e-10;
    return dw_well_integral(energy, true, tol, near_top ? 16384 : 4096) /
           (2.0 * kPi);
}

WeylCount weyl_count(double mu, double threshold, const NumericsSpec& spec) {
    const std::vector<double> e = eigenvalues(mu, spec);
    WeylCount out;
    for (double v : e)
        if (v <= threshold) ++out.count;
    if (e.back() <= threshold)
        throw DomainError(
            "counting window not exhausted; raise spec.max_index");
    if (threshold > 0.0) {
        static const double unit_area =
            phase_volume({WellKind::quartic, 1.0}, 1.0);
        out.prediction =
            std::pow(threshold, 0.75) * unit_area / (2.0 * kPi);
    }
    return out;
}

double single_well_check(double mu, double level, const NumericsSpec& spec) {
    if (!(mu <= -5.0))
        throw DomainError("single-well regime needs mu <= -5");
    if (!(level > 1.0))
        throw DomainError("counting level must exceed the well bottom");
    const double window = level * mu * mu;
    const std::vector<double> e = eigenvalues(mu, spec);
    long long count = 0;
    for (double v : e)
        if (v <= window) ++count;
    if (e.back() <= window)
        throw DomainError(
            "counting window not exhausted; raise spec.max_index");
    const double prediction = std::pow(-mu, 1.5) *
                              phase_volume({WellKind::single_well, 1.0}, level) /
                              (2.0 * kPi);
    return static_cast<double>(count) / prediction;
}

std::vector<DoubleWellPair> double_well_pairs(double h, int k_max,
                                              const NumericsSpec& spec) {
    if (!(h > 0.0) || h > 0.1)
        throw DomainError("double-well pairs need 0 < h <= 0.1");
    if (k_max < 0) throw DomainError("pair index must be nonnegative");
    const DwSpectrum sp = dw_solve(h, 2 * k_max + 1, spec);
    std::vector<DoubleWellPair> pairs(k_max + 1);
    for (int k = 0; k <= k_max; ++k) {
        pairs[k].index = k;
        pairs[k].even = sp.levels[2 * k];
        pairs[k].odd = sp.levels[2 * k + 1];
        pairs[k].splitting = pairs[k].odd - pairs[k].even;
    }
    return pairs;
}

std::vector<BohrLevel> bohr_sommerfeld_residuals(double h, double window_lo,
                                                 double window_hi,
                                                 const NumericsSpec& spec) {
    if (!(h > 0.0)) throw DomainError("h must be positive");
    if (!(window_hi < 1.0))
        throw DomainError("window must stay below the barrier top");
    std::vector<BohrLevel> out;
    if (!(window_lo <= window_hi)) return out;

    // level budget from the counting function; kept odd so every level in
    // range has its parity partner computed for the pairing check
    const double cap = std::max(window_hi, 16.0 * h);
    int ktop =
        static_cast<int>(std::ceil(2.0 * action_phi(std::min(cap, 0.999)) / h)) + 5;
    ktop |= 1;
    for (int tries = 0; tries < 6; ++tries) {
        const DwSpectrum sp = dw_solve(h, ktop, spec);
        if (sp.levels.back() <= window_hi) {
            ktop = (3 * ktop / 2 + 3) | 1;
            continue;
        }
        for (int k = 0; k <= ktop; ++k) {
            const double e = sp.levels[k];
            if (e < window_lo || e > window_hi) continue;
            BohrLevel b;
            b.rank = k / 2;
            b.family = (k % 2 == 0) ? Parity::even : Parity::odd;
            b.energy = e;
            b.residual = action_phi(e) - (b.rank + 0.5) * h;
            const int partner = (k % 2 == 0) ? k + 1 : k - 1;
            b.ambiguous = std::abs(sp.levels[partner] - e) >= 0.1 * h;
            out.push_back(b);
        }
        return out;
    }
    throw ConvergenceError("level budget for the window did not settle",
                           static_cast<double>(ktop), window_hi);
}

} // namespace engel
