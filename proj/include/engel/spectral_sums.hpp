// Spectral sums over the full frequency set: the summability integrals
//   I_gamma = Sum_m Integral E_m(mu)^{-gamma} dmu,
// the dual-sphere constant
//   C_G = 3 Sum_m Integral E_m(mu)^{-7/2} dmu,
// both sides of the change-of-variables identity
//   Sum_m IntegralIntegral F(E_m(nu, lambda)) dnu dlambda
//     = C_G Integral r^{5/2} F(r) dr,
// and the heat-trace density at the origin. The left side is evaluated as a
// direct two-dimensional quadrature over (nu, lambda); the right side goes
// through the one-dimensional mu integral, so agreement of the two checks
// genuinely different integration routes.
#pragma once

#include <vector>

#include "engel/numerics.hpp"

namespace engel {

// How the truncated sums account for what lies beyond their cutoffs:
// extrapolate folds fitted tail estimates into the returned value with a
// matching uncertainty, analytic_bound keeps the value at the bare partial
// sum and widens the uncertainty interval upward instead.
enum class TailMode { analytic_bound, extrapolate };

// Quadrature nodes and weights for the mu integrals on [-bound, bound].
struct MuQuadrature {
    std::vector<double> nodes;
    std::vector<double> weights;
    double bound = 0.0;

    // Composite 16-point Gauss-Legendre rule with the given panel count.
    static MuQuadrature legendre(double bound, int panels);
};

// Truncation and accuracy policy shared by every operation in this header.
// The level sum stops at m_max and the mu integral at mu_grid.bound; both
// cutoffs need to be generous enough for the fitted tails to be trustworthy,
// hence the floors on m_max and the grid bound.
struct TruncationSpec {
    int m_max = 40;                                      // at least 8
    MuQuadrature mu_grid = MuQuadrature::legendre(40.0, 36); // bound at least 10
    TailMode tail_mode = TailMode::extrapolate;
    double rel_tol = 0.01;

    // Reporting thresholds: mu0 splits the mu axis into the three regimes,
    // epsilon marks the bottom stratum E_m <= epsilon mu^2 inside mu > mu0.
    double mu0 = 10.0;
    double epsilon = 0.3;
};

// Where the truncated summability integral accumulates. The three regime
// fields partition the partial value exactly; the exponent is a least-squares
// slope of log(Sum_m E_m^{-gamma}) against log mu over the outer half of the
// positive nodes. The convergence flag is a trend readout of that fitted
// slope (an integrable tail needs slope < -1), not a proof.
struct RegimeReport {
    double central = 0.0;         // |mu| <= mu0
    double negative = 0.0;        // mu < -mu0
    double positive = 0.0;        // mu > mu0
    double positive_bottom = 0.0; // part of positive with E_m <= epsilon mu^2
    double tail_exponent = 0.0;
    bool tail_converging = false;
};

struct Summability {
    double partial_value = 0.0; // truncated double sum, no tail estimates
    RegimeReport report;
};

// Truncated I_gamma with the regime decomposition and the divergence
// diagnostic. Throws DomainError for gamma <= 0 or an invalid truncation.
Summability summability_integral(double gamma, const TruncationSpec& trunc = {});

// The dual-sphere constant with its tail accounting. The mu < -bound
// remainder is bounded through E_m(mu) >= mu^2 and only widens the interval.
// The mu > bound remainder is bracketed through two-sided bounds on the
// growth ratios E_m(mu) / sqrt(mu), so its midpoint carries a rigorous
// half-width; the m > m_max remainder is a power-law fit charged half its
// size. Both are folded into value under TailMode::extrapolate, and the
// interpolation budget of the eigenvalue table is charged either way.
struct SphereConstant {
    double value = 0.0;
    double lower = 0.0;          // uncertainty interval around value
    double upper = 0.0;
    double partial = 0.0;        // 3 x truncated double sum alone
    double tail_positive = 0.0;  // bracketed mu > bound extension (times 3)
    double tail_levels = 0.0;    // fitted m > m_max extension (times 3)
    double negative_bound = 0.0; // bound on the mu < -bound remainder (times 3)
};

// C_G for the given truncation. Throws ConvergenceError when the tail
// uncertainty interval ends up wider than rel_tol times the value.
SphereConstant sphere_constant(const TruncationSpec& trunc = {});

// Radial weight F: (0, infinity) -> R entering both sides of the identity.
// Admissibility means Integral r^{5/2} |F(r)| dr is finite; it is checked at
// construction and violations throw DomainError.
class RadialProfile {
  public:
    // r^power exp(-rate r) with rate > 0 and integer power >= 0.
    static RadialProfile exponential(double rate, int power = 0);
    // r^{-exponent} on (0, cutoff], zero beyond; needs exponent < 7/2.
    static RadialProfile power_cutoff(double exponent, double cutoff);
    // Linear interpolation through (r[i], f[i]), zero outside [r.front(),
    // r.back()]; r must be positive and strictly increasing.
    static RadialProfile tabulated(std::vector<double> r, std::vector<double> f);

    double operator()(double r) const;
    double weighted_norm() const { return weighted_norm_; }

    // Integral r^{5/2} F(r) dr, in closed form for the parametric families
    // and by segment quadrature for tabulated data.
    double weighted_integral() const;

    // Some r_star with |F(r)| <= threshold for every r >= r_star.
    double support_bound(double threshold) const;

  private:
    RadialProfile() = default;
    enum class Kind { exponential, power_cutoff, tabulated };
    Kind kind_ = Kind::exponential;
    double rate_ = 0.0;
    int power_ = 0;
    double exponent_ = 0.0;
    double cutoff_ = 0.0;
    std::vector<double> r_, f_;
    double weighted_norm_ = 0.0;
};

// Companion numbers of a magic_lhs evaluation: the lambda > 0 half of the
// grid sum (the eigenvalues depend on lambda only through lambda^2, so the
// lambda < 0 half coincides with it exactly and the total is twice this),
// the estimated mass outside the grid, and the final window.
struct MagicDetail {
    double lambda_half = 0.0;
    double tail_estimate = 0.0;
    double nu_low = 0.0, nu_high = 0.0, lambda_span = 0.0;
};

// Direct (nu, lambda) quadrature of Sum_{m <= m_max} F(E_m(nu, lambda)).
// The window and resolution grow until the measured edge masses and the
// panel-doubling discrepancy fit within rel_tol; ConvergenceError otherwise.
double magic_lhs(const RadialProfile& profile, const TruncationSpec& trunc = {},
                 MagicDetail* detail = nullptr);

// sphere_constant(trunc).value times Integral r^{5/2} F(r) dr, or the same
// with a sphere constant computed earlier.
double magic_rhs(const RadialProfile& profile, const TruncationSpec& trunc = {});
double magic_rhs(const RadialProfile& profile, const SphereConstant& sphere);

// Heat-trace density at the origin, (2 pi)^{-3} C_G Gamma(7/2) t^{-7/2}.
// Throws DomainError for t <= 0.
double heat_trace_density(double t, const TruncationSpec& trunc = {});
double heat_trace_density(double t, const SphereConstant& sphere);

} // namespace engel
