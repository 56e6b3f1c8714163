// Fourier analysis on the frequency set N^2 x R x R*: oscillatory matrix
// elements W((n,m,nu,lambda), x) of the group representations against the
// quartic oscillator eigenbasis, the scalar Fourier transform built on
// them, Plancherel and inversion checks over finite windows, the heat
// kernel at general points, and the frequency distance together with the
// boundary points of its completion.
//
// Conventions. With psi_k the L^2-normalized eigenfunctions of
//   P_{nu,lambda} = -d^2/dtheta^2 + ((lambda/2) theta^2 - nu/lambda)^2,
// the matrix element and the transform of an integrable u are
//   W((n,m,nu,lambda), x) = e^{i(lambda x4 - (nu/lambda) x2)}
//       Integral e^{i lambda (theta x3 + theta^2 x2 / 2)}
//                psi_m(theta + x1) psi_n(theta) dtheta,
//   F(u)(n,m,nu,lambda)   = Integral_G W((n,m,nu,lambda), x) u(x) dx.
// The measure on the frequency set is the counting measure in (n,m) times
// dnu dlambda, and the factor (2 pi)^{-3} pairs with it in the Plancherel
// and inversion formulas. Under the dual dilation
// (n, m, nu, lambda) -> (n, m, r^4 nu, r^3 lambda) energies scale by r^2
// and W absorbs group dilations of x.
#pragma once

#include <array>
#include <complex>
#include <functional>
#include <variant>
#include <vector>

#include "engel/group.hpp"
#include "engel/numerics.hpp"

namespace engel {

struct FrequencyPoint {
    int n = 0;
    int m = 0;
    double nu = 0.0;
    double lambda = 1.0; // must be nonzero
};

struct FourierCoefficient {
    std::complex<double> value{0.0, 0.0};
    // quadrature refinement discrepancy; |value| <= L1 norm of u plus this
    double abs_error_estimate = 0.0;
};

// Finite truncation window for Plancherel sums, inversion integrals, and
// coefficient tables: modes n, m <= max_mode, |nu| <= nu_bound, and
// lambda_min <= |lambda| <= lambda_max on a grid uniform in log |lambda|.
struct FrequencyWindow {
    int max_mode = 12;
    double nu_bound = 8.0;
    double lambda_min = 0.05;
    double lambda_max = 8.0;
    int nu_panels = 10;     // Gauss panels over [-nu_bound, nu_bound]
    int lambda_panels = 8;  // Gauss panels, uniform in log lambda
};

// W((n,m,nu,lambda), x) by oscillatory quadrature over the eigenfunction
// support, with at least eight nodes per local wavelength of the phase.
// Throws ConvergenceError when that many nodes would exceed the internal
// node budget and DomainError on lambda = 0 or negative indices.
std::complex<double> w_element(const FrequencyPoint& p, const GroupElement& x,
                               const NumericsSpec& spec = {});

// All entries (n, m) with n, m <= max_mode at one (nu, lambda), sharing a
// single eigensolve and one set of quadrature nodes. Row-major layout,
// entry (n, m) at index n * (max_mode + 1) + m.
std::vector<std::complex<double>> w_matrix(double nu, double lambda,
                                           const GroupElement& x, int max_mode,
                                           const NumericsSpec& spec = {});

// F(u)(p) through the separability reduction: the x2, x3, x4 integrals
// against the Gaussian envelope are closed-form Fourier moments, leaving a
// two-dimensional numeric quadrature in (theta, x1). The error estimate is
// the discrepancy against a refined node set.
FourierCoefficient fourier_transform(const GaussHermiteFunction& u,
                                     const FrequencyPoint& p,
                                     const NumericsSpec& spec = {});

// Fallback for functions outside the Gauss-Hermite class: plain tensor
// quadrature of u against W over the box |x_i| <= half_widths[i]. Cost
// grows as the product of the four per-axis node counts, so this path is
// orders of magnitude slower than the separability reduction.
FourierCoefficient fourier_transform_sampled(
    const std::function<double(const GroupElement&)>& u,
    const std::array<double, 4>& half_widths, const FrequencyPoint& p,
    const NumericsSpec& spec = {});

// The full coefficient block F(u)(n, m, nu, lambda), n, m <= max_mode, in
// the same row-major layout as w_matrix.
std::vector<std::complex<double>> fourier_matrix(const GaussHermiteFunction& u,
                                                 double nu, double lambda,
                                                 int max_mode,
                                                 const NumericsSpec& spec = {});

struct PlancherelReport {
    double ratio = 0.0;          // transform_mass / squared_norm
    double transform_mass = 0.0; // (2 pi)^{-3} window integral of |F(u)|^2
    double squared_norm = 0.0;   // closed-form L^2 norm squared of u
    // share of transform_mass carried by the outermost truncation shells
    double mode_shell_share = 0.0;
    double nu_edge_share = 0.0;
    double lambda_top_share = 0.0;
    double lambda_bottom_share = 0.0;
};

// Window approximation of the Plancherel identity; the ratio tends to 1 as
// the window grows. Throws ConvergenceError when the mode shells do not
// decay toward the truncation edge.
PlancherelReport plancherel_check(const GaussHermiteFunction& u,
                                  const FrequencyWindow& window = {},
                                  const NumericsSpec& spec = {});

// Coefficient table for inversion: maps (nu, lambda) to the row-major
// block of coefficients with n, m <= the max_mode it was built for.
using CoefficientProvider =
    std::function<std::vector<std::complex<double>>(double nu, double lambda)>;

CoefficientProvider fourier_coefficients(const GaussHermiteFunction& u,
                                         int max_mode,
                                         const NumericsSpec& spec = {});

// Truncated inversion integral
//   (2 pi)^{-3} Integral sum_{n,m} W((n,m,nu,lambda), x^{-1}) c(n,m,...)
// over the window, both signs of lambda. For coefficients of a Schwartz
// function this converges to u(x) as the window grows. Throws
// ConvergenceError when the mode shells do not decay.
std::complex<double> inverse_fourier_at(const CoefficientProvider& coeffs,
                                        const GroupElement& x,
                                        const FrequencyWindow& window = {},
                                        const NumericsSpec& spec = {});

// Truncation policy for the heat kernel integral.
struct HeatSpec {
    int max_mode = 12;     // oscillator levels kept in the diagonal sum
    double rel_tol = 0.02; // gate on error_estimate / |value|
    double imag_tol = 1e-6; // gate on imag_residual / |value|
    int resolution = 1;    // multiplies all panel counts
};

struct HeatValue {
    double value = 0.0;
    // imaginary part of the assembled integral; the kernel is real, so
    // anything nonzero here is quadrature inconsistency
    double imag_residual = 0.0;
    // truncation bounds plus the coarse-versus-fine quadrature discrepancy
    double error_estimate = 0.0;
};

// Heat kernel h_t(x) = (2 pi)^{-3} sum_m Integral e^{-t E_m(nu, lambda)}
// W((m,m,nu,lambda), x^{-1}) dnu dlambda, by graded quadrature over the
// frequency plane with analytic bounds for the harmonic far region. Throws
// ConvergenceError when the error estimate or the imaginary residual
// exceeds its gate.
HeatValue heat_kernel_at(double t, const GroupElement& x,
                         const HeatSpec& trunc = {},
                         const NumericsSpec& spec = {});

// Limit data of a lambda -> 0 boundary point of the completion: the limits
// of E_m(nu, lambda) and of (E_m - E_n)(nu, lambda), with nu kept.
struct BoundaryPoint {
    double energy = 0.0;
    double energy_gap = 0.0;
    double nu = 0.0;
};

// The boundary point reached from fixed indices (n, m) and nu > 0:
// energies collapse onto the harmonic ladder sqrt(2 nu) (2m + 1) with gap
// 2 (m - n) sqrt(2 nu).
BoundaryPoint harmonic_boundary_point(int n, int m, double nu);

using CompletionPoint = std::variant<FrequencyPoint, BoundaryPoint>;

// Distance |dE_m|^{1/2} + |d(E_m - E_n)|^{1/2} + |dnu|^{1/4} + |dlambda|^{1/3}
// between points of the completed frequency set. Interior energies come
// from the mu-reduced eigensolve; boundary points carry their limits.
double frequency_distance(const CompletionPoint& p, const CompletionPoint& q,
                          const NumericsSpec& spec = {});

} // namespace engel
