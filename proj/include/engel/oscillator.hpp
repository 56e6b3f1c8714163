// Eigenvalue problem for the quartic oscillator family
//   P_mu = -d^2/dtheta^2 + (theta^2/2 - mu)^2   on L^2(R).
// The spectrum is simple and positive; the m-th eigenfunction has the
// parity of m and exactly m real zeros. The two-parameter family
//   P_{nu,lambda} = -d^2/dtheta^2 + ((lambda/2) theta^2 - nu/lambda)^2
// reduces to P_mu with mu = nu/|lambda|^{4/3} by the unitary rescaling
// theta -> |lambda|^{1/3} theta, under which energies pick up a factor
// |lambda|^{2/3} and eigenfunctions the L^2-invariant factor |lambda|^{1/6}.
#pragma once

#include <vector>

#include "engel/numerics.hpp"

namespace engel {

enum class Parity { even, odd };

struct EigenPair {
    int index = 0;
    double energy = 0.0;
    std::vector<double> samples; // theta_j = -half_width + j*step
    double half_width = 0.0;
    double step = 0.0;
    Parity parity = Parity::even;
    double est_error = 0.0;
};

struct RescaledFrequency {
    double nu = 0.0;
    double lambda = 0.0;
    double mu = 0.0; // nu / |lambda|^{4/3}
};

// Packs (nu, lambda) with the reduced parameter; lambda must be nonzero.
RescaledFrequency rescaled_frequency(double nu, double lambda);

// Energies E_0(mu) < ... < E_{max_index}(mu), each converged so that the
// two-grid Richardson discrepancy is below spec.eig_tol.
std::vector<double> eigenvalues(double mu, const NumericsSpec& spec = {});

// Level m of P_mu with unit trapezoid L^2 norm; sign fixed by phi(0) > 0
// for even m and phi'(0) > 0 for odd m.
EigenPair eigenfunction(double mu, int m, const NumericsSpec& spec = {});

// E_m(nu, lambda) = |lambda|^{2/3} E_m(mu).
double rescaled_energy(const RescaledFrequency& f, int m,
                       const NumericsSpec& spec = {});

// psi_m^{nu,lambda}(theta) = |lambda|^{1/6} phi_m^mu(|lambda|^{1/3} theta),
// evaluated by cubic interpolation of the tabulated eigenfunction. Points
// with |lambda|^{1/3} |theta| beyond the table are an extrapolation error.
double rescaled_eigenfunction(const RescaledFrequency& f, int m, double theta,
                              const NumericsSpec& spec = {});

// Energies of P_{nu,lambda} discretized directly in the unscaled variable,
// without the mu reduction. Agrees with rescaled_energy up to combined
// discretization error; kept as an independent cross-check path.
std::vector<double> direct_rescaled_eigenvalues(double nu, double lambda,
                                                const NumericsSpec& spec = {});

} // namespace engel
