// Uniform-grid second-order discretization of -c u'' + V(theta) u on [-L, L]
// with Dirichlet walls, for even potentials V, split by parity into two
// half-line problems on theta_j = j h (h = 2L/N, N even):
//   even sector: Neumann at 0, realized by a symmetrized first row
//                (off-diagonal -sqrt(2) c/h^2, eigenvector entry scaled back)
//   odd sector:  Dirichlet at 0
// Global index k maps to sector index k/2 with the parity of k; eigenvalues
// of a symmetric even potential interlace as even < odd < even < ... so the
// structural interleaving is also the ascending order.
#pragma once

#include <functional>
#include <vector>

namespace engel::detail {

struct WellDiscretization {
    double L;
    int N; // full-line interval count, even, >= 8
};

// Discrete eigenvalues 0..kmax. Bisection localizes each one to relative
// width max(rel_tol, 1e-9); a Rayleigh quotient of the inverse-iteration
// vector in gradient form then restores near machine precision, so the
// result does not degrade with the 1/h^2 matrix norm on fine grids.
std::vector<double> well_eigenvalues(const std::function<double(double)>& V,
                                     double c, const WellDiscretization& g,
                                     int kmax, double rel_tol = 1e-14);

struct WellMode {
    double energy;               // matrix eigenvalue on this grid
    std::vector<double> samples; // full grid, N+1 points, unit trapezoid norm
    double residual;             // relative eigensolver residual
};

WellMode well_mode(const std::function<double(double)>& V, double c,
                   const WellDiscretization& g, int k, double rel_tol = 1e-14);

} // namespace engel::detail
