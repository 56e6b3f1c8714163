// Shared numerical-accuracy knobs. A zero half_width or grid_size selects
// the automatic rule; explicit values are honored after validation.
//
// Automatic domain rule: L solves V(L) = 4*E_top, plus a decay margin,
// so eigenfunctions reach the boundary only through an exponentially
// small Agmon tail. Automatic grid rule: the step resolves the shortest
// local wavelength 2*pi/sqrt(E_top - min V) and the well width
// (2*mu)^{-1/4}, and is further capped so the two-grid Richardson
// discrepancy lands below eig_tol.
#pragma once

namespace engel {

struct NumericsSpec {
    double half_width = 0.0; // theta-domain truncation; 0 = automatic
    int grid_size = 0;       // full-line interval count; 0 = automatic, else >= 64
    double quad_tol = 1e-8;  // relative tolerance for adaptive quadratures
    double eig_tol = 1e-6;   // absolute gate on the eigenvalue error estimate
    int max_index = 8;       // largest eigenvalue index computed
};

} // namespace engel
