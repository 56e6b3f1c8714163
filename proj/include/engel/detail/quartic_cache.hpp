// Shared spectral tables for the one-parameter oscillator family
//   P_mu = -d^2/dtheta^2 + (theta^2/2 - mu)^2.
// A table holds Richardson-extrapolated energies for levels 0..kmax on an
// automatically sized grid, plus lazily materialized eigenfunction samples
// on the fine grid. Tables are cached process-wide; the requested level
// count is rounded up to a fixed ladder so that the grid resolved for a
// given request never depends on what other callers put in the cache.
#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "engel/detail/interpolation.hpp"
#include "engel/detail/well.hpp"
#include "engel/numerics.hpp"

namespace engel::detail {

struct SpectrumData {
    double mu = 0.0;
    double L = 0.0;
    int n_base = 0; // base grid intervals; the fine grid has 2*n_base
    std::vector<double> e_base;
    std::vector<double> e_fine;
    std::vector<double> e_rich; // (4*e_fine - e_base)/3
    std::vector<double> est;    // |e_fine - e_base|/3 per level

    double h_fine() const { return L / n_base; }
    int levels() const { return static_cast<int>(e_rich.size()); }

    // Eigenfunction samples on the fine grid, computed on first use.
    const WellMode& mode(int k) const;
    // Cubic interpolant over the samples of level k.
    UniformCubic interpolant(int k) const;
    // Mass the level-k eigenfunction would carry beyond the Dirichlet wall:
    // the wall slope matched to the decaying exponential exp(-kappa theta)
    // with kappa^2 = V(L) - E_k, or 1 when the wall sits inside the
    // classically allowed region.
    double boundary_mass(int k) const;

  private:
    mutable std::mutex mode_mutex_;
    mutable std::map<int, WellMode> modes_;
};

// Table for P_mu covering at least levels 0..kmax, honoring the grid and
// tolerance knobs of spec. Throws ConvergenceError when the tolerance is
// unreachable within the retry budget and TruncationError when a caller
// supplied half_width leaves visible boundary mass.
std::shared_ptr<const SpectrumData>
quartic_spectrum(double mu, int kmax, const NumericsSpec& spec);

// Cheaper sizing for wide parameter sweeps: the grid targets a relative
// error of the Richardson value itself instead of gating on the two-grid
// discrepancy, which delivers the same accuracy at a fraction of the cost.
std::shared_ptr<const SpectrumData>
quartic_sweep_spectrum(double mu, int kmax, double rel_tol = 3e-7);

} // namespace engel::detail
