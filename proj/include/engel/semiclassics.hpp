// Semiclassical reference quantities for the oscillator family: phase-space
// volumes of model wells, the action of the symmetric double well, Weyl-law
// counting checks, and the small-h double-well spectrum
//   P_h = -h^2 d^2/dx^2 + (x^2/2 - 1)^2,
// which is unitarily equivalent to P_mu for mu > 0 through h = mu^{-3/2},
// E_k(mu) = mu^2 E_k(h).
#pragma once

#include <vector>

#include "engel/numerics.hpp"
#include "engel/oscillator.hpp"

namespace engel {

enum class WellKind {
    quartic,     // V(x) = x^4 / 4
    single_well, // V(x) = (x^2/2 + 1)^2, the mu -> -infinity normal form
    double_well, // V(x) = (x^2/2 - 1)^2, the mu -> +infinity normal form
};

struct WellSpec {
    WellKind kind = WellKind::quartic;
    double h = 1.0; // semiclassical parameter, must be positive
};

// Area of the phase-space region { xi^2 + V(x) <= level }, computed as
// Integral 2 sqrt(level - V) dx between turning points. Zero when the level
// does not reach above the bottom of the well. For the quartic well the
// area scales as level^{3/4} times the unit-level area 4.9441991394...
double phase_volume(const WellSpec& well, double level);

// Action of one well of the double-well potential at energy E in [0, 1):
// Phi(E) = (1/pi) Integral sqrt(E - V) dx across the right well, equal to
// the full two-well phase volume over 4 pi. Phi(0) = 0, Phi is strictly
// increasing, and Phi(E)/E -> 1/(2 sqrt(2)) as E -> 0.
double action_phi(double energy);

// dPhi/dE = (1/2 pi) Integral dx / sqrt(E - V) for E in (0, 1). The
// integral diverges logarithmically at the barrier top; close to it the
// tolerance is relaxed and *reduced_accuracy (when given) is set.
double action_phi_derivative(double energy, bool* reduced_accuracy = nullptr);

struct WeylCount {
    long long count = 0;     // eigenvalues E_k(mu) <= threshold
    double prediction = 0.0; // (2 pi)^{-1} threshold^{3/4} x unit quartic area
};

// Exact counting measure of P_mu against the leading Weyl term; their ratio
// tends to 1 as threshold grows. Throws DomainError when spec.max_index is
// too small to exhaust the counting window.
WeylCount weyl_count(double mu, double threshold, const NumericsSpec& spec = {});

// count{ E_k(mu) <= level mu^2 } divided by its deep-well prediction
// (2 pi)^{-1} |mu|^{3/2} phase_volume(single_well, level); tends to 1 as
// mu -> -infinity. Requires mu <= -5 and level > 1.
double single_well_check(double mu, double level, const NumericsSpec& spec = {});

struct DoubleWellPair {
    int index = 0;          // pair number, ground pair is 0
    double even = 0.0;      // symmetric member E_{2 index}(h)
    double odd = 0.0;       // antisymmetric member E_{2 index + 1}(h)
    double splitting = 0.0; // odd - even, the tunneling gap
};

// Lowest eigenvalue pairs of P_h up to pair index k_max. Levels come in
// near-degenerate parity pairs near (2k+1) sqrt(2) h with a splitting that
// is exponentially small in 1/h. Requires 0 < h <= 0.1.
std::vector<DoubleWellPair> double_well_pairs(double h, int k_max,
                                              const NumericsSpec& spec = {});

struct BohrLevel {
    int rank = 0; // index j within the parity family, counted from 0
    Parity family = Parity::even;
    double energy = 0.0;
    double residual = 0.0;  // Phi(energy) - (rank + 1/2) h
    bool ambiguous = false; // pair gap not small against h, pairing unsure
};

// Quantization residuals Phi(E) - (j + 1/2) h for every double-well level
// inside [window_lo, window_hi]; each residual is O(h^2) uniformly on
// windows bounded away from the barrier top, so window_hi < 1 is required.
// Levels pair across parity; a level whose gap to its partner reaches h/10
// is flagged ambiguous. A window below the ground pair yields an empty list.
std::vector<BohrLevel> bohr_sommerfeld_residuals(double h, double window_lo,
                                                 double window_hi,
                                                 const NumericsSpec& spec = {});

} // namespace engel
