// Symmetric tridiagonal eigensolver: Sturm-sequence bisection for selected
// eigenvalues and inverse iteration for eigenvectors, after the classic
// EISPACK bisect/tinvit pair. Self-contained; no external linear algebra.
#pragma once

#include <utility>
#include <vector>

namespace engel::detail {

struct Tridiag {
    std::vector<double> d; // diagonal, size n
    std::vector<double> e; // off-diagonal, e[i] couples rows i-1 and i; e[0] unused

    std::size_t size() const { return d.size(); }
};

// Number of eigenvalues strictly below x (Sturm count via the LDL' pivots).
int count_below(const Tridiag& t, double x);

// Enclosing interval for the whole spectrum (Gershgorin discs).
std::pair<double, double> gershgorin(const Tridiag& t);

// k-th eigenvalue (ascending, 0-based) by bisection, refined to relative
// width rel_tol (default close to machine precision so that nearly equal
// matrices give nearly equal eigenvalues).
double eigenvalue(const Tridiag& t, int k, double rel_tol = 1e-14);

// Eigenvalues 0..kmax ascending; each bisection reuses the previous
// eigenvalue as a lower bound.
std::vector<double> eigenvalues_upto(const Tridiag& t, int kmax,
                                     double rel_tol = 1e-14);

// Inverse iteration at shift lambda (an accurate eigenvalue of t).
// Returns the eigenvector normalized in the discrete 2-norm and stores the
// relative residual ||T v - lambda v|| / ||T||_inf in *residual if nonnull.
std::vector<double> eigenvector(const Tridiag& t, double lambda,
                                double* residual = nullptr);

} // namespace engel::detail
