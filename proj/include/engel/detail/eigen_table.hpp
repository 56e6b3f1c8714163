// Interpolated eigenvalue surface E_m(mu) of the oscillator family, usable
// at any mu and hence at any frequency pair (nu, lambda) through
//   E_m(nu, lambda) = |lambda|^{2/3} E_m(nu |lambda|^{-4/3}).
// A table carries four charts per level:
//   inner     E_m sampled finely on [-inner_edge, inner_edge], where the
//             low levels bend fastest,
//   outer     E_m sampled coarsely on [-mu_edge, mu_edge],
//   deep_pos  G_m(h) = E_m(mu) / sqrt(mu) on h = mu^{-3/2} in [0, h_edge],
//             with the exact double-well limit G_m(0) = sqrt(2)(2 floor(m/2)+1),
//   deep_neg  H_m(w) = E_m(mu) / mu^2 on w = |mu|^{-3/2} in [0, h_edge],
//             with the exact single-well limit H_m(0) = 1.
// Both rescaled level functions extend smoothly to the endpoint, so the
// charts interpolate (never extrapolate) all the way to |mu| = infinity.
// Tables are built from sweep-mode solves and cached per level count.
#pragma once

#include <cmath>
#include <memory>
#include <utility>
#include <vector>

#include "engel/detail/interpolation.hpp"
#include "engel/errors.hpp"

namespace engel::detail {

class EigenTable {
  public:
    // Builds charts for levels 0..m_count. Solve cost grows with the level
    // count and with rel_tol, so shared instances come from eigen_table().
    EigenTable(int m_count, double rel_tol);

    int levels() const { return static_cast<int>(outer_.size()); }
    double mu_edge() const { return mu_edge_; }

    // E_m(mu) for any finite mu.
    double energy(int m, double mu) const;

    // |lambda|^{2/3} E_m(nu |lambda|^{-4/3}); lambda = 0 is rejected.
    double rescaled(int m, double nu, double lambda) const;

    // min over mu of E_0(mu), the floor of the whole eigenvalue surface.
    double ground_minimum() const { return ground_min_; }

    // Two-sided bounds {min, max} on E_m(mu) / sqrt(mu) over mu >= lo, read
    // off the tabulated samples and widened slightly for inter-sample
    // motion. Used to bracket mu-integral tails.
    std::pair<double, double> growth_bracket(int m, double lo) const;

    // Sum of fn(E_m(nu, lambda)) over m = 0..m_top, with the chart dispatch
    // hoisted out of the level loop. Same domain rules as rescaled().
    template <class Fn>
    double sum_over_levels(Fn&& fn, int m_top, double nu, double lambda) const {
        if (m_top < 0 || m_top >= levels())
            throw DomainError("eigenvalue index out of range");
        if (lambda == 0.0 || !std::isfinite(lambda) || !std::isfinite(nu))
            throw DomainError("lambda must be nonzero and the frequency finite");
        const double l2 = lambda * lambda;
        const std::vector<UniformCubic>* charts = nullptr;
        double coord = 0.0, scale = 1.0;
        if (nu > 0.0) {
            const double h = l2 / (nu * std::sqrt(nu));
            if (h <= h_edge_) {
                charts = &deep_pos_;
                coord = h;
                scale = std::sqrt(nu);
            }
        } else if (nu < 0.0) {
            const double w = l2 / (-nu * std::sqrt(-nu));
            if (w <= h_edge_) {
                charts = &deep_neg_;
                coord = w;
                scale = nu * nu / l2;
            }
        }
        if (charts == nullptr) {
            const double s = std::cbrt(l2);
            const double mu = nu / (s * s);
            charts = std::abs(mu) <= inner_edge_ ? &inner_ : &outer_;
            coord = mu;
            scale = s;
        }
        double acc = 0.0;
        for (int m = 0; m <= m_top; ++m) acc += fn(scale * (*charts)[m](coord));
        return acc;
    }

  private:
    double inner_edge_ = 0.0;
    double mu_edge_ = 0.0;
    double h_edge_ = 0.0;
    double ground_min_ = 0.0;
    std::vector<UniformCubic> inner_;
    std::vector<UniformCubic> outer_;
    std::vector<UniformCubic> deep_pos_;
    std::vector<UniformCubic> deep_neg_;
};

// Process-wide table covering at least levels 0..m_count; the request is
// rounded up a fixed ladder so distinct callers share instances.
const EigenTable& eigen_table(int m_count);

} // namespace engel::detail
