#include "engel/spectral_sums.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "engel/detail/eigen_table.hpp"
#include "engel/detail/parallel.hpp"
#include "engel/detail/quadrature.hpp"
#include "engel/errors.hpp"

namespace engel {

namespace {

constexpr double kGamma = 3.5; // dual-sphere exponent 7/2
constexpr double kInf = std::numeric_limits<double>::infinity();

// Relative accuracy budget of the eigenvalue table, charged to every
// uncertainty interval the table feeds. The test suite validates it against
// direct solves at off-sample points.
constexpr double kTableBudget = 3e-4;

void validate_spec(const TruncationSpec& trunc) {
    if (trunc.m_max < 8) throw DomainError("m_max must be at least 8");
    const auto& grid = trunc.mu_grid;
    if (grid.nodes.empty() || grid.nodes.size() != grid.weights.size())
        throw DomainError("mu grid nodes and weights must be nonempty and match");
    if (!(grid.bound >= 10.0) || !std::isfinite(grid.bound))
        throw DomainError("mu grid bound must be at least 10");
    for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
        if (!std::isfinite(grid.nodes[i]) || std::abs(grid.nodes[i]) > grid.bound)
            throw DomainError("mu grid nodes must lie inside [-bound, bound]");
        if (!std::isfinite(grid.weights[i]))
            throw DomainError("mu grid weights must be finite");
    }
    if (!(trunc.rel_tol > 0.0) || !std::isfinite(trunc.rel_tol))
        throw DomainError("rel_tol must be positive");
    if (!(trunc.mu0 > 0.0) || !std::isfinite(trunc.mu0))
        throw DomainError("mu0 must be positive");
    if (!(trunc.epsilon > 0.0) || !std::isfinite(trunc.epsilon))
        throw DomainError("epsilon must be positive");
}

// E_m at every grid node for levels 0..m_max, node-major. The per-node
// evaluations run in parallel; every reduction over the result walks the
// nodes in their stored order, so sums do not depend on the thread count.
std::vector<std::vector<double>> node_energies(const detail::EigenTable& table,
                                               const MuQuadrature& grid, int m_max) {
    return detail::parallel_map(grid.nodes.size(), [&](std::size_t i) {
        std::vector<double> e(static_cast<std::size_t>(m_max) + 1);
        for (int m = 0; m <= m_max; ++m)
            e[static_cast<std::size_t>(m)] = table.energy(m, grid.nodes[i]);
        return e;
    });
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    LineFit fit;
    fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    fit.intercept = (sy - fit.slope * sx) / n;
    return fit;
}

// Least-squares slope of log density against log mu over the outer half
// [bound/2, bound] of the positive grid nodes, where the level sum has
// settled onto its power-law decay.
LineFit fit_positive_tail(const MuQuadrature& grid,
                          const std::vector<std::vector<double>>& energies,
                          double gamma, int m_max) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
        const double mu = grid.nodes[i];
        if (!(mu >= 0.5 * grid.bound)) continue;
        double density = 0.0;
        for (int m = 0; m <= m_max; ++m)
            density += std::pow(energies[i][static_cast<std::size_t>(m)], -gamma);
        if (!(density > 0.0) || !std::isfinite(density)) continue;
        lx.push_back(std::log(mu));
        ly.push_back(std::log(density));
    }
    if (lx.size() < 3)
        throw DomainError("mu grid has too few nodes in [bound/2, bound] for the tail fit");
    return fit_line(lx, ly);
}

} // namespace

MuQuadrature MuQuadrature::legendre(double bound, int panels) {
    if (!(bound > 0.0) || !std::isfinite(bound))
        throw DomainError("quadrature bound must be positive");
    if (panels < 1) throw DomainError("quadrature panel count must be positive");
    const detail::QuadRule& rule = detail::gauss_legendre(16);
    MuQuadrature grid;
    grid.bound = bound;
    grid.nodes.reserve(rule.x.size() * static_cast<std::size_t>(panels));
    grid.weights.reserve(grid.nodes.capacity());
    const double step = 2.0 * bound / panels;
    for (int p = 0; p < panels; ++p) {
        const double c = -bound + (p + 0.5) * step, s = 0.5 * step;
        for (std::size_t i = 0; i < rule.x.size(); ++i) {
            grid.nodes.push_back(c + s * rule.x[i]);
            grid.weights.push_back(s * rule.w[i]);
        }
    }
    return grid;
}

Summability summability_integral(double gamma, const TruncationSpec& trunc) {
    if (!(gamma > 0.0) || !std::isfinite(gamma))
        throw DomainError("gamma must be positive");
    validate_spec(trunc);
    const detail::EigenTable& table = detail::eigen_table(trunc.m_max);
    const int m_max = trunc.m_max;
    const auto energies = node_energies(table, trunc.mu_grid, m_max);
    const auto& nodes = trunc.mu_grid.nodes;
    const auto& weights = trunc.mu_grid.weights;

    Summability out;
    RegimeReport& report = out.report;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double mu = nodes[i];
        double term = 0.0, bottom = 0.0;
        for (int m = 0; m <= m_max; ++m) {
            const double e = energies[i][static_cast<std::size_t>(m)];
            const double contribution = std::pow(e, -gamma);
            term += contribution;
            if (mu > trunc.mu0 && e <= trunc.epsilon * mu * mu) bottom += contribution;
        }
        term *= weights[i];
        bottom *= weights[i];
        if (mu < -trunc.mu0) {
            report.negative += term;
        } else if (mu > trunc.mu0) {
            report.positive += term;
            report.positive_bottom += bottom;
        } else {
            report.central += term;
        }
    }
    out.partial_value = report.central + report.negative + report.positive;

    const LineFit fit = fit_positive_tail(trunc.mu_grid, energies, gamma, m_max);
    report.tail_exponent = fit.slope;
    report.tail_converging = fit.slope < -1.0;
    return out;
}

SphereConstant sphere_constant(const TruncationSpec& trunc) {
    validate_spec(trunc);
    const int m_max = trunc.m_max;
    const detail::EigenTable& table = detail::eigen_table(m_max);
    const auto energies = node_energies(table, trunc.mu_grid, m_max);
    const auto& nodes = trunc.mu_grid.nodes;
    const auto& weights = trunc.mu_grid.weights;
    const double bound = trunc.mu_grid.bound;

    // Per-level integrals I_m over [-bound, bound], summed over ascending m.
    std::vector<double> level(static_cast<std::size_t>(m_max) + 1, 0.0);
    for (std::size_t i = 0; i < nodes.size(); ++i)
        for (int m = 0; m <= m_max; ++m)
            level[static_cast<std::size_t>(m)] +=
                weights[i] * std::pow(energies[i][static_cast<std::size_t>(m)], -kGamma);
    double partial = 0.0;
    for (int m = 0; m <= m_max; ++m) partial += level[static_cast<std::size_t>(m)];

    // mu > bound remainder. On that range E_m(mu) = sqrt(mu) g_m(mu) with
    // g_m confined to a narrow bracket, so the remainder of each level sits
    // between two explicit integrals and the midpoint carries a rigorous
    // half-width.
    double tail_pos_lo = 0.0, tail_pos_hi = 0.0;
    const double mu_factor = std::pow(bound, 1.0 - kGamma / 2.0) / (kGamma / 2.0 - 1.0);
    for (int m = 0; m <= m_max; ++m) {
        const auto bracket = table.growth_bracket(m, bound);
        tail_pos_hi += std::pow(bracket.first, -kGamma) * mu_factor;
        tail_pos_lo += std::pow(bracket.second, -kGamma) * mu_factor;
    }
    const double tail_pos = 0.5 * (tail_pos_lo + tail_pos_hi);
    const double tail_pos_unc = 0.5 * (tail_pos_hi - tail_pos_lo);

    // m > m_max remainder: the level integrals decay like a power of the
    // level index, with an even-odd wobble that cancels in sums over level
    // pairs J_j = I_{2j} + I_{2j+1}. Fit the last few complete pairs, extend
    // the fit numerically, and close with an integral remainder.
    double tail_m = kInf;
    {
        const int pairs = (m_max + 1) / 2;
        std::vector<double> lx, ly;
        for (int j = std::max(0, pairs - 6); j < pairs; ++j) {
            const double J = level[static_cast<std::size_t>(2 * j)] +
                             level[static_cast<std::size_t>(2 * j + 1)];
            lx.push_back(std::log(j + 1.0));
            ly.push_back(std::log(J));
        }
        const LineFit fit = fit_line(lx, ly);
        if (fit.slope < -1.05) {
            double sum = (m_max % 2 == 0) ? level[static_cast<std::size_t>(m_max)] : 0.0;
            const int j0 = m_max / 2 + 1;
            for (int j = j0; j < j0 + 600; ++j)
                sum += std::exp(fit.intercept + fit.slope * std::log(j + 1.0));
            sum += std::exp(fit.intercept) *
                   std::pow(j0 + 600.0, fit.slope + 1.0) / (-fit.slope - 1.0);
            tail_m = sum;
        }
    }

    SphereConstant out;
    out.partial = 3.0 * partial;
    out.tail_positive = 3.0 * tail_pos;
    out.tail_levels = 3.0 * tail_m;
    out.negative_bound = 3.0 * (m_max + 1) * std::pow(bound, -6.0) / 6.0;

    const double budget = kTableBudget * out.partial;
    const double fitted = out.tail_positive + out.tail_levels;
    if (trunc.tail_mode == TailMode::extrapolate) {
        out.value = out.partial + fitted;
        const double unc = 3.0 * tail_pos_unc + 0.5 * out.tail_levels + budget;
        out.lower = out.value - unc;
        out.upper = out.value + unc + out.negative_bound;
    } else {
        out.value = out.partial;
        out.lower = out.value - budget;
        out.upper = out.value + fitted + 3.0 * tail_pos_unc + 0.5 * out.tail_levels +
                    out.negative_bound + budget;
    }
    const double width = (out.upper - out.lower) / out.value;
    if (!(width <= trunc.rel_tol))
        throw ConvergenceError("sphere constant uncertainty exceeds the requested tolerance",
                               width, trunc.rel_tol);
    return out;
}

// ---------------------------------------------------------------------------
// Radial profiles

RadialProfile RadialProfile::exponential(double rate, int power) {
    if (!(rate > 0.0) || !std::isfinite(rate))
        throw DomainError("exponential profile rate must be positive");
    if (power < 0) throw DomainError("exponential profile power must be nonnegative");
    RadialProfile profile;
    profile.kind_ = Kind::exponential;
    profile.rate_ = rate;
    profile.power_ = power;
    profile.weighted_norm_ =
        std::tgamma(kGamma + power) * std::pow(rate, -(kGamma + power));
    return profile;
}

RadialProfile RadialProfile::power_cutoff(double exponent, double cutoff) {
    if (!(cutoff > 0.0) || !std::isfinite(cutoff))
        throw DomainError("power profile cutoff must be positive");
    if (!(exponent < kGamma) || !std::isfinite(exponent))
        throw DomainError("power profile is not integrable against the r^{5/2} weight");
    RadialProfile profile;
    profile.kind_ = Kind::power_cutoff;
    profile.exponent_ = exponent;
    profile.cutoff_ = cutoff;
    profile.weighted_norm_ = std::pow(cutoff, kGamma - exponent) / (kGamma - exponent);
    return profile;
}

RadialProfile RadialProfile::tabulated(std::vector<double> r, std::vector<double> f) {
    if (r.size() != f.size() || r.size() < 2)
        throw DomainError("tabulated profile needs matching arrays with at least two rows");
    if (!(r.front() > 0.0))
        throw DomainError("tabulated profile radii must be positive");
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (!std::isfinite(r[i]) || !std::isfinite(f[i]))
            throw DomainError("tabulated profile entries must be finite");
        if (i > 0 && !(r[i] > r[i - 1]))
            throw DomainError("tabulated profile radii must be strictly increasing");
    }
    RadialProfile profile;
    profile.kind_ = Kind::tabulated;
    profile.r_ = std::move(r);
    profile.f_ = std::move(f);
    double norm = 0.0;
    for (std::size_t i = 0; i + 1 < profile.r_.size(); ++i) {
        const double r0 = profile.r_[i], r1 = profile.r_[i + 1];
        const double f0 = profile.f_[i], f1 = profile.f_[i + 1];
        const auto integrand = [&](double x) {
            return std::pow(x, 2.5) * std::abs(profile(x));
        };
        // split at a sign change so each piece is smooth
        if (f0 != 0.0 && f1 != 0.0 && (f0 > 0.0) != (f1 > 0.0)) {
            const double rc = r0 + (r1 - r0) * f0 / (f0 - f1);
            norm += detail::gauss_panel(integrand, r0, rc, 8);
            norm += detail::gauss_panel(integrand, rc, r1, 8);
        } else {
            norm += detail::gauss_panel(integrand, r0, r1, 8);
        }
    }
    profile.weighted_norm_ = norm;
    return profile;
}

double RadialProfile::operator()(double r) const {
    switch (kind_) {
    case Kind::exponential:
        if (r < 0.0) return 0.0;
        return std::pow(r, power_) * std::exp(-rate_ * r);
    case Kind::power_cutoff:
        if (r <= 0.0 || r > cutoff_) return 0.0;
        return std::pow(r, -exponent_);
    case Kind::tabulated: {
        if (r < r_.front() || r > r_.back()) return 0.0;
        const auto it = std::upper_bound(r_.begin(), r_.end(), r);
        std::size_t i = static_cast<std::size_t>(it - r_.begin());
        i = std::min(std::max<std::size_t>(i, 1), r_.size() - 1) - 1;
        const double t = (r - r_[i]) / (r_[i + 1] - r_[i]);
        return f_[i] + t * (f_[i + 1] - f_[i]);
    }
    }
    return 0.0;
}

double RadialProfile::weighted_integral() const {
    switch (kind_) {
    case Kind::exponential:
    case Kind::power_cutoff:
        // nonnegative families, so the signed integral equals the norm
        return weighted_norm_;
    case Kind::tabulated: {
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < r_.size(); ++i)
            acc += detail::integrate_refining(
                       [&](double x) { return std::pow(x, 2.5) * (*this)(x); },
                       r_[i], r_[i + 1], 1e-12)
                       .value;
        return acc;
    }
    }
    return 0.0;
}

double RadialProfile::support_bound(double threshold) const {
    if (!(threshold > 0.0) || !std::isfinite(threshold))
        throw DomainError("support threshold must be positive");
    switch (kind_) {
    case Kind::power_cutoff:
        return cutoff_;
    case Kind::tabulated:
        return r_.back();
    case Kind::exponential:
        break;
    }
    // beyond the peak at r = power / rate the profile decreases
    double lo = std::max(1.0, power_ / rate_);
    if ((*this)(lo) <= threshold) return lo;
    double hi = lo;
    int guard = 0;
    while ((*this)(hi) > threshold) {
        hi *= 1.5;
        if (++guard > 400)
            throw ConvergenceError("profile does not decay below the threshold",
                                   (*this)(hi), threshold);
    }
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        ((*this)(mid) > threshold ? lo : hi) = mid;
    }
    return hi;
}

// ---------------------------------------------------------------------------
// Magic formula, left side

namespace {

constexpr int kGaussOrder = 12;
constexpr int kLambdaPanels = 24;
constexpr int kNuPanelsNeg = 16;
constexpr int kNuPanelsPos = 24;

// Cubically graded panel edges on [0, extent]: fine near zero where the
// integrand varies fastest, wide toward the edge where it decays.
std::vector<double> graded_edges(double extent, int panels) {
    std::vector<double> edges(static_cast<std::size_t>(panels) + 1);
    for (int k = 0; k <= panels; ++k) {
        const double t = static_cast<double>(k) / panels;
        edges[static_cast<std::size_t>(k)] = extent * t * t * t;
    }
    return edges;
}

// Smallest positive extent beyond which the ground level clears r_cut, so
// every profile evaluation outside it sees a negligible argument. dir = -1
// probes the nu < 0 side, where the ground level grows monotonically.
double clearing_extent(const detail::EigenTable& table, double lambda, double r_cut,
                       int dir) {
    const double nu_pocket = std::pow(lambda, 4.0 / 3.0);
    double lo = 0.0;
    bool seeded = dir < 0;
    if (dir > 0) {
        // seed inside the pocket where the ground level is smallest
        for (double q : {1.0, 0.5, 2.0, 0.25, 4.0}) {
            if (table.rescaled(0, nu_pocket * q, lambda) < r_cut) {
                lo = nu_pocket * q;
                seeded = true;
                break;
            }
        }
    }
    double hi = std::max({1.0, lo, nu_pocket});
    int guard = 0;
    while (table.rescaled(0, dir * hi, lambda) < r_cut) {
        hi *= 2.0;
        if (++guard > 200)
            throw ConvergenceError("eigenvalues never clear the profile support",
                                   table.rescaled(0, dir * hi, lambda), r_cut);
    }
    if (!seeded) return hi;
    for (int it = 0; it < 48; ++it) {
        const double mid = 0.5 * (lo + hi);
        (table.rescaled(0, dir * mid, lambda) < r_cut ? lo : hi) = mid;
    }
    return hi;
}

struct RowResult {
    double value = 0.0;
    double extent_neg = 0.0, extent_pos = 0.0;
    // |mass| of the outermost panel on each side and of its neighbor
    double neg_outer = 0.0, neg_inner = 0.0;
    double pos_outer = 0.0, pos_inner = 0.0;
};

RowResult integrate_row(const detail::EigenTable& table, const RadialProfile& profile,
                        int m_max, double lambda, double r_cut, int n_neg, int n_pos) {
    RowResult row;
    row.extent_neg = clearing_extent(table, lambda, r_cut, -1);
    row.extent_pos = clearing_extent(table, lambda, r_cut, +1);
    const auto f = [&](double nu) {
        return table.sum_over_levels([&](double e) { return profile(e); }, m_max, nu,
                                     lambda);
    };
    const auto neg = graded_edges(row.extent_neg, n_neg);
    for (int k = n_neg; k >= 1; --k) {
        const double mass = detail::gauss_panel(f, -neg[static_cast<std::size_t>(k)],
                                                -neg[static_cast<std::size_t>(k - 1)],
                                                kGaussOrder);
        row.value += mass;
        if (k == n_neg) row.neg_outer = std::abs(mass);
        if (k == n_neg - 1) row.neg_inner = std::abs(mass);
    }
    const auto pos = graded_edges(row.extent_pos, n_pos);
    for (int k = 0; k < n_pos; ++k) {
        const double mass = detail::gauss_panel(f, pos[static_cast<std::size_t>(k)],
                                                pos[static_cast<std::size_t>(k + 1)],
                                                kGaussOrder);
        row.value += mass;
        if (k == n_pos - 2) row.pos_inner = std::abs(mass);
        if (k == n_pos - 1) row.pos_outer = std::abs(mass);
    }
    return row;
}

struct MagicPass {
    double half = 0.0; // lambda > 0 half of the plane
    double tail = 0.0; // half-plane outside-mass estimate, inf when uncertified
    double nu_low = 0.0, nu_high = 0.0, lambda_span = 0.0;
};

// One half-plane sweep at the given resolution multiple. Panels run in
// parallel; all reductions walk them in fixed ascending order.
MagicPass run_pass(const detail::EigenTable& table, const RadialProfile& profile,
                   int m_max, double r_cut, int res) {
    MagicPass pass;
    pass.lambda_span = std::pow(r_cut / table.ground_minimum(), 1.5);
    const int n_lambda = kLambdaPanels * res;
    const int n_neg = kNuPanelsNeg * res;
    const int n_pos = kNuPanelsPos * res;
    const auto lam = graded_edges(pass.lambda_span, n_lambda);
    const detail::QuadRule& rule = detail::gauss_legendre(kGaussOrder);

    struct PanelAccum {
        double sum = 0.0;
        double neg_outer = 0.0, neg_inner = 0.0;
        double pos_outer = 0.0, pos_inner = 0.0;
        double extent_neg = 0.0, extent_pos = 0.0;
        std::vector<std::pair<double, double>> rows; // (lambda, row value)
    };
    auto panels = detail::parallel_map(
        static_cast<std::size_t>(n_lambda), [&](std::size_t p) {
            PanelAccum acc;
            const double a = lam[p], b = lam[p + 1];
            const double c = 0.5 * (a + b), s = 0.5 * (b - a);
            for (std::size_t i = 0; i < rule.x.size(); ++i) {
                const double lambda = c + s * rule.x[i];
                const double w = s * rule.w[i];
                const RowResult row = integrate_row(table, profile, m_max, lambda,
                                                    r_cut, n_neg, n_pos);
                acc.sum += w * row.value;
                acc.neg_outer += w * row.neg_outer;
                acc.neg_inner += w * row.neg_inner;
                acc.pos_outer += w * row.pos_outer;
                acc.pos_inner += w * row.pos_inner;
                acc.extent_neg = std::max(acc.extent_neg, row.extent_neg);
                acc.extent_pos = std::max(acc.extent_pos, row.extent_pos);
                if (p + 1 == static_cast<std::size_t>(n_lambda))
                    acc.rows.emplace_back(lambda, row.value);
            }
            return acc;
        });

    double neg_outer = 0.0, neg_inner = 0.0, pos_outer = 0.0, pos_inner = 0.0;
    std::vector<std::pair<double, double>> last_rows;
    for (const PanelAccum& acc : panels) {
        pass.half += acc.sum;
        neg_outer += acc.neg_outer;
        neg_inner += acc.neg_inner;
        pos_outer += acc.pos_outer;
        pos_inner += acc.pos_inner;
        pass.nu_low = std::min(pass.nu_low, -acc.extent_neg);
        pass.nu_high = std::max(pass.nu_high, acc.extent_pos);
        if (!acc.rows.empty()) last_rows = acc.rows;
    }

    // Certify what lies outside the window. Each nu edge continues as a
    // geometric series with the measured panel-to-panel decay; the lambda
    // edge continues exponentially with the decay read from the two
    // outermost rows. A non-decaying edge leaves the pass uncertified.
    double tail = 0.0;
    const auto edge_tail = [&tail](double outer, double inner) {
        if (outer == 0.0) return;
        const double ratio = outer / inner;
        if (!(ratio < 0.8)) {
            tail = kInf;
            return;
        }
        tail += outer * ratio / (1.0 - ratio);
    };
    edge_tail(neg_outer, neg_inner);
    edge_tail(pos_outer, pos_inner);
    std::sort(last_rows.begin(), last_rows.end());
    const double r_far = std::abs(last_rows.back().second);
    const double r_near = std::abs(last_rows[last_rows.size() - 2].second);
    if (r_far != 0.0) {
        if (r_near <= r_far) {
            tail = kInf;
        } else {
            const double kappa = std::log(r_near / r_far) /
                                 (last_rows.back().first -
                                  last_rows[last_rows.size() - 2].first);
            tail += r_far / kappa;
        }
    }
    pass.tail = tail;
    return pass;
}

} // namespace

double magic_lhs(const RadialProfile& profile, const TruncationSpec& trunc,
                 MagicDetail* detail_out) {
    validate_spec(trunc);
    const detail::EigenTable& table = detail::eigen_table(trunc.m_max);

    // magnitude scale for the edge-smallness threshold
    double scale = 0.0;
    for (int k = -60; k <= 60; ++k)
        scale = std::max(scale, std::abs(profile(std::pow(10.0, 0.1 * k))));
    if (scale == 0.0) scale = profile.weighted_norm();
    if (scale == 0.0) {
        if (detail_out) *detail_out = MagicDetail{};
        return 0.0;
    }

    double r_cut =
        std::max(1.0, profile.support_bound(std::max(1e-9, 1e-3 * trunc.rel_tol) * scale));
    int res = 1;
    MagicPass pass = run_pass(table, profile, trunc.m_max, r_cut, res);
    double previous = 0.0;
    bool have_previous = false;
    double achieved = kInf;
    for (int round = 0; round < 8; ++round) {
        const double value = 2.0 * pass.half;
        const double tail = 2.0 * pass.tail;
        const double tol = trunc.rel_tol * std::abs(value);
        if (!std::isfinite(tail) || tail > 0.5 * tol) {
            // window too small for the requested accuracy
            r_cut *= 1.6;
            pass = run_pass(table, profile, trunc.m_max, r_cut, res);
            have_previous = false;
            continue;
        }
        if (have_previous) {
            const double quad_err = std::abs(value - previous);
            achieved = (quad_err + tail) / std::abs(value);
            if (quad_err + tail <= tol) {
                if (detail_out) {
                    detail_out->lambda_half = pass.half;
                    detail_out->tail_estimate = tail;
                    detail_out->nu_low = pass.nu_low;
                    detail_out->nu_high = pass.nu_high;
                    detail_out->lambda_span = pass.lambda_span;
                }
                return value;
            }
        }
        if (res >= 4) break;
        previous = value;
        have_previous = true;
        res *= 2;
        pass = run_pass(table, profile, trunc.m_max, r_cut, res);
    }
    throw ConvergenceError("magic formula quadrature did not reach the tolerance",
                           achieved, trunc.rel_tol);
}

double magic_rhs(const RadialProfile& profile, const SphereConstant& sphere) {
    return sphere.value * profile.weighted_integral();
}

double magic_rhs(const RadialProfile& profile, const TruncationSpec& trunc) {
    return magic_rhs(profile, sphere_constant(trunc));
}

double heat_trace_density(double t, const SphereConstant& sphere) {
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("time must be positive");
    const double pi = std::acos(-1.0);
    return std::pow(2.0 * pi, -3.0) * sphere.value * std::tgamma(kGamma) *
           std::pow(t, -kGamma);
}

double heat_trace_density(double t, const TruncationSpec& trunc) {
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("time must be positive");
    return heat_trace_density(t, sphere_constant(trunc));
}

} // namespace engel
