#include "engel/frequency.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <numbers>
#include <utility>
#include <vector>

#include "engel/detail/interpolation.hpp"
#include "engel/detail/quadrature.hpp"
#include "engel/detail/quartic_cache.hpp"
#include "engel/errors.hpp"
#include "engel/oscillator.hpp"

namespace engel {

namespace {

using std::complex;

constexpr complex<double> kI{0.0, 1.0};
constexpr double kPi = std::numbers::pi;
// (2 pi)^{-3}, the normalization paired with the dnu dlambda measure
const double kPlancherelNorm = 1.0 / std::pow(2.0 * kPi, 3);

// Node budget for a single oscillatory quadrature pass. Eight nodes per
// local wavelength at this budget resolves phases up to roughly 1e5
// oscillations across the eigenfunction support.
constexpr std::size_t kNodeBudget = 3'000'000;

// Neglecting a factor bounded by e^{-kEnvCut} relative to the envelope
// peak keeps truncation at the rounding floor.
constexpr double kEnvCut = 36.0;

void check_element(const GroupElement& x) {
    if (!std::isfinite(x.x1) || !std::isfinite(x.x2) || !std::isfinite(x.x3) ||
        !std::isfinite(x.x4))
        throw DomainError("group element components must be finite");
}

void check_point(const FrequencyPoint& p) {
    if (p.n < 0 || p.m < 0)
        throw DomainError("oscillator indices must be nonnegative");
    if (!std::isfinite(p.nu) || !std::isfinite(p.lambda))
        throw DomainError("frequency coordinates must be finite");
    if (p.lambda == 0.0)
        throw DomainError("lambda must be nonzero; lambda = 0 belongs to the "
                          "completion boundary");
}

// Eigenfunction table of P_mu in the scaled variable xi = |lambda|^{1/3}
// theta, shared by every (nu, lambda) with the same mu.
struct LevelTable {
    std::shared_ptr<const detail::SpectrumData> data;
    std::vector<detail::UniformCubic> psi;
    double mu = 0.0;
    double L = 0.0;
};

LevelTable make_table(std::shared_ptr<const detail::SpectrumData> data,
                      double mu, int top) {
    LevelTable tab;
    tab.data = std::move(data);
    tab.mu = mu;
    tab.L = tab.data->L;
    tab.psi.reserve(static_cast<std::size_t>(top) + 1);
    for (int k = 0; k <= top; ++k) tab.psi.push_back(tab.data->interpolant(k));
    return tab;
}

LevelTable level_table(double mu, int top, const NumericsSpec& spec) {
    return make_table(detail::quartic_spectrum(mu, top, spec), mu, top);
}

LevelTable level_table_sweep(double mu, int top, double rel_tol) {
    return make_table(detail::quartic_sweep_spectrum(mu, top, rel_tol), mu, top);
}

// Highest local wavenumber of the tabulated eigenfunctions: sqrt(E - Vmin)
// in the scaled variable, with Vmin the potential minimum.
double eigen_wavenumber(const LevelTable& tab, int top) {
    const double etop = tab.data->e_rich[static_cast<std::size_t>(top)];
    const double vmin = tab.mu > 0.0 ? 0.0 : tab.mu * tab.mu;
    return std::sqrt(std::max(etop - vmin, 1.0));
}

struct NodeSet {
    std::vector<double> x;
    std::vector<double> w;
};

// Composite 8-point Gauss panels over the union of [lo1, hi1] and an
// optional second interval, sized for `freq` radians per unit length with
// at least eight nodes per wavelength.
void append_panels(NodeSet& g, double lo, double hi, double freq,
                   double density) {
    if (!(hi > lo)) return;
    const double range = hi - lo;
    const double per_unit = freq * 8.0 / (2.0 * kPi);
    double wanted = (range * per_unit + 24.0) * density;
    const int panels = static_cast<int>(std::ceil(wanted / 8.0));
    const detail::QuadRule& rule = detail::gauss_legendre(8);
    const double step = range / panels;
    for (int p = 0; p < panels; ++p) {
        const double c = lo + (p + 0.5) * step, s = 0.5 * step;
        for (std::size_t i = 0; i < rule.x.size(); ++i) {
            g.x.push_back(c + s * rule.x[i]);
            g.w.push_back(s * rule.w[i]);
        }
    }
}

void check_budget(std::size_t have, const char* what) {
    if (have > kNodeBudget)
        throw ConvergenceError(std::string(what) +
                                   " needs more oscillatory quadrature nodes "
                                   "than the budget allows",
                               static_cast<double>(have),
                               static_cast<double>(kNodeBudget));
}

// ---------------------------------------------------------------------------
// W matrix elements

// Shared quadrature state for the matrix elements at one (nu, lambda, x):
// node set over the support overlap, phase factors, and the phase of the
// central prefactor.
struct WState {
    NodeSet g;
    std::vector<complex<double>> phase; // node weight times carrier phase
    complex<double> pref{1.0, 0.0};
    double shift = 0.0; // support shift s x1 in the scaled variable
};

WState w_state(const LevelTable& tab, double nu, double lambda,
               const GroupElement& x, int top, double density) {
    const double s = std::cbrt(std::abs(lambda));
    const double sgn = lambda > 0.0 ? 1.0 : -1.0;
    const double L = tab.L;

    WState st;
    st.shift = s * x.x1;
    const double lo = std::max(-L, -L - st.shift);
    const double hi = std::min(L, L - st.shift);
    if (!(hi > lo)) return st; // supports do not overlap

    // phase lambda (theta x3 + theta^2 x2 / 2) in the scaled variable
    const double c3 = sgn * s * s * x.x3;
    const double c2 = sgn * s * x.x2 * 0.5;
    const double freq =
        eigen_wavenumber(tab, top) + std::abs(c3) + std::abs(c2) * 2.0 * L;
    append_panels(st.g, lo, hi, freq, density);
    check_budget(st.g.x.size(), "w element");

    st.phase.resize(st.g.x.size());
    for (std::size_t i = 0; i < st.g.x.size(); ++i) {
        const double xi = st.g.x[i];
        st.phase[i] = st.g.w[i] * std::polar(1.0, xi * (c3 + c2 * xi));
    }
    st.pref = std::polar(1.0, lambda * x.x4 - (nu / lambda) * x.x2);
    return st;
}

// Entries (n, m) for n in rows, m in cols. Layout: out[r * cols.size() + c].
std::vector<complex<double>>
w_entries(const LevelTable& tab, double nu, double lambda, const GroupElement& x,
          const std::vector<int>& rows, const std::vector<int>& cols,
          double density) {
    int top = 0;
    for (int r : rows) top = std::max(top, r);
    for (int c : cols) top = std::max(top, c);
    const WState st = w_state(tab, nu, lambda, x, top, density);
    std::vector<complex<double>> out(rows.size() * cols.size(),
                                     complex<double>(0.0, 0.0));
    const std::size_t nq = st.g.x.size();
    if (nq == 0) return out;

    std::vector<std::vector<double>> at(rows.size(), std::vector<double>(nq));
    std::vector<std::vector<double>> shifted(cols.size(), std::vector<double>(nq));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t i = 0; i < nq; ++i)
            at[r][i] = tab.psi[static_cast<std::size_t>(rows[r])].eval_or_zero(st.g.x[i]);
    for (std::size_t c = 0; c < cols.size(); ++c)
        for (std::size_t i = 0; i < nq; ++i)
            shifted[c][i] = tab.psi[static_cast<std::size_t>(cols[c])].eval_or_zero(
                st.g.x[i] + st.shift);

    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < cols.size(); ++c) {
            complex<double> acc{0.0, 0.0};
            const double* a = at[r].data();
            const double* b = shifted[c].data();
            for (std::size_t i = 0; i < nq; ++i) acc += st.phase[i] * (a[i] * b[i]);
            out[r * cols.size() + c] = st.pref * acc;
        }
    return out;
}

// Diagonal entries W((m,m,nu,lambda), x) for m <= top; the heat kernel
// needs nothing else, and the diagonal costs one row scan per level.
std::vector<complex<double>> w_diagonal(const LevelTable& tab, double nu,
                                        double lambda, const GroupElement& x,
                                        int top, double density) {
    const WState st = w_state(tab, nu, lambda, x, top, density);
    std::vector<complex<double>> out(static_cast<std::size_t>(top) + 1,
                                     complex<double>(0.0, 0.0));
    const std::size_t nq = st.g.x.size();
    if (nq == 0) return out;
    const bool no_shift = st.shift == 0.0;
    std::vector<double> at(nq), shifted;
    if (!no_shift) shifted.resize(nq);
    for (int m = 0; m <= top; ++m) {
        const auto& psi = tab.psi[static_cast<std::size_t>(m)];
        for (std::size_t i = 0; i < nq; ++i) at[i] = psi.eval_or_zero(st.g.x[i]);
        const double* b = at.data();
        if (!no_shift) {
            for (std::size_t i = 0; i < nq; ++i)
                shifted[i] = psi.eval_or_zero(st.g.x[i] + st.shift);
            b = shifted.data();
        }
        complex<double> acc{0.0, 0.0};
        for (std::size_t i = 0; i < nq; ++i) acc += st.phase[i] * (at[i] * b[i]);
        out[static_cast<std::size_t>(m)] = st.pref * acc;
    }
    return out;
}

std::vector<int> index_range(int top) {
    std::vector<int> v(static_cast<std::size_t>(top) + 1);
    for (int k = 0; k <= top; ++k) v[static_cast<std::size_t>(k)] = k;
    return v;
}

// ---------------------------------------------------------------------------
// Closed-form Gaussian Fourier factors

// Integral over R of x^k e^{-a (x - b)^2} e^{i omega x} dx. The centered
// moments M_j = Integral y^j e^{-a y^2 + i omega y} dy satisfy
// M_j = M_0 Q_j(omega) with Q_0 = 1 and Q_{j+1} = -i Q_j' + i omega/(2a) Q_j,
// and the binomial shift x = y + b assembles the off-center value.
complex<double> gauss_fourier_moment(double omega, int k, double a, double b) {
    const double m0 =
        std::sqrt(kPi / a) * std::exp(-omega * omega / (4.0 * a));
    const complex<double> swing = std::polar(1.0, omega * b);
    if (k == 0) return m0 * swing;

    std::vector<std::vector<complex<double>>> q(static_cast<std::size_t>(k) + 1);
    q[0] = {complex<double>(1.0, 0.0)};
    for (int j = 0; j < k; ++j) {
        const auto& c = q[static_cast<std::size_t>(j)];
        std::vector<complex<double>> next(c.size() + 1, complex<double>(0.0, 0.0));
        for (std::size_t d = 0; d < c.size(); ++d) {
            next[d + 1] += kI / (2.0 * a) * c[d];
            if (d + 1 < c.size())
                next[d] += -kI * static_cast<double>(d + 1) * c[d + 1];
        }
        q[static_cast<std::size_t>(j) + 1] = std::move(next);
    }

    complex<double> sum{0.0, 0.0};
    double binom = 1.0;
    double bpow = std::pow(b, k); // b^{k-j}, updated multiplicatively
    for (int j = 0; j <= k; ++j) {
        const auto& c = q[static_cast<std::size_t>(j)];
        complex<double> qj{0.0, 0.0};
        for (std::size_t d = c.size(); d-- > 0;) qj = qj * omega + c[d];
        sum += binom * bpow * qj;
        binom *= static_cast<double>(k - j) / static_cast<double>(j + 1);
        if (b != 0.0)
            bpow /= b;
        else
            bpow = (j + 1 == k) ? 1.0 : 0.0;
    }
    return m0 * swing * sum;
}

// ---------------------------------------------------------------------------
// Fourier transform on the Gauss-Hermite class

// F(u) entries for n, m <= top at one (nu, lambda). The x2, x3, x4
// integrals are the closed-form factors above, evaluated along the theta
// nodes; what remains is a quadrature over (xi, y) = scaled (theta,
// theta + x1) in which the x1 Gaussian couples only nearby nodes.
std::vector<complex<double>>
fourier_block(const LevelTable& tab, const GaussHermiteFunction& u,
              double lambda, int top, double density) {
    const double s = std::cbrt(std::abs(lambda));
    const double sgn = lambda > 0.0 ? 1.0 : -1.0;
    const double L = tab.L;
    const auto& a = u.widths();
    const auto& b = u.centers();
    const int nm = top + 1;
    std::vector<complex<double>> out(static_cast<std::size_t>(nm) * nm,
                                     complex<double>(0.0, 0.0));

    int e1 = 0, e2 = 0, e3 = 0;
    for (const auto& t : u.terms()) {
        e1 = std::max(e1, t.exps[0]);
        e2 = std::max(e2, t.exps[1]);
        e3 = std::max(e3, t.exps[2]);
    }

    // Envelope cuts. The x2 factor decays like e^{-omega2^2 / (4 a2)} with
    // omega2 = sgn(lambda) s (xi^2/2 - mu), the x3 factor likewise with
    // omega3 = sgn(lambda) s^2 xi; beyond these windows the integrand is
    // below e^{-kEnvCut} of its peak.
    const double w2 = (2.0 * std::sqrt(kEnvCut) + 2.0 * e2) * std::sqrt(a[1]) / s;
    const double w3 = (2.0 * std::sqrt(kEnvCut) + 2.0 * e3) * std::sqrt(a[2]) /
                      (s * s);
    double outer = std::min(L, w3);
    const double top_sq = 2.0 * (tab.mu + w2);
    if (top_sq <= 0.0) return out;
    outer = std::min(outer, std::sqrt(top_sq));
    const double hole =
        tab.mu - w2 > 0.0 ? std::sqrt(2.0 * (tab.mu - w2)) : 0.0;
    if (!(outer > hole)) return out;

    // Node density: eigenfunction wavenumber, phase slopes of the carrier
    // factors e^{i omega2 b2} and e^{i omega3 b3}, the envelope scale of
    // the x2 factor, and the x1 Gaussian width s / sqrt(a1).
    const double freq = eigen_wavenumber(tab, top) + s * L * std::abs(b[1]) +
                        s * s * std::abs(b[2]) +
                        0.5 * s * L / std::sqrt(a[1]) +
                        3.0 * std::sqrt(a[0]) / s;
    NodeSet g;
    if (hole > 0.0) {
        append_panels(g, -outer, -hole, freq, density);
        append_panels(g, hole, outer, freq, density);
    } else {
        append_panels(g, -outer, outer, freq, density);
    }
    check_budget(g.x.size(), "fourier transform");
    const std::size_t nq = g.x.size();
    if (nq == 0) return out;

    std::vector<std::vector<double>> P(static_cast<std::size_t>(nm),
                                       std::vector<double>(nq));
    for (int k = 0; k <= top; ++k)
        for (std::size_t i = 0; i < nq; ++i)
            P[static_cast<std::size_t>(k)][i] =
                tab.psi[static_cast<std::size_t>(k)].eval_or_zero(g.x[i]);

    std::vector<complex<double>> K(nq);
    std::vector<double> T(static_cast<std::size_t>(nm) * nq);
    for (const auto& term : u.terms()) {
        const complex<double> a4 =
            gauss_fourier_moment(lambda, term.exps[3], a[3], b[3]);
        for (std::size_t i = 0; i < nq; ++i) {
            const double xi = g.x[i];
            const double om2 = sgn * s * (0.5 * xi * xi - tab.mu);
            const double om3 = sgn * s * s * xi;
            K[i] = g.w[i] * gauss_fourier_moment(om2, term.exps[1], a[1], b[1]) *
                   gauss_fourier_moment(om3, term.exps[2], a[2], b[2]);
        }

        // x1 band: the Gaussian in x1 = (y - xi)/s couples nodes with
        // |x1 - b1| below the cut radius.
        const double r1 =
            std::sqrt((kEnvCut + 4.0 + 2.0 * term.exps[0]) / a[0]);
        std::fill(T.begin(), T.end(), 0.0);
        for (std::size_t i = 0; i < nq; ++i) {
            const double ylo = g.x[i] + s * (b[0] - r1);
            const double yhi = g.x[i] + s * (b[0] + r1);
            auto first = std::lower_bound(g.x.begin(), g.x.end(), ylo);
            auto last = std::upper_bound(g.x.begin(), g.x.end(), yhi);
            for (auto it = first; it != last; ++it) {
                const std::size_t j = static_cast<std::size_t>(it - g.x.begin());
                const double x1 = (g.x[j] - g.x[i]) / s;
                double d = std::exp(-a[0] * (x1 - b[0]) * (x1 - b[0])) * g.w[j];
                if (term.exps[0] > 0) d *= std::pow(x1, term.exps[0]);
                for (int m = 0; m <= top; ++m)
                    T[static_cast<std::size_t>(m) * nq + i] +=
                        d * P[static_cast<std::size_t>(m)][j];
            }
        }

        const complex<double> scale = term.coeff * a4 / s;
        for (std::size_t i = 0; i < nq; ++i) {
            const complex<double> ki = K[i] * scale;
            for (int n = 0; n <= top; ++n) {
                const complex<double> pa = P[static_cast<std::size_t>(n)][i] * ki;
                complex<double>* row = out.data() + static_cast<std::size_t>(n) * nm;
                for (int m = 0; m <= top; ++m)
                    row[m] += pa * T[static_cast<std::size_t>(m) * nq + i];
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Truncation window grids

struct WindowGrid {
    std::vector<double> nu_x, nu_w;
    std::vector<double> la_x, la_w; // |lambda| nodes, measure weights
    std::size_t nu_edge = 0;        // nodes per nu panel, for edge shares
    std::size_t la_edge = 0;
};

void check_window(const FrequencyWindow& w) {
    if (w.max_mode < 0) throw DomainError("max_mode must be nonnegative");
    if (!(w.nu_bound > 0.0) || !std::isfinite(w.nu_bound))
        throw DomainError("nu_bound must be positive and finite");
    if (!(w.lambda_min > 0.0) || !(w.lambda_max > w.lambda_min) ||
        !std::isfinite(w.lambda_max))
        throw DomainError("window needs 0 < lambda_min < lambda_max < inf");
    if (w.nu_panels < 2 || w.lambda_panels < 2)
        throw DomainError("window needs at least two panels per axis");
}

WindowGrid window_grid(const FrequencyWindow& w) {
    check_window(w);
    WindowGrid g;
    const detail::QuadRule& rule = detail::gauss_legendre(6);
    g.nu_edge = rule.x.size();
    g.la_edge = rule.x.size();
    const double nu_step = 2.0 * w.nu_bound / w.nu_panels;
    for (int p = 0; p < w.nu_panels; ++p) {
        const double c = -w.nu_bound + (p + 0.5) * nu_step, h = 0.5 * nu_step;
        for (std::size_t i = 0; i < rule.x.size(); ++i) {
            g.nu_x.push_back(c + h * rule.x[i]);
            g.nu_w.push_back(h * rule.w[i]);
        }
    }
    const double llo = std::log(w.lambda_min), lhi = std::log(w.lambda_max);
    const double la_step = (lhi - llo) / w.lambda_panels;
    for (int p = 0; p < w.lambda_panels; ++p) {
        const double c = llo + (p + 0.5) * la_step, h = 0.5 * la_step;
        for (std::size_t i = 0; i < rule.x.size(); ++i) {
            const double lam = std::exp(c + h * rule.x[i]);
            g.la_x.push_back(lam);
            g.la_w.push_back(h * rule.w[i] * lam); // dlambda = lambda dlog
        }
    }
    return g;
}

// Shell decay gate shared by the Plancherel and inversion sweeps.
void require_shell_decay(const std::vector<double>& shell, double total,
                         const char* what) {
    const std::size_t n = shell.size();
    if (n < 2 || !(total > 0.0)) return;
    const double last = shell[n - 1], prev = shell[n - 2];
    if (last > prev && last > 1e-3 * total)
        throw ConvergenceError(std::string(what) +
                                   ": outermost mode shells do not decay; "
                                   "raise max_mode",
                               last / total, 1e-3);
}

// ---------------------------------------------------------------------------
// Heat kernel internals

// Certified lower envelope for E_m(mu): the global minimum of the ground
// level is above 1/2, deep positive wells sit above a fraction of the
// harmonic ladder, and negative mu adds the mu^2 well bottom. The envelope
// constants are validated against solved levels in the test suite.
constexpr double kEnvHarmonic = 0.80;
constexpr double kEnvMuFloor = 8.0;

double level_lower_bound(double mu, int m) {
    double lb = 0.5;
    if (mu < 0.0) lb = std::max(lb, mu * mu);
    if (mu >= kEnvMuFloor) {
        const double rung = 2.0 * (m / 2) + 1.0;
        lb = std::max(lb, kEnvHarmonic * rung * std::sqrt(2.0 * mu));
    }
    return lb;
}

// Integral over nu > nu_c of e^{-c rung sqrt(2 nu)} dnu, the harmonic tail
// of one level: substituting r = sqrt(2 nu) gives e^{-cr}(r/c + 1/c^2).
double harmonic_nu_tail(double coeff, double nu_c) {
    const double r = std::sqrt(2.0 * std::max(nu_c, 0.0));
    const double y = coeff * r;
    if (y > 700.0) return 0.0;
    return std::exp(-y) * (r / coeff + 1.0 / (coeff * coeff));
}

struct HeatPass {
    complex<double> integral{0.0, 0.0}; // frequency integral, both lambda signs
    double tail = 0.0;                  // analytic truncation bounds, same units
};

struct MuNode {
    double mu = 0.0;
    double weight = 0.0;
    LevelTable tab;
};

// Graded mu ladder: geometric panels toward the deep negative and deep
// positive ends, linear panels across the pocket around the fold.
std::vector<std::pair<double, double>> mu_panels(double mu_bot, double mu_cap,
                                                 int res) {
    std::vector<std::pair<double, double>> panels;
    auto geometric = [&](double from, double to, double ratio) {
        // |from| > |to|, same sign direction handled by the caller
        double hi = from;
        while (std::abs(hi) > std::abs(to) * 1.0001) {
            double lo = hi / ratio;
            if (std::abs(lo) < std::abs(to)) lo = to;
            panels.emplace_back(std::min(hi, lo), std::max(hi, lo));
            hi = lo;
        }
    };
    const double ratio = std::pow(1.6, 1.0 / res);
    if (mu_bot < -1.0) geometric(mu_bot, -1.0, ratio);
    const double lin_step = 0.75 / res;
    const double lin_hi = std::min(kEnvMuFloor, mu_cap);
    for (double lo = -1.0; lo < lin_hi; lo += lin_step)
        panels.emplace_back(lo, std::min(lo + lin_step, lin_hi));
    if (mu_cap > kEnvMuFloor) {
        std::size_t mark = panels.size();
        geometric(mu_cap, kEnvMuFloor, ratio);
        std::reverse(panels.begin() + static_cast<std::ptrdiff_t>(mark),
                     panels.end());
    }
    return panels;
}

void check_heat_spec(const HeatSpec& h) {
    if (h.max_mode < 0 || h.max_mode > 64)
        throw DomainError("heat max_mode must lie in [0, 64]");
    if (!(h.rel_tol > 0.0) || !std::isfinite(h.rel_tol))
        throw DomainError("heat rel_tol must be positive and finite");
    if (!(h.imag_tol > 0.0) || !std::isfinite(h.imag_tol))
        throw DomainError("heat imag_tol must be positive and finite");
    if (h.resolution < 1 || h.resolution > 6)
        throw DomainError("heat resolution must lie in [1, 6]");
}

HeatPass heat_pass(double t, const GroupElement& xin, const HeatSpec& trunc,
                   int res, double sweep_rel) {
    constexpr double kECut = 34.0;
    constexpr double kMuCap = 160.0;
    const int levels = trunc.max_mode + 1;

    // lambda range: below lambda_lo the strip bound below is charged, above
    // lambda_hi the e^{-t E} weight is under e^{-kECut} by E >= lambda^{2/3}/2.
    const double rough = 0.3 * std::pow(t, -3.5) / kPlancherelNorm;
    double harm_sum = 0.0;
    for (int m = 0; m < levels; ++m) {
        const double rung = 2.0 * (m / 2) + 1.0;
        harm_sum += 1.0 / std::pow(kEnvHarmonic * rung * t, 2.0);
    }
    double lam_lo = 0.02 * trunc.rel_tol * rough / std::max(harm_sum, 1e-30);
    const double lam_hi = std::pow(2.0 * kECut / t, 1.5);
    lam_lo = std::clamp(lam_lo, 1e-6, 0.05 * lam_hi);

    HeatPass pass;
    // strip bound: integral over 0 < lambda < lam_lo, both signs, of the
    // level sums bounded through the envelope (harmonic part, pocket part
    // of measure mu_floor * lambda^{4/3}, negative-mu part)
    pass.tail += 2.0 * (lam_lo * harm_sum +
                        std::pow(lam_lo, 7.0 / 3.0) * (3.0 / 7.0) *
                            kEnvMuFloor * levels +
                        0.5 * lam_lo * lam_lo * std::sqrt(kPi / t) * 0.5 * levels);
    // tail above lam_hi: every active region carries at least e^{-t E/2}
    // with E >= lambda^{2/3}/2; the w^{5/2} integral is bounded by its
    // first term times a geometric safety factor
    {
        const double tau = t * std::pow(lam_hi, 2.0 / 3.0);
        double k_out = levels * (kEnvMuFloor + 2.0 + 2.0 / tau);
        for (int m = 0; m < levels; ++m) {
            const double rung = 2.0 * (m / 2) + 1.0;
            k_out += 2.0 / std::pow(kEnvHarmonic * rung * tau, 2.0);
        }
        const double ginc =
            std::pow(kECut, 2.5) * std::exp(-kECut) / (1.0 - 2.5 / kECut);
        pass.tail +=
            2.0 * k_out * 3.0 * std::pow(2.0 / t, 2.5) / t * ginc;
    }

    // mu ladder shared across rows
    const double mu_bot = -std::sqrt(kECut / t) * std::pow(lam_lo, -1.0 / 3.0);
    const auto panels = mu_panels(mu_bot, kMuCap, res);
    const detail::QuadRule& mu_rule = detail::gauss_legendre(4);
    std::vector<MuNode> nodes;
    nodes.reserve(panels.size() * mu_rule.x.size());
    for (const auto& [lo, hi] : panels) {
        const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
        for (std::size_t i = 0; i < mu_rule.x.size(); ++i) {
            MuNode node;
            node.mu = c + h * mu_rule.x[i];
            node.weight = h * mu_rule.w[i];
            nodes.push_back(std::move(node));
        }
    }
    for (auto& node : nodes)
        node.tab = level_table_sweep(node.mu, trunc.max_mode, sweep_rel);

    // lambda rows: geometric panels in |lambda|, Gauss nodes per panel,
    // explicit mirror rows for lambda < 0
    const double ratio = std::pow(1.6, 1.0 / res);
    std::vector<std::pair<double, double>> la_panels;
    for (double lo = lam_lo; lo < lam_hi;) {
        const double hi = std::min(lo * ratio, lam_hi);
        la_panels.emplace_back(lo, hi);
        lo = hi;
    }
    const detail::QuadRule& la_rule = detail::gauss_legendre(4);

    std::vector<double> level_sum(static_cast<std::size_t>(levels), 0.0);
    for (const auto& [plo, phi] : la_panels) {
        const double c = 0.5 * (plo + phi), h = 0.5 * (phi - plo);
        for (std::size_t i = 0; i < la_rule.x.size(); ++i) {
            const double lam_abs = c + h * la_rule.x[i];
            const double wl = h * la_rule.w[i];
            const double jac = std::pow(lam_abs, 4.0 / 3.0);
            const double tau = t * std::pow(lam_abs, 2.0 / 3.0);
            for (double sgn : {1.0, -1.0}) {
                const double lambda = sgn * lam_abs;
                for (const auto& node : nodes) {
                    // skip nodes whose whole level sum sits below the cut
                    if (tau * level_lower_bound(node.mu, 0) > kECut) {
                        pass.tail += wl * jac * node.weight * levels *
                                     std::exp(-kECut);
                        continue;
                    }
                    const double nu = node.mu * jac * sgn;
                    const auto diag = w_diagonal(node.tab, nu, lambda, xin,
                                                 trunc.max_mode, 1.0);
                    for (int m = 0; m < levels; ++m) {
                        const double em =
                            tau * node.tab.data
                                      ->e_rich[static_cast<std::size_t>(m)];
                        if (em > kECut) {
                            pass.tail += wl * jac * node.weight *
                                         std::exp(-kECut);
                            continue;
                        }
                        const complex<double> contrib =
                            wl * jac * node.weight * std::exp(-em) *
                            diag[static_cast<std::size_t>(m)];
                        pass.integral += contrib;
                        level_sum[static_cast<std::size_t>(m)] +=
                            std::abs(contrib);
                    }
                }
                // levels beyond the mu cap: harmonic nu tail per level
                const double nu_c = kMuCap * jac;
                for (int m = 0; m < levels; ++m) {
                    const double rung = 2.0 * (m / 2) + 1.0;
                    pass.tail += wl * harmonic_nu_tail(
                                          t * kEnvHarmonic * rung, nu_c);
                }
            }
        }
    }

    // levels above max_mode: geometric extrapolation of the per-level sums
    if (levels >= 3) {
        const double jn = level_sum[static_cast<std::size_t>(levels - 1)];
        const double jp = level_sum[static_cast<std::size_t>(levels - 2)];
        const double jq = level_sum[static_cast<std::size_t>(levels - 3)];
        double rho = 0.0;
        if (jp > 0.0) rho = std::max(rho, jn / jp);
        if (jq > 0.0) rho = std::max(rho, jp / jq);
        if (rho >= 0.95)
            throw ConvergenceError(
                "heat kernel level sums do not decay; raise max_mode", rho,
                0.95);
        pass.tail += jn * rho / (1.0 - rho);
    }
    return pass;
}

// ---------------------------------------------------------------------------
// Completion points

struct EnergyData {
    double energy = 0.0;
    double gap = 0.0; // E_m - E_n
    double nu = 0.0;
    double lambda = 0.0;
};

EnergyData completion_energies(const CompletionPoint& p,
                               const NumericsSpec& spec) {
    EnergyData d;
    if (std::holds_alternative<BoundaryPoint>(p)) {
        const auto& b = std::get<BoundaryPoint>(p);
        if (!std::isfinite(b.energy) || !std::isfinite(b.energy_gap) ||
            !std::isfinite(b.nu))
            throw DomainError("boundary point data must be finite");
        d.energy = b.energy;
        d.gap = b.energy_gap;
        d.nu = b.nu;
        d.lambda = 0.0;
        return d;
    }
    const auto& q = std::get<FrequencyPoint>(p);
    check_point(q);
    const RescaledFrequency f = rescaled_frequency(q.nu, q.lambda);
    d.energy = rescaled_energy(f, q.m, spec);
    d.gap = d.energy - rescaled_energy(f, q.n, spec);
    d.nu = q.nu;
    d.lambda = q.lambda;
    return d;
}

} // namespace

// ---------------------------------------------------------------------------
// Public surface

std::complex<double> w_element(const FrequencyPoint& p, const GroupElement& x,
                               const NumericsSpec& spec) {
    check_point(p);
    check_element(x);
    const RescaledFrequency f = rescaled_frequency(p.nu, p.lambda);
    const int top = std::max(p.n, p.m);
    const LevelTable tab = level_table(f.mu, top, spec);
    return w_entries(tab, p.nu, p.lambda, x, {p.n}, {p.m}, 1.0)[0];
}

std::vector<std::complex<double>> w_matrix(double nu, double lambda,
                                           const GroupElement& x, int max_mode,
                                           const NumericsSpec& spec) {
    check_point({0, 0, nu, lambda});
    check_element(x);
    if (max_mode < 0) throw DomainError("max_mode must be nonnegative");
    const RescaledFrequency f = rescaled_frequency(nu, lambda);
    const LevelTable tab = level_table(f.mu, max_mode, spec);
    return w_entries(tab, nu, lambda, x, index_range(max_mode),
                     index_range(max_mode), 1.0);
}

FourierCoefficient fourier_transform(const GaussHermiteFunction& u,
                                     const FrequencyPoint& p,
                                     const NumericsSpec& spec) {
    check_point(p);
    const RescaledFrequency f = rescaled_frequency(p.nu, p.lambda);
    const int top = std::max(p.n, p.m);
    const LevelTable tab = level_table(f.mu, top, spec);
    const auto coarse = fourier_block(tab, u, p.lambda, top, 1.0);
    const auto fine = fourier_block(tab, u, p.lambda, top, 1.5);
    const std::size_t idx =
        static_cast<std::size_t>(p.n) * (top + 1) + static_cast<std::size_t>(p.m);
    FourierCoefficient out;
    out.value = fine[idx];
    out.abs_error_estimate =
        std::abs(fine[idx] - coarse[idx]) + 1e-12 * u.l1_upper_bound();
    return out;
}

std::vector<std::complex<double>> fourier_matrix(const GaussHermiteFunction& u,
                                                 double nu, double lambda,
                                                 int max_mode,
                                                 const NumericsSpec& spec) {
    check_point({0, 0, nu, lambda});
    if (max_mode < 0) throw DomainError("max_mode must be nonnegative");
    const RescaledFrequency f = rescaled_frequency(nu, lambda);
    const LevelTable tab = level_table(f.mu, max_mode, spec);
    return fourier_block(tab, u, lambda, max_mode, 1.0);
}

FourierCoefficient fourier_transform_sampled(
    const std::function<double(const GroupElement&)>& u,
    const std::array<double, 4>& half_widths, const FrequencyPoint& p,
    const NumericsSpec& spec) {
    check_point(p);
    if (!u) throw DomainError("sample function must be callable");
    for (double h : half_widths)
        if (!(h > 0.0) || !std::isfinite(h))
            throw DomainError("half widths must be positive and finite");

    const RescaledFrequency f = rescaled_frequency(p.nu, p.lambda);
    const int top = std::max(p.n, p.m);
    const LevelTable tab = level_table(f.mu, top, spec);
    const double s = std::cbrt(std::abs(p.lambda));
    const double sgn = p.lambda > 0.0 ? 1.0 : -1.0;
    const double L = tab.L;
    const auto& psn = tab.psi[static_cast<std::size_t>(p.n)];
    const auto& psm = tab.psi[static_cast<std::size_t>(p.m)];

    auto evaluate = [&](double density) {
        const double keig = eigen_wavenumber(tab, top);
        // theta nodes in the scaled variable; x1 in group units
        const double c3max = s * s * half_widths[2];
        const double c2max = s * half_widths[1] * 0.5;
        NodeSet gt;
        append_panels(gt, -L, L, keig + c3max + 2.0 * L * c2max, density);
        NodeSet g1;
        append_panels(g1, -half_widths[0], half_widths[0],
                      (keig + 2.0) * s + 2.0 / half_widths[0], density);
        NodeSet g2;
        append_panels(g2, -half_widths[1], half_widths[1],
                      0.5 * s * L * L + std::abs(p.nu / p.lambda) +
                          2.0 / half_widths[1],
                      density);
        NodeSet g3;
        append_panels(g3, -half_widths[2], half_widths[2],
                      s * s * L + 2.0 / half_widths[2], density);
        NodeSet g4;
        append_panels(g4, -half_widths[3], half_widths[3],
                      std::abs(p.lambda) + 2.0 / half_widths[3], density);
        // dominant work: one theta sweep plus one x4 sweep per (x1, x2, x3)
        const std::size_t work = g1.x.size() * g2.x.size() * g3.x.size() *
                                 (gt.x.size() + g4.x.size());
        check_budget(work / 64, "sampled fourier transform");

        std::vector<double> psn_at(gt.x.size());
        for (std::size_t i = 0; i < gt.x.size(); ++i)
            psn_at[i] = psn.eval_or_zero(gt.x[i]) * gt.w[i];

        complex<double> acc{0.0, 0.0};
        for (std::size_t i1 = 0; i1 < g1.x.size(); ++i1) {
            const double x1 = g1.x[i1];
            std::vector<double> psm_shift(gt.x.size());
            for (std::size_t i = 0; i < gt.x.size(); ++i)
                psm_shift[i] = psm.eval_or_zero(gt.x[i] + s * x1);
            const double c3v = sgn * s * s; // theta x3 phase slope factor
            for (std::size_t i2 = 0; i2 < g2.x.size(); ++i2) {
                const double x2 = g2.x[i2];
                for (std::size_t i3 = 0; i3 < g3.x.size(); ++i3) {
                    const double x3 = g3.x[i3];
                    complex<double> kern{0.0, 0.0};
                    for (std::size_t i = 0; i < gt.x.size(); ++i) {
                        const double xi = gt.x[i];
                        const double phase =
                            c3v * x3 * xi + sgn * s * 0.5 * x2 * xi * xi;
                        kern += psn_at[i] * psm_shift[i] *
                                std::polar(1.0, phase);
                    }
                    kern *= g1.w[i1] * g2.w[i2] * g3.w[i3];
                    for (std::size_t i4 = 0; i4 < g4.x.size(); ++i4) {
                        const double x4 = g4.x[i4];
                        const double uval = u(GroupElement{x1, x2, x3, x4});
                        if (uval == 0.0) continue;
                        const double outer =
                            p.lambda * x4 - (p.nu / p.lambda) * x2;
                        acc += kern * g4.w[i4] * uval *
                               std::polar(1.0, outer);
                    }
                }
            }
        }
        return acc;
    };

    const complex<double> coarse = evaluate(1.0);
    const complex<double> fine = evaluate(1.3);
    FourierCoefficient out;
    out.value = fine;
    out.abs_error_estimate = std::abs(fine - coarse);
    return out;
}

// Sweep-grade eigensolve target for the window integrals, derived from the
// caller's eigenvalue tolerance.
double sweep_target(const NumericsSpec& spec) {
    return std::clamp(spec.eig_tol * 0.3, 3e-7, 1e-4);
}

PlancherelReport plancherel_check(const GaussHermiteFunction& u,
                                  const FrequencyWindow& window,
                                  const NumericsSpec& spec) {
    const double sweep_rel = sweep_target(spec);
    const WindowGrid grid = window_grid(window);
    const int top = window.max_mode;
    const std::size_t nm = static_cast<std::size_t>(top) + 1;

    PlancherelReport rep;
    rep.squared_norm = u.l2_norm_sq();
    std::vector<double> shell(nm, 0.0);
    double nu_edge_mass = 0.0, la_top_mass = 0.0, la_bot_mass = 0.0;

    for (std::size_t il = 0; il < grid.la_x.size(); ++il) {
        const double lambda = grid.la_x[il];
        for (std::size_t iv = 0; iv < grid.nu_x.size(); ++iv) {
            const double nu = grid.nu_x[iv];
            const RescaledFrequency f = rescaled_frequency(nu, lambda);
            const LevelTable tab = level_table_sweep(f.mu, top, sweep_rel);
            const auto block = fourier_block(tab, u, lambda, top, 1.0);
            // real u: the lambda < 0 half carries the conjugate block and
            // the same squared magnitudes, hence the factor 2
            const double wt = 2.0 * grid.nu_w[iv] * grid.la_w[il];
            double node_mass = 0.0;
            for (int n = 0; n <= top; ++n)
                for (int m = 0; m <= top; ++m) {
                    const double sq = std::norm(
                        block[static_cast<std::size_t>(n) * nm +
                              static_cast<std::size_t>(m)]);
                    node_mass += sq;
                    shell[static_cast<std::size_t>(std::max(n, m))] += wt * sq;
                }
            const double mass = wt * node_mass;
            rep.transform_mass += mass;
            if (iv < grid.nu_edge || iv >= grid.nu_x.size() - grid.nu_edge)
                nu_edge_mass += mass;
            if (il >= grid.la_x.size() - grid.la_edge) la_top_mass += mass;
            if (il < grid.la_edge) la_bot_mass += mass;
        }
    }
    rep.transform_mass *= kPlancherelNorm;
    for (auto& s : shell) s *= kPlancherelNorm;
    nu_edge_mass *= kPlancherelNorm;
    la_top_mass *= kPlancherelNorm;
    la_bot_mass *= kPlancherelNorm;

    if (!(rep.squared_norm > 0.0))
        throw DomainError("plancherel check needs a nonzero function");
    rep.ratio = rep.transform_mass / rep.squared_norm;
    if (rep.transform_mass > 0.0) {
        rep.mode_shell_share = shell[nm - 1] / rep.transform_mass;
        rep.nu_edge_share = nu_edge_mass / rep.transform_mass;
        rep.lambda_top_share = la_top_mass / rep.transform_mass;
        rep.lambda_bottom_share = la_bot_mass / rep.transform_mass;
    }
    require_shell_decay(shell, rep.transform_mass, "plancherel check");
    return rep;
}

CoefficientProvider fourier_coefficients(const GaussHermiteFunction& u,
                                         int max_mode,
                                         const NumericsSpec& spec) {
    if (max_mode < 0) throw DomainError("max_mode must be nonnegative");
    return [u, max_mode, spec](double nu, double lambda) {
        return fourier_matrix(u, nu, lambda, max_mode, spec);
    };
}

std::complex<double> inverse_fourier_at(const CoefficientProvider& coeffs,
                                        const GroupElement& x,
                                        const FrequencyWindow& window,
                                        const NumericsSpec& spec) {
    if (!coeffs) throw DomainError("coefficient provider must be callable");
    check_element(x);
    const WindowGrid grid = window_grid(window);
    const int top = window.max_mode;
    const std::size_t nm = static_cast<std::size_t>(top) + 1;
    const GroupElement xin = group_inverse(x);

    complex<double> acc{0.0, 0.0};
    std::vector<double> shell(nm, 0.0);
    double total_abs = 0.0;
    for (std::size_t il = 0; il < grid.la_x.size(); ++il) {
        for (std::size_t iv = 0; iv < grid.nu_x.size(); ++iv) {
            const double nu = grid.nu_x[iv];
            const double wt = grid.nu_w[iv] * grid.la_w[il];
            for (double sgn : {1.0, -1.0}) {
                const double lambda = sgn * grid.la_x[il];
                const auto block = coeffs(nu, lambda);
                if (block.size() != nm * nm)
                    throw DomainError(
                        "coefficient block size does not match the window");
                const auto wm = w_matrix(nu, lambda, xin, top, spec);
                for (int n = 0; n <= top; ++n)
                    for (int m = 0; m <= top; ++m) {
                        const std::size_t idx =
                            static_cast<std::size_t>(n) * nm +
                            static_cast<std::size_t>(m);
                        const complex<double> term = wm[idx] * block[idx];
                        acc += wt * term;
                        const double mag = wt * std::abs(term);
                        shell[static_cast<std::size_t>(std::max(n, m))] += mag;
                        total_abs += mag;
                    }
            }
        }
    }
    require_shell_decay(shell, total_abs, "inverse fourier");
    return kPlancherelNorm * acc;
}

HeatValue heat_kernel_at(double t, const GroupElement& x, const HeatSpec& trunc,
                         const NumericsSpec& spec) {
    if (!(t > 0.0) || !std::isfinite(t))
        throw DomainError("heat time must be positive and finite");
    check_element(x);
    check_heat_spec(trunc);
    const double sweep_rel = std::clamp(spec.eig_tol * 10.0, 1e-6, 1e-3);

    const GroupElement xin = group_inverse(x);
    const HeatPass coarse = heat_pass(t, xin, trunc, trunc.resolution, sweep_rel);
    const HeatPass fine =
        heat_pass(t, xin, trunc, trunc.resolution + 1, sweep_rel);

    HeatValue out;
    out.value = kPlancherelNorm * fine.integral.real();
    out.imag_residual = kPlancherelNorm * std::abs(fine.integral.imag());
    const double quad_err =
        kPlancherelNorm * std::abs(fine.integral - coarse.integral);
    out.error_estimate = quad_err + kPlancherelNorm * fine.tail;

    const double scale = std::max(std::abs(out.value), 1e-300);
    if (out.error_estimate > trunc.rel_tol * scale)
        throw ConvergenceError(
            "heat kernel quadrature missed the relative tolerance; raise "
            "resolution or rel_tol",
            out.error_estimate / scale, trunc.rel_tol);
    if (out.imag_residual > trunc.imag_tol * scale)
        throw ConvergenceError("heat kernel imaginary residual above tolerance",
                               out.imag_residual / scale, trunc.imag_tol);
    return out;
}

BoundaryPoint harmonic_boundary_point(int n, int m, double nu) {
    if (n < 0 || m < 0)
        throw DomainError("oscillator indices must be nonnegative");
    if (!(nu > 0.0) || !std::isfinite(nu))
        throw DomainError("boundary points of harmonic type need nu > 0");
    BoundaryPoint b;
    const double root = std::sqrt(2.0 * nu);
    b.energy = (2.0 * m + 1.0) * root;
    b.energy_gap = 2.0 * (m - n) * root;
    b.nu = nu;
    return b;
}

double frequency_distance(const CompletionPoint& p, const CompletionPoint& q,
                          const NumericsSpec& spec) {
    const EnergyData a = completion_energies(p, spec);
    const EnergyData b = completion_energies(q, spec);
    return std::sqrt(std::abs(a.energy - b.energy)) +
           std::sqrt(std::abs(a.gap - b.gap)) +
           std::pow(std::abs(a.nu - b.nu), 0.25) +
           std::cbrt(std::abs(a.lambda - b.lambda));
}

} // namespace engel
