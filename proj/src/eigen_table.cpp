#include "engel/detail/eigen_table.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>

#include "engel/detail/parallel.hpp"
#include "engel/detail/quartic_cache.hpp"
#include "engel/errors.hpp"

namespace engel::detail {

namespace {

// Chart geometry. The central window must reach far enough that both deep
// charts sample E_m where the rescaled level functions are already smooth;
// at |mu| = 40 the highest tabulated level still sits well below the
// barrier, and h_edge = 40^{-3/2} keeps the full range of each deep chart
// inside one quarter of a percent of its endpoint value. The inner window
// resolves the ground-level pocket near mu = 0, where the levels bend on a
// unit scale; outside it they follow the smooth well asymptotics and a
// coarser step loses nothing.
constexpr double kInnerEdge = 8.0;
constexpr double kInnerStep = 0.25;
constexpr double kMuEdge = 40.0;
constexpr double kOuterStep = 1.0;
constexpr int kDeepIntervals = 8;

std::vector<double> sweep_levels(double mu, int m_count, double rel_tol) {
    auto data = quartic_sweep_spectrum(mu, m_count, rel_tol);
    return {data->e_rich.begin(), data->e_rich.begin() + m_count + 1};
}

} // namespace

EigenTable::EigenTable(int m_count, double rel_tol) {
    if (m_count < 0) throw DomainError("negative eigenvalue index");
    inner_edge_ = kInnerEdge;
    mu_edge_ = kMuEdge;
    h_edge_ = std::pow(kMuEdge, -1.5);

    const int n_inner = 2 * static_cast<int>(kInnerEdge / kInnerStep) + 1;
    const int n_outer = 2 * static_cast<int>(kMuEdge / kOuterStep) + 1;
    const double deep_step = h_edge_ / kDeepIntervals;

    // One solve per sample. Jobs cover the inner window, then the outer
    // window, then the two deep charts at mu = h^{-2/3} (the j = 0 endpoint
    // of each deep chart is the exact limit and needs no solve).
    const std::size_t jobs =
        static_cast<std::size_t>(n_inner + n_outer) + 2 * kDeepIntervals;
    auto samples = parallel_map(jobs, [&](std::size_t j) -> std::vector<double> {
        if (j < static_cast<std::size_t>(n_inner))
            return sweep_levels(-kInnerEdge + kInnerStep * static_cast<double>(j),
                                m_count, rel_tol);
        if (j < static_cast<std::size_t>(n_inner + n_outer))
            return sweep_levels(-kMuEdge + kOuterStep * static_cast<double>(j - n_inner),
                                m_count, rel_tol);
        const std::size_t d = j - static_cast<std::size_t>(n_inner + n_outer);
        const int interval = static_cast<int>(d % kDeepIntervals) + 1;
        const double mu = std::pow(deep_step * interval, -2.0 / 3.0);
        return sweep_levels(d < kDeepIntervals ? mu : -mu, m_count, rel_tol);
    });

    inner_.reserve(m_count + 1);
    outer_.reserve(m_count + 1);
    deep_pos_.reserve(m_count + 1);
    deep_neg_.reserve(m_count + 1);
    for (int m = 0; m <= m_count; ++m) {
        std::vector<double> ci(n_inner), co(n_outer);
        for (int j = 0; j < n_inner; ++j) ci[j] = samples[j][m];
        for (int j = 0; j < n_outer; ++j) co[j] = samples[n_inner + j][m];
        inner_.emplace_back(-kInnerEdge, kInnerStep, std::move(ci));
        outer_.emplace_back(-kMuEdge, kOuterStep, std::move(co));

        std::vector<double> g(kDeepIntervals + 1), h(kDeepIntervals + 1);
        g[0] = std::sqrt(2.0) * (2 * (m / 2) + 1);
        h[0] = 1.0;
        for (int j = 1; j <= kDeepIntervals; ++j) {
            const double mu = std::pow(deep_step * j, -2.0 / 3.0);
            g[j] = samples[n_inner + n_outer + j - 1][m] / std::sqrt(mu);
            h[j] = samples[n_inner + n_outer + kDeepIntervals + j - 1][m] / (mu * mu);
        }
        deep_pos_.emplace_back(0.0, deep_step, std::move(g));
        deep_neg_.emplace_back(0.0, deep_step, std::move(h));
    }

    ground_min_ = *std::min_element(inner_[0].values().begin(),
                                    inner_[0].values().end());
    ground_min_ = std::min(ground_min_,
                           *std::min_element(outer_[0].values().begin(),
                                             outer_[0].values().end()));
}

double EigenTable::energy(int m, double mu) const {
    if (m < 0 || m >= levels()) throw DomainError("eigenvalue index out of range");
    if (!std::isfinite(mu)) throw DomainError("mu must be finite");
    if (mu > mu_edge_) return std::sqrt(mu) * deep_pos_[m](std::pow(mu, -1.5));
    if (mu < -mu_edge_) return mu * mu * deep_neg_[m](std::pow(-mu, -1.5));
    if (std::abs(mu) <= inner_edge_) return inner_[m](mu);
    return outer_[m](mu);
}

double EigenTable::rescaled(int m, double nu, double lambda) const {
    if (m < 0 || m >= levels()) throw DomainError("eigenvalue index out of range");
    if (lambda == 0.0 || !std::isfinite(lambda) || !std::isfinite(nu))
        throw DomainError("lambda must be nonzero and the frequency finite");
    const double l2 = lambda * lambda;
    if (nu > 0.0) {
        const double h = l2 / (nu * std::sqrt(nu));
        if (h <= h_edge_) return std::sqrt(nu) * deep_pos_[m](h);
    } else if (nu < 0.0) {
        const double w = l2 / (-nu * std::sqrt(-nu));
        if (w <= h_edge_) return (nu * nu / l2) * deep_neg_[m](w);
    }
    const double scale = std::cbrt(l2);
    const double mu = nu / (scale * scale);
    if (std::abs(mu) <= inner_edge_) return scale * inner_[m](mu);
    return scale * outer_[m](mu);
}

std::pair<double, double> EigenTable::growth_bracket(int m, double lo) const {
    if (m < 0 || m >= levels()) throw DomainError("eigenvalue index out of range");
    if (!(lo > 0.0) || !std::isfinite(lo))
        throw DomainError("growth bracket needs a positive threshold");
    double mn = std::numeric_limits<double>::infinity(), mx = 0.0;
    const UniformCubic& outer = outer_[m];
    const auto& ov = outer.values();
    for (std::size_t j = 0; j < ov.size(); ++j) {
        const double mu = outer.x_min() + outer.step() * static_cast<double>(j);
        if (mu < lo) continue;
        const double g = ov[j] / std::sqrt(mu);
        mn = std::min(mn, g);
        mx = std::max(mx, g);
    }
    // chart samples stand for mu >= max(lo, mu_edge), i.e. h <= h_lo
    const double h_lo = std::pow(std::max(lo, mu_edge_), -1.5);
    const UniformCubic& chart = deep_pos_[m];
    const auto& gv = chart.values();
    for (std::size_t j = 0; j < gv.size(); ++j) {
        if (chart.step() * static_cast<double>(j) > h_lo * (1.0 + 1e-12)) break;
        mn = std::min(mn, gv[j]);
        mx = std::max(mx, gv[j]);
    }
    // widen slightly for motion between samples
    return {mn * 0.995, mx * 1.005};
}

const EigenTable& eigen_table(int m_count) {
    if (m_count < 0) throw DomainError("negative eigenvalue index");
    // Same rounding ladder as the solver cache, so nearby requests share.
    static constexpr int ladder[] = {8,  12, 16,  24,  32,  40,  48,  64,
                                     80, 96, 128, 160, 200, 256, 384, 512};
    int bucket = m_count;
    for (int b : ladder)
        if (m_count <= b) {
            bucket = b;
            break;
        }

    static std::mutex mutex;
    static std::map<int, std::unique_ptr<EigenTable>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(bucket);
    if (it == cache.end()) {
        // Interpolation error dominates well above this solve tolerance.
        it = cache.emplace(bucket, std::make_unique<EigenTable>(bucket, 1e-5)).first;
    }
    return *it->second;
}

} // namespace engel::detail
