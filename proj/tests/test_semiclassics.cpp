#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "engel/errors.hpp"
#include "engel/oscillator.hpp"
#include "engel/semiclassics.hpp"

using namespace engel;

namespace {

// frozen reference from the closed-form program in tests/oracles:
// sqrt(2) Gamma(1/4) Gamma(3/2) / Gamma(7/4)
constexpr double kQuarticUnitArea = 4.944199139470325;

constexpr double kInvTwoSqrtTwo = 0.35355339059327373;

std::vector<double> flatten(const std::vector<DoubleWellPair>& pairs) {
    std::vector<double> levels;
    for (const auto& p : pairs) {
        levels.push_back(p.even);
        levels.push_back(p.odd);
    }
    return levels;
}

long long count_below(const std::vector<double>& levels, double cut) {
    long long n = 0;
    for (double v : levels)
        if (v <= cut) ++n;
    return n;
}

} // namespace

TEST_CASE("phase volumes match the frozen quartic area and scale exactly") {
    const WellSpec quartic{WellKind::quartic, 1.0};
    const double unit = phase_volume(quartic, 1.0);
    CHECK(unit == doctest::Approx(kQuarticUnitArea).epsilon(1e-9));

    for (double level : {0.5, 2.0, 10.0, 100.0}) {
        const double direct = phase_volume(quartic, level);
        const double scaled = std::pow(level, 0.75) * unit;
        CHECK(std::abs(direct - scaled) <= 1e-6 * unit);
    }

    CHECK(phase_volume(quartic, 0.0) == 0.0);
    CHECK(phase_volume(quartic, -1.0) == 0.0);
    CHECK(phase_volume({WellKind::single_well, 1.0}, 0.5) == 0.0);
    CHECK(phase_volume({WellKind::single_well, 1.0}, 1.0) == 0.0);
    CHECK(phase_volume({WellKind::double_well, 1.0}, 0.0) == 0.0);

    // each well's area grows with the level, across the barrier too
    const WellSpec dw{WellKind::double_well, 1.0};
    double prev = 0.0;
    for (double level : {0.2, 0.6, 0.95, 1.05, 1.5, 3.0}) {
        const double cur = phase_volume(dw, level);
        CHECK(cur > prev);
        prev = cur;
    }

    CHECK_THROWS_AS(phase_volume({WellKind::quartic, 0.0}, 1.0), DomainError);
    CHECK_THROWS_AS(phase_volume(quartic, std::nan("")), DomainError);
}

TEST_CASE("double-well action: endpoints, monotonicity, both volume routes") {
    CHECK(action_phi(0.0) == 0.0);

    // small-energy slope of the harmonic bottom, 1 / (2 sqrt(2))
    CHECK(action_phi(1e-4) / 1e-4 ==
          doctest::Approx(kInvTwoSqrtTwo).epsilon(1e-2));

    double prev = 0.0;
    for (int i = 1; i <= 24; ++i) {
        const double e = 0.98 * i / 24.0;
        const double cur = action_phi(e);
        CHECK(cur > prev);
        prev = cur;
    }

    // the two-well phase volume is 4 pi Phi below the barrier; the two
    // sides go through different cancellation handling
    const double e = 0.3;
    CHECK(phase_volume({WellKind::double_well, 1.0}, e) ==
          doctest::Approx(4.0 * 3.14159265358979323846 * action_phi(e))
              .epsilon(1e-11));

    CHECK_THROWS_AS(action_phi(-0.1), DomainError);
    CHECK_THROWS_AS(action_phi(1.0), DomainError);
    CHECK_THROWS_AS(action_phi(1.5), DomainError);
}

TEST_CASE("action derivative matches finite differences of the action") {
    CHECK(std::abs(action_phi_derivative(1e-4) - kInvTwoSqrtTwo) <= 1e-3);

    const double d = 1e-4;
    const double fd = (action_phi(0.3 + d) - action_phi(0.3 - d)) / (2.0 * d);
    CHECK(action_phi_derivative(0.3) == doctest::Approx(fd).epsilon(1e-5));

    for (int i = 1; i <= 9; ++i) CHECK(action_phi_derivative(0.1 * i) > 0.0);

    bool flag = true;
    CHECK(action_phi_derivative(0.5, &flag) > 0.0);
    CHECK_FALSE(flag);
    const double near_top = action_phi_derivative(0.995, &flag);
    CHECK(flag);
    CHECK(std::isfinite(near_top));
    CHECK(near_top > action_phi_derivative(0.9)); // logarithmic growth

    CHECK_THROWS_AS(action_phi_derivative(0.0), DomainError);
    CHECK_THROWS_AS(action_phi_derivative(1.0), DomainError);
}

TEST_CASE("weyl counting tracks the leading term") {
    NumericsSpec spec;
    spec.eig_tol = 5e-3;
    spec.max_index = 78;
    const WeylCount w = weyl_count(0.0, 400.0, spec);
    CHECK(w.count > 0);
    CHECK(w.prediction > 0.0);
    const double ratio = static_cast<double>(w.count) / w.prediction;
    CHECK(ratio >= 0.95);
    CHECK(ratio <= 1.05);

    // below the ground state the exact count is zero
    NumericsSpec tiny;
    tiny.eig_tol = 1e-3;
    tiny.max_index = 3;
    const WeylCount none = weyl_count(0.0, 0.5, tiny);
    CHECK(none.count == 0);
    CHECK(none.prediction > 0.0);

    NumericsSpec small = spec;
    small.max_index = 10;
    CHECK_THROWS_AS(weyl_count(0.0, 400.0, small), DomainError);
}

TEST_CASE("inverted weyl law pins the growth of single eigenvalues") {
    NumericsSpec spec;
    spec.eig_tol = 5e-3;
    spec.max_index = 100;
    const std::vector<double> e = eigenvalues(0.0, spec);
    const double unit = phase_volume({WellKind::quartic, 1.0}, 1.0);
    const double predicted =
        std::pow(2.0 * 3.14159265358979323846 * 100.0 / unit, 4.0 / 3.0);
    CHECK(e[100] == doctest::Approx(predicted).epsilon(0.05));
}

TEST_CASE("deep single well: counting ratio and harmonic bottom") {
    NumericsSpec spec;
    spec.eig_tol = 0.4;
    spec.max_index = 200;
    const double ratio = single_well_check(-25.0, 4.0, spec);
    CHECK(ratio >= 0.9);
    CHECK(ratio <= 1.1);

    // E_k(mu) = mu^2 + (2k+1) sqrt(|mu|) + O(1) as mu -> -infinity
    NumericsSpec hspec;
    hspec.eig_tol = 1e-3;
    hspec.max_index = 1;
    const double e0 = eigenvalues(-100.0, hspec)[0];
    CHECK((e0 - 1e4) / 10.0 == doctest::Approx(1.0).epsilon(0.05));

    // the spectrum never dips below the potential floor mu^2
    NumericsSpec floor_spec;
    floor_spec.eig_tol = 1e-3;
    floor_spec.max_index = 0;
    CHECK(eigenvalues(-25.0, floor_spec)[0] >= 625.0);

    CHECK_THROWS_AS(single_well_check(-4.0, 4.0, spec), DomainError);
    CHECK_THROWS_AS(single_well_check(-25.0, 0.9, spec), DomainError);
}

TEST_CASE("double-well pairs: harmonic bottom and tunneling splittings") {
    const auto pairs = double_well_pairs(0.01, 1);
    REQUIRE(pairs.size() == 2);
    CHECK(pairs[0].index == 0);
    CHECK(pairs[1].index == 1);
    CHECK(pairs[0].even / 0.01 ==
          doctest::Approx(std::sqrt(2.0)).epsilon(0.02));
    // at h = 0.01 the tunneling gap is far below any representable scale
    CHECK(std::abs(pairs[0].splitting) / pairs[0].even <= 1e-6);
    CHECK(pairs[0].odd >= pairs[0].even - 1e-12);
    CHECK(pairs[1].even > pairs[0].odd);

    // the gap closes monotonically as h decreases, sampled where it is
    // still far above roundoff
    const double s10 = double_well_pairs(0.10, 0)[0].splitting;
    const double s08 = double_well_pairs(0.08, 0)[0].splitting;
    CHECK(s10 > s08);
    CHECK(s08 > 0.0);

    CHECK_THROWS_AS(double_well_pairs(0.0, 1), DomainError);
    CHECK_THROWS_AS(double_well_pairs(0.2, 1), DomainError);
    CHECK_THROWS_AS(double_well_pairs(0.01, -1), DomainError);
}

TEST_CASE("mu and h pictures of the double well agree level by level") {
    NumericsSpec mspec;
    mspec.eig_tol = 2e-4;
    mspec.max_index = 5;
    const std::vector<double> emu = eigenvalues(25.0, mspec);

    NumericsSpec dspec;
    dspec.eig_tol = 3e-7;
    const std::vector<double> edw = flatten(double_well_pairs(0.008, 2, dspec));

    // h = mu^{-3/2} = 0.008 at mu = 25; E_k(mu) = mu^2 E_k(h)
    for (int k = 0; k <= 5; ++k)
        CHECK(emu[k] == doctest::Approx(625.0 * edw[k]).epsilon(1e-4));
}

TEST_CASE("shifted counting windows are sandwiched monotonically") {
    const std::vector<double> levels = flatten(double_well_pairs(0.05, 5));
    const double cut = 0.55, eps = 0.1;
    // counting P_h + eps below `cut` is counting P_h below cut - eps
    const long long hi_shift = count_below(levels, cut - eps);
    const long long mid = count_below(levels, cut);
    const long long lo_shift = count_below(levels, cut + eps);
    CHECK(hi_shift <= mid);
    CHECK(mid <= lo_shift);
    CHECK(hi_shift + 2 <= lo_shift); // the windows genuinely differ here
    CHECK(lo_shift < static_cast<long long>(levels.size()));
}

TEST_CASE("quantization residuals stay O(h^2) across the window") {
    const double h = 0.005;
    NumericsSpec spec;
    spec.eig_tol = 1e-4;
    const auto res = bohr_sommerfeld_residuals(h, 0.05, 0.5, spec);
    REQUIRE(!res.empty());

    bool saw_even = false, saw_odd = false;
    for (const auto& b : res) {
        CHECK(std::abs(b.residual) <= 0.2 * h);
        CHECK_FALSE(b.ambiguous);
        CHECK(b.energy >= 0.05);
        CHECK(b.energy <= 0.5);
        saw_even = saw_even || b.family == Parity::even;
        saw_odd = saw_odd || b.family == Parity::odd;
    }
    CHECK(saw_even);
    CHECK(saw_odd);

    // lowest windowed level sits on the harmonic ladder sqrt(2)(2j+1)h
    const auto lowest = *std::min_element(
        res.begin(), res.end(),
        [](const BohrLevel& a, const BohrLevel& b) { return a.energy < b.energy; });
    const double harmonic = std::sqrt(2.0) * (2 * lowest.rank + 1) * h;
    CHECK(lowest.energy == doctest::Approx(harmonic).epsilon(0.05));

    CHECK(bohr_sommerfeld_residuals(h, 0.001, 0.004).empty());
    CHECK(bohr_sommerfeld_residuals(h, 0.5, 0.05).empty());
    CHECK_THROWS_AS(bohr_sommerfeld_residuals(h, 0.05, 1.0), DomainError);
    CHECK_THROWS_AS(bohr_sommerfeld_residuals(0.0, 0.05, 0.5), DomainError);
}
