#include <doctest.h>

#include <cmath>
#include <vector>

#include "engel/detail/eigen_table.hpp"
#include "engel/detail/quartic_cache.hpp"
#include "engel/errors.hpp"
#include "engel/oscillator.hpp"
#include "engel/spectral_sums.hpp"

using namespace engel;

namespace {

// Regression baseline for the dual-sphere constant at the default
// truncation (m_max 40, bound 40, extrapolated tails). Frozen from the
// first converged evaluation; doubling either cutoff moves the value by
// less than 4e-6 relative.
constexpr double kSphereBaseline = 22.3910696369;

TruncationSpec small_spec() {
    TruncationSpec trunc;
    trunc.m_max = 8;
    return trunc;
}

} // namespace

TEST_CASE("truncation spec validation rejects out-of-contract fields") {
    CHECK_THROWS_AS(summability_integral(0.0), DomainError);
    CHECK_THROWS_AS(summability_integral(-2.5), DomainError);

    TruncationSpec trunc = small_spec();
    trunc.m_max = 7;
    CHECK_THROWS_AS(summability_integral(2.5, trunc), DomainError);

    trunc = small_spec();
    trunc.mu_grid = MuQuadrature::legendre(12.0, 4);
    trunc.mu_grid.bound = 9.0; // nodes now outside the claimed bound
    CHECK_THROWS_AS(summability_integral(2.5, trunc), DomainError);

    trunc = small_spec();
    trunc.mu_grid.weights.pop_back();
    CHECK_THROWS_AS(summability_integral(2.5, trunc), DomainError);

    trunc = small_spec();
    trunc.rel_tol = 0.0;
    CHECK_THROWS_AS(sphere_constant(trunc), DomainError);

    trunc = small_spec();
    trunc.mu0 = -1.0;
    CHECK_THROWS_AS(summability_integral(2.5, trunc), DomainError);

    CHECK_THROWS_AS(MuQuadrature::legendre(-1.0, 4), DomainError);
    CHECK_THROWS_AS(MuQuadrature::legendre(10.0, 0), DomainError);
}

TEST_CASE("mu quadrature integrates low polynomials exactly") {
    const MuQuadrature grid = MuQuadrature::legendre(10.0, 3);
    double mass = 0.0, quad = 0.0;
    for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
        mass += grid.weights[i];
        quad += grid.weights[i] * grid.nodes[i] * grid.nodes[i];
    }
    CHECK(mass == doctest::Approx(20.0).epsilon(1e-13));
    CHECK(quad == doctest::Approx(2000.0 / 3.0).epsilon(1e-13));
}

TEST_CASE("eigenvalue table matches direct solves off the sample points") {
    const auto& table = detail::eigen_table(12);

    // central window, between samples of both the fine and the coarse chart
    for (double mu : {0.37, 1.13, -2.71, 6.63, 13.37, 27.5}) {
        const auto direct = detail::quartic_sweep_spectrum(mu, 12, 1e-7);
        for (int m = 0; m <= 12; ++m) {
            const double rel =
                std::abs(table.energy(m, mu) - direct->e_rich[m]) / direct->e_rich[m];
            CHECK(rel < 3e-4);
        }
    }

    // deep charts, where the rescaled level functions are nearly flat
    for (double mu : {55.5, 123.4, -61.2}) {
        const auto direct = detail::quartic_sweep_spectrum(mu, 12, 1e-7);
        for (int m = 0; m <= 12; ++m) {
            const double rel =
                std::abs(table.energy(m, mu) - direct->e_rich[m]) / direct->e_rich[m];
            CHECK(rel < 1e-6);
        }
    }

    // far double-well asymptote E_0 ~ sqrt(2 mu)
    CHECK(table.energy(0, 1e6) / (std::sqrt(2.0) * 1e3) == doctest::Approx(1.0).epsilon(1e-3));

    // far single-well asymptote E_m ~ mu^2
    CHECK(table.energy(3, -1e4) / 1e8 == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("eigenvalue table respects the anisotropic frequency scaling") {
    const auto& table = detail::eigen_table(8);
    const double nu = 3.7, lambda = 0.9, alpha = 1.7;
    for (int m : {0, 3, 8}) {
        const double base = table.rescaled(m, nu, lambda);
        const double scaled = table.rescaled(m, std::pow(alpha, 4.0) * nu,
                                             std::pow(alpha, 3.0) * lambda);
        CHECK(scaled / (alpha * alpha * base) == doctest::Approx(1.0).epsilon(1e-12));
    }

    // agrees with the solver-backed public evaluation
    const double direct = rescaled_energy(rescaled_frequency(1.5, 0.7), 2);
    CHECK(table.rescaled(2, 1.5, 0.7) ==
          doctest::Approx(direct).epsilon(3e-4));

    CHECK_THROWS_AS(table.rescaled(0, 1.0, 0.0), DomainError);
    CHECK_THROWS_AS(table.energy(13, 0.0), DomainError);
    CHECK_THROWS_AS(table.energy(0, std::nan("")), DomainError);
}

TEST_CASE("summability regime decomposition partitions the partial value") {
    const Summability sum = summability_integral(2.5, small_spec());
    const RegimeReport& rep = sum.report;
    CHECK(rep.central + rep.negative + rep.positive == sum.partial_value);
    CHECK(rep.central > 0.0);
    CHECK(rep.negative > 0.0);
    CHECK(rep.positive > 0.0);
    CHECK(rep.positive_bottom <= rep.positive);
    // deep single-well energies grow like mu^2, so that regime is tiny
    CHECK(rep.negative < 1e-3 * sum.partial_value);
    // the mu >> 0 mass sits almost entirely in the bottom stratum
    CHECK(rep.positive_bottom > 0.9 * rep.positive);
}

TEST_CASE("summability diagnostics separate convergent from divergent exponents") {
    const Summability diverging = summability_integral(1.9, small_spec());
    CHECK_FALSE(diverging.report.tail_converging);
    CHECK(diverging.report.tail_exponent > -1.0);
    CHECK(diverging.report.tail_exponent < -0.85);

    const Summability converging = summability_integral(2.5, small_spec());
    CHECK(converging.report.tail_converging);
    CHECK(converging.report.tail_exponent < -1.15);
    CHECK(converging.report.tail_exponent > -1.35);

    const Summability strongly = summability_integral(3.5, small_spec());
    CHECK(strongly.report.tail_converging);
    CHECK(strongly.report.tail_exponent < -1.6);
    CHECK(strongly.report.tail_exponent > -1.9);
}

TEST_CASE("summability partial value stabilizes under doubled truncation") {
    TruncationSpec doubled;
    doubled.m_max = 16;
    doubled.mu_grid = MuQuadrature::legendre(80.0, 72);
    const double base = summability_integral(3.5, small_spec()).partial_value;
    const double refined = summability_integral(3.5, doubled).partial_value;
    CHECK(std::abs(refined - base) / refined < 0.01);
}

TEST_CASE("summability decreases in gamma until the shallow-pocket levels take over") {
    // The ground level dips to about 0.55 near mu = 1. Terms with E < 1
    // grow with gamma, so the decrease in gamma holds through gamma = 3
    // and genuinely reverses beyond.
    TruncationSpec trunc;
    double previous = summability_integral(2.0, trunc).partial_value;
    for (double gamma : {2.2, 2.6, 3.0}) {
        const double value = summability_integral(gamma, trunc).partial_value;
        CHECK(value < previous);
        previous = value;
    }
    CHECK(summability_integral(3.5, trunc).partial_value > previous);
}

TEST_CASE("sphere constant reproduces the frozen baseline with a tight interval") {
    const SphereConstant sphere = sphere_constant();
    CHECK(sphere.value == doctest::Approx(kSphereBaseline).epsilon(1e-6));
    CHECK(sphere.lower <= sphere.value);
    CHECK(sphere.value <= sphere.upper);
    CHECK((sphere.upper - sphere.lower) / sphere.value < 0.01);

    // tail anatomy: value = partial + fitted tails, exactly as assembled
    CHECK(sphere.value == sphere.partial + (sphere.tail_positive + sphere.tail_levels));
    CHECK(sphere.tail_positive > 0.0);
    CHECK(sphere.tail_positive < 0.01 * sphere.value);
    CHECK(sphere.tail_levels > 0.0);
    CHECK(sphere.tail_levels < 1e-4);
    CHECK(sphere.negative_bound < 1e-7);
}

TEST_CASE("sphere constant m = 0 integrand is negligible at mu = -10") {
    const auto& table = detail::eigen_table(8);
    const double e0 = table.energy(0, -10.0);
    CHECK(e0 >= 100.0);
    CHECK(std::pow(e0, -3.5) <= 1e-7);
}

TEST_CASE("sphere constant is stable under refined truncations") {
    const SphereConstant base = sphere_constant(small_spec());

    TruncationSpec more_levels = small_spec();
    more_levels.m_max = 16;
    const SphereConstant refined = sphere_constant(more_levels);
    CHECK(std::abs(refined.value - base.value) / refined.value < 0.005);

    TruncationSpec wider = small_spec();
    wider.mu_grid = MuQuadrature::legendre(60.0, 54);
    const SphereConstant wide = sphere_constant(wider);
    CHECK(wide.value >= base.lower);
    CHECK(wide.value <= base.upper);
}

TEST_CASE("analytic tail mode keeps the bare partial sum and widens upward") {
    TruncationSpec trunc = small_spec();
    trunc.tail_mode = TailMode::analytic_bound;
    const SphereConstant bounded = sphere_constant(trunc);
    CHECK(bounded.value == bounded.partial);

    const SphereConstant extrapolated = sphere_constant(small_spec());
    CHECK(bounded.value < extrapolated.value);
    CHECK(bounded.upper >= extrapolated.value);
    CHECK(bounded.lower <= extrapolated.lower);
}

TEST_CASE("radial profile families validate and evaluate") {
    const RadialProfile exp1 = RadialProfile::exponential(1.0);
    CHECK(exp1(0.0) == 1.0);
    CHECK(exp1(1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    CHECK(exp1.weighted_norm() == doctest::Approx(std::tgamma(3.5)).epsilon(1e-14));
    CHECK(exp1.weighted_integral() == exp1.weighted_norm());

    const RadialProfile exp2 = RadialProfile::exponential(2.0);
    CHECK(exp2.weighted_norm() ==
          doctest::Approx(std::tgamma(3.5) * std::pow(2.0, -3.5)).epsilon(1e-14));

    const RadialProfile ramp = RadialProfile::exponential(1.0, 1);
    CHECK(ramp(0.0) == 0.0);
    CHECK(ramp.weighted_norm() == doctest::Approx(std::tgamma(4.5)).epsilon(1e-14));

    CHECK_THROWS_AS(RadialProfile::exponential(0.0), DomainError);
    CHECK_THROWS_AS(RadialProfile::exponential(-1.0), DomainError);
    CHECK_THROWS_AS(RadialProfile::exponential(1.0, -1), DomainError);

    const RadialProfile power = RadialProfile::power_cutoff(2.0, 1.0);
    CHECK(power(0.5) == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(power(1.5) == 0.0);
    CHECK(power.weighted_norm() == doctest::Approx(1.0 / 1.5).epsilon(1e-14));
    CHECK_THROWS_AS(RadialProfile::power_cutoff(3.5, 1.0), DomainError);
    CHECK_THROWS_AS(RadialProfile::power_cutoff(4.0, 1.0), DomainError);
    CHECK_THROWS_AS(RadialProfile::power_cutoff(2.0, 0.0), DomainError);

    const RadialProfile hat = RadialProfile::tabulated({1.0, 2.0, 3.0}, {0.0, 1.0, 0.0});
    CHECK(hat(2.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(hat(1.5) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(hat(0.5) == 0.0);
    CHECK(hat(3.5) == 0.0);
    CHECK(hat.weighted_integral() > 0.0);
    CHECK(hat.weighted_norm() ==
          doctest::Approx(hat.weighted_integral()).epsilon(1e-10));

    // a sign change makes the norm strictly larger than the signed integral
    const RadialProfile wave = RadialProfile::tabulated({1.0, 2.0, 3.0}, {-1.0, 1.0, -1.0});
    CHECK(wave.weighted_norm() > std::abs(wave.weighted_integral()));

    CHECK_THROWS_AS(RadialProfile::tabulated({1.0}, {1.0}), DomainError);
    CHECK_THROWS_AS(RadialProfile::tabulated({1.0, 2.0}, {1.0}), DomainError);
    CHECK_THROWS_AS(RadialProfile::tabulated({0.0, 1.0}, {1.0, 1.0}), DomainError);
    CHECK_THROWS_AS(RadialProfile::tabulated({2.0, 1.0}, {1.0, 1.0}), DomainError);
}

TEST_CASE("support bound caps the profile beyond the returned radius") {
    const RadialProfile exp1 = RadialProfile::exponential(1.0);
    const double r_star = exp1.support_bound(1e-4);
    CHECK(exp1(r_star) <= 1e-4);
    CHECK(r_star > 9.0);
    CHECK(r_star < 10.0);

    CHECK(RadialProfile::power_cutoff(2.0, 3.0).support_bound(1e-6) == 3.0);
    CHECK(RadialProfile::tabulated({1.0, 2.0}, {1.0, 0.0}).support_bound(1e-6) == 2.0);
    CHECK_THROWS_AS(exp1.support_bound(0.0), DomainError);
}

TEST_CASE("magic formula agrees across its two independent integration routes") {
    TruncationSpec trunc;
    trunc.m_max = 12;
    trunc.mu_grid = MuQuadrature::legendre(30.0, 28);
    const SphereConstant sphere = sphere_constant(trunc);

    const RadialProfile profiles[] = {RadialProfile::exponential(1.0),
                                      RadialProfile::exponential(2.0),
                                      RadialProfile::exponential(1.0, 1)};
    for (const RadialProfile& profile : profiles) {
        MagicDetail det;
        const double lhs = magic_lhs(profile, trunc, &det);
        const double rhs = magic_rhs(profile, sphere);
        CHECK(std::abs(lhs - rhs) / rhs < 0.01);

        // evenness in lambda: the lambda > 0 half is exactly half the total
        CHECK(2.0 * det.lambda_half == lhs);
        CHECK(det.tail_estimate < 0.01 * lhs);
        CHECK(det.nu_low < 0.0);
        CHECK(det.nu_high > 0.0);
        CHECK(det.lambda_span > 0.0);
    }
}

TEST_CASE("magic lhs of the zero profile is zero") {
    const RadialProfile zero = RadialProfile::tabulated({1.0, 2.0}, {0.0, 0.0});
    MagicDetail det;
    CHECK(magic_lhs(zero, small_spec(), &det) == 0.0);
    CHECK(det.lambda_half == 0.0);
    CHECK(det.tail_estimate == 0.0);
}

TEST_CASE("magic rhs has the closed-form radial factors") {
    SphereConstant sphere;
    sphere.value = 2.0; // synthetic constant; only the radial factor matters
    const double base = magic_rhs(RadialProfile::exponential(1.0), sphere);
    CHECK(base == doctest::Approx(2.0 * std::tgamma(3.5)).epsilon(1e-14));
    const double halved = magic_rhs(RadialProfile::exponential(2.0), sphere);
    CHECK(halved / base == doctest::Approx(std::pow(2.0, -3.5)).epsilon(1e-13));
    const double shifted = magic_rhs(RadialProfile::exponential(1.0, 1), sphere);
    CHECK(shifted == doctest::Approx(2.0 * std::tgamma(4.5)).epsilon(1e-14));
}

TEST_CASE("heat trace density follows the exact power law in time") {
    SphereConstant sphere;
    sphere.value = 22.4;
    const double pi = std::acos(-1.0);
    CHECK(heat_trace_density(1.0, sphere) ==
          doctest::Approx(std::pow(2.0 * pi, -3.0) * 22.4 * std::tgamma(3.5))
              .epsilon(1e-14));
    CHECK(heat_trace_density(4.0, sphere) / heat_trace_density(1.0, sphere) ==
          doctest::Approx(1.0 / 128.0).epsilon(1e-13));
    CHECK_THROWS_AS(heat_trace_density(0.0, sphere), DomainError);
    CHECK_THROWS_AS(heat_trace_density(-1.0, sphere), DomainError);
}

TEST_CASE("heat trace density built from a truncation matches the sphere overload") {
    const TruncationSpec trunc = small_spec();
    const SphereConstant sphere = sphere_constant(trunc);
    CHECK(heat_trace_density(2.0, trunc) ==
          doctest::Approx(heat_trace_density(2.0, sphere)).epsilon(1e-14));
}
