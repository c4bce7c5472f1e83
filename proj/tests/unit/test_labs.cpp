#include "mvsde/convergence.hpp"
#include "mvsde/ergodicity.hpp"
#include "mvsde/wasserstein.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace mvsde;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vec v1(double x) { return Vec::Constant(1, x); }

CoefficientSpec coeffs(double theta, double a_mf, double sigma, double c_b = 0.0,
                       double c_sigma = 0.0) {
    CoefficientSpec spec;
    spec.drift = MeanFieldLinearDrift{theta, a_mf};
    spec.diffusion = ConstantDiffusion{Mat::Constant(1, 1, sigma)};
    spec.perturbation = {c_b, c_sigma};
    return spec;
}

AssumptionConstants dissipative_constants(double theta, double a_mf, double extra = 0.0) {
    // Symbolic pair for the mean-field linear drift with constant diffusion;
    // `extra` widens L3/L4 to cover a sin/n perturbation scale.
    AssumptionConstants constants;
    constants.growth = 2.0;
    constants.l1 = std::max(a_mf + extra, 0.1);
    constants.l2 = 0.0;
    constants.l3 = a_mf;
    constants.l4 = 2.0 * theta - a_mf - 2.0 * extra;
    constants.dissipative = true;
    return constants;
}

SdeSystem reflected_system(double theta, double a_mf, double sigma, InitialLaw initial) {
    return SdeSystem{OperatorSpec::normal_cone(BoxSet{v1(0.0), v1(kInf)}), 0.0,
                     coeffs(theta, a_mf, sigma), std::move(initial)};
}

SolverConfig small_config(int particles, double horizon, int stride) {
    SolverConfig cfg;
    cfg.step = 2e-3;
    cfg.particles = particles;
    cfg.horizon = horizon;
    cfg.seed = 07770;
    cfg.record_stride = stride;
    return cfg;
}

}  // namespace

TEST_CASE("contraction from identical clouds is identically zero") {
    const SdeSystem sys = reflected_system(1.0, 0.25, 0.5, PointMassInit{v1(1.0)});
    const SolverConfig cfg = small_config(100, 0.5, 50);
    const ParticleCloud start =
        materialize_initial_cloud(UniformBoxInit{v1(0.0), v1(2.0)}, cfg.particles, cfg.seed);
    const ContractionReport report =
        contraction_experiment(sys, start, start, cfg, dissipative_constants(1.0, 0.25),
                               ContractionSettings{0.1, 0.4, 0.5, std::nullopt});
    for (const double w2 : report.w2_values) CHECK(w2 == 0.0);
    CHECK(report.passed());
}

TEST_CASE("deterministic contraction fits twice the state rate") {
    // No noise: the coupled gap decays exactly like exp(-theta t), so the
    // fitted log W2^2 slope is -2*theta up to O(h).
    SdeSystem sys{OperatorSpec::zero(1), 0.0, coeffs(1.0, 0.0, 0.0), PointMassInit{v1(0.0)}};
    SolverConfig cfg = small_config(8, 1.0, 25);
    cfg.step = 1e-3;
    AssumptionConstants constants = dissipative_constants(1.0, 0.0);
    const ParticleCloud mu0 = materialize_initial_cloud(PointMassInit{v1(0.0)}, 8, cfg.seed);
    const ParticleCloud nu0 = materialize_initial_cloud(PointMassInit{v1(1.0)}, 8, cfg.seed);
    const ContractionReport report = contraction_experiment(
        sys, mu0, nu0, cfg, constants, ContractionSettings{0.1, 0.9, 0.5, std::nullopt});
    CHECK(report.fit_available);
    CHECK(report.fitted_rate == doctest::Approx(-2.0).epsilon(0.02));
    CHECK(report.passed());
}

TEST_CASE("contraction refuses non-dissipative systems") {
    const SdeSystem sys = reflected_system(0.1, 1.0, 0.5, PointMassInit{v1(1.0)});
    AssumptionConstants bogus{2.0, 2.0, 0.0, 1.0, 1.2, true};
    const SolverConfig cfg = small_config(50, 0.5, 50);
    const ParticleCloud start = materialize_initial_cloud(PointMassInit{v1(1.0)}, 50, cfg.seed);
    CHECK_THROWS_AS(contraction_experiment(sys, start, start, cfg, bogus,
                                           ContractionSettings{0.1, 0.4, 0.5, std::nullopt}),
                    CertificationError);

    AssumptionConstants undeclared = bogus;
    undeclared.dissipative = false;
    CHECK_THROWS_AS(contraction_experiment(sys, start, start, cfg, undeclared,
                                           ContractionSettings{0.1, 0.4, 0.5, std::nullopt}),
                    CertificationError);
}

TEST_CASE("invariant estimate converges to the deterministic fixed point") {
    // Noise-free contraction toward the origin: the invariant measure is the
    // point mass at zero.
    SdeSystem sys{OperatorSpec::zero(1), 0.0, coeffs(1.0, 0.0, 0.0), PointMassInit{v1(2.0)}};
    SolverConfig cfg = small_config(16, 12.0, 1000);
    const InvariantEstimate est =
        estimate_invariant_measure(sys, cfg, 6.0, dissipative_constants(1.0, 0.0));
    CHECK(est.second_moment <= 1e-8);
    CHECK(est.cloud.size() == 16);
}

TEST_CASE("free mean-reverting invariant estimate matches the Gaussian law") {
    SdeSystem sys{OperatorSpec::zero(1), 0.0, coeffs(1.0, 0.0, 1.0), PointMassInit{v1(0.0)}};
    SolverConfig cfg = small_config(2000, 8.0, 500);
    const InvariantEstimate est =
        estimate_invariant_measure(sys, cfg, 4.0, dissipative_constants(1.0, 0.0));
    const double gap = reference_gap_w2(est, NormalLaw{0.0, 1.0 / std::sqrt(2.0)});
    CHECK(gap <= 0.08);
}

TEST_CASE("reflected invariant estimate matches the half-normal quantiles") {
    const SdeSystem sys = reflected_system(1.0, 0.0, 1.0, PointMassInit{v1(0.5)});
    SolverConfig cfg = small_config(2000, 8.0, 500);
    const InvariantEstimate est =
        estimate_invariant_measure(sys, cfg, 4.0, dissipative_constants(1.0, 0.0));
    const HalfNormalLaw law{1.0 / std::sqrt(2.0)};
    CHECK(reference_gap_w2(est, law) <= 0.08);
    // Analytic CDF inversion at interior quantile levels.
    for (int k = 10; k <= 90; k += 10) {
        const double level = k / 100.0;
        CHECK(std::abs(quantile(est.cloud, level) - reference_quantile(law, level)) <= 0.1);
    }
}

TEST_CASE("ergodicity experiment near equilibrium stays at the floor") {
    const SdeSystem sys = reflected_system(1.0, 0.25, 0.5, PointMassInit{v1(1.0)});
    SolverConfig cfg = small_config(800, 8.0, 500);
    const AssumptionConstants constants = dissipative_constants(1.0, 0.25);
    const InvariantEstimate est = estimate_invariant_measure(sys, cfg, 4.0, constants);

    ErgodicitySettings settings{4.0, 2.0, 0.5};
    const ErgodicityReport report =
        ergodicity_bound_experiment(sys, est.cloud, cfg, constants, settings);
    CHECK(report.pass);
    for (const auto& row : report.rows) {
        CHECK(std::sqrt(row.w2_sq) <= 6.0 * report.noise_floor);
    }
}

TEST_CASE("uniform moment experiment") {
    // Noise-free dissipative system pinned at the origin: zero at every
    // horizon.
    SdeSystem still{OperatorSpec::zero(1), 0.0, coeffs(1.0, 0.0, 0.0), PointMassInit{v1(0.0)}};
    SolverConfig cfg = small_config(16, 2.0, 100);
    const UniformMomentReport zero_report =
        uniform_moment_experiment(still, cfg, {1.0, 2.0}, dissipative_constants(1.0, 0.0));
    CHECK(zero_report.pass);
    for (const auto& row : zero_report.rows) CHECK(row.moment_sup == 0.0);

    // Stationarity: the sup stabilizes across growing horizons.
    const SdeSystem sys = reflected_system(1.0, 0.25, 0.5, PointMassInit{v1(0.0)});
    SolverConfig longer = small_config(400, 2.0, 250);
    const UniformMomentReport report =
        uniform_moment_experiment(sys, longer, {10.0, 20.0, 40.0},
                                  dissipative_constants(1.0, 0.25));
    CHECK(report.pass);

    // The origin start is part of the contract.
    SdeSystem offset = sys;
    offset.initial = PointMassInit{v1(1.0)};
    CHECK_THROWS_AS(uniform_moment_experiment(offset, longer, {1.0, 2.0},
                                              dissipative_constants(1.0, 0.25)),
                    ConfigError);
}

TEST_CASE("penalization with the free operator reports zero gaps") {
    SdeSystem sys{OperatorSpec::zero(1), 0.0, coeffs(1.0, 0.0, 1.0), PointMassInit{v1(0.5)}};
    SolverConfig cfg = small_config(100, 1.0, 100);
    const PenalizationReport report =
        penalization_experiment(sys, {0.2, 0.1}, cfg, 0.05, TrendSettings{});
    for (const auto& row : report.rows) CHECK(row.sup_mse == 0.0);
    CHECK(report.passed());

    CHECK_THROWS_AS(penalization_experiment(sys, {0.1, 0.2}, cfg, 0.05, TrendSettings{}),
                    ConfigError);
    CHECK_THROWS_AS(penalization_experiment(sys, {}, cfg, 0.05, TrendSettings{}), ConfigError);
}

TEST_CASE("coefficient-only perturbation gaps shrink quadratically") {
    // The O(1/n) drift perturbation yields O(1/n^2) mean-square gaps; check
    // gap(16) <= gap(1)/4 across three seeds.
    Vec lo = v1(0.0), hi = v1(kInf);
    OperatorSequenceSpec ops{OperatorSpec::normal_cone(BoxSet{lo, hi}),
                             OperatorSequenceSpec::Family::Constant, 0.0, 1.0, 0.5};
    SequenceSystem family{ops, coeffs(1.0, 0.25, 0.5, 1.0, 0.0),
                          UniformBoxInit{v1(0.0), v1(2.0)}, {1, 16}};
    AssumptionConstants constants = dissipative_constants(1.0, 0.25, 1.0);
    constants.dissipative = false;

    for (std::uint64_t seed : {11ULL, 22ULL, 33ULL}) {
        SolverConfig cfg = small_config(300, 1.0, 100);
        cfg.seed = seed;
        const ConvergenceReport report =
            solution_convergence_experiment(family, cfg, constants, TrendSettings{});
        REQUIRE(report.rows.size() == 2);
        CHECK(report.rows[1].sup_mse <= report.rows[0].sup_mse / 4.0);
    }
}

TEST_CASE("hypothesis sequence checks") {
    Vec lo = v1(0.0), hi = v1(kInf);
    std::vector<Vec> grid;
    for (int i = 0; i <= 10; ++i) grid.push_back(v1(0.2 * i));

    // Constant family: all deviations vanish identically.
    OperatorSequenceSpec constant{OperatorSpec::normal_cone(BoxSet{lo, hi}),
                                  OperatorSequenceSpec::Family::Constant, 0.0, 1.0, 0.5};
    SequenceSystem family{constant, coeffs(1.0, 0.25, 0.5), PointMassInit{v1(1.0)}, {1, 2, 4}};
    const DeviationReport zeros = hypothesis_sequence_checks(family, 0.1, grid, family.indices);
    CHECK(zeros.pass);
    for (const auto& row : zeros.rows) {
        CHECK(row.operator_dev == 0.0);
        CHECK(row.drift_dev == 0.0);
        CHECK(row.diffusion_dev == 0.0);
    }

    // sin/n drift perturbation never exceeds c_b/n.
    SequenceSystem perturbed{constant, coeffs(1.0, 0.25, 0.5, 0.8, 0.0),
                             PointMassInit{v1(1.0)}, {1, 2, 4, 8}};
    const DeviationReport report = hypothesis_sequence_checks(perturbed, 0.1, grid,
                                                              perturbed.indices);
    CHECK(report.pass);
    for (const auto& row : report.rows) {
        CHECK(row.drift_dev <= 0.8 / row.n + 1e-15);
    }
}

TEST_CASE("invariant convergence with a constant family reports exact zeros") {
    Vec lo = v1(0.0), hi = v1(kInf);
    OperatorSequenceSpec constant{OperatorSpec::normal_cone(BoxSet{lo, hi}),
                                  OperatorSequenceSpec::Family::Constant, 0.0, 1.0, 0.5};
    SequenceSystem family{constant, coeffs(1.0, 0.25, 0.5), UniformBoxInit{v1(0.0), v1(2.0)},
                          {1, 2}};
    SolverConfig cfg = small_config(300, 6.0, 500);
    const InvariantConvergenceReport report = invariant_convergence_experiment(
        family, cfg, dissipative_constants(1.0, 0.25), InvariantConvergenceSettings{3.0});
    CHECK(report.passed());
    CHECK(report.noise_floor > 0.0);
    for (const auto& row : report.rows) {
        CHECK(row.w2_gap == 0.0);
        CHECK(row.w1_gap == 0.0);
        CHECK(row.second_moment <= report.moment_bound);
    }
}
