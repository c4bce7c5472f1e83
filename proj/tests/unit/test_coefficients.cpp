#include "mvsde/coefficients.hpp"

#include <doctest.h>

#include <cmath>

using namespace mvsde;

namespace {

CoefficientSpec mean_field(double theta, double a_mf, double sigma) {
    CoefficientSpec spec;
    spec.drift = MeanFieldLinearDrift{theta, a_mf};
    spec.diffusion = ConstantDiffusion{Mat::Constant(1, 1, sigma)};
    return spec;
}

ParticleCloud cloud1d(std::initializer_list<double> values) {
    return ParticleCloud::from_flat(1, std::vector<double>(values));
}

}  // namespace

TEST_CASE("drift evaluation") {
    const ParticleCloud mu = cloud1d({0.0, 4.0});

    // Hand arithmetic -theta*x + a_mf*mean, cross-checked by direct summation
    // over the cloud.
    const CoefficientSpec spec = mean_field(1.0, 0.25, 0.5);
    double mean = 0.0;
    for (int i = 0; i < mu.size(); ++i) mean += mu.point(i)[0];
    mean /= mu.size();
    CHECK(eval_drift(spec, Vec::Constant(1, 2.0), mu)[0] ==
          doctest::Approx(-2.0 + 0.25 * mean).epsilon(1e-14));
    CHECK(eval_drift(spec, Vec::Constant(1, 2.0), mu)[0] == doctest::Approx(-1.5));

    CHECK(eval_drift(mean_field(1.0, 0.0, 1.0), Vec::Zero(1), mu)[0] == 0.0);

    CoefficientSpec kernel;
    kernel.drift = BoundedKernelDrift{2.0, 0.0};
    kernel.diffusion = ConstantDiffusion{Mat::Identity(1, 1)};
    CHECK(eval_drift(kernel, Vec::Constant(1, 3.0), mu)[0] == doctest::Approx(-6.0));

    // Bounded-kernel interaction averages tanh over the cloud.
    kernel.drift = BoundedKernelDrift{1.0, 2.0};
    const double expected = -3.0 + 2.0 * 0.5 * (std::tanh(0.0) + std::tanh(4.0));
    CHECK(eval_drift(kernel, Vec::Constant(1, 3.0), mu)[0] ==
          doctest::Approx(expected).epsilon(1e-14));

    CHECK_THROWS_AS(eval_drift(spec, Vec::Zero(2), mu), ConfigError);
}

TEST_CASE("diffusion evaluation") {
    const ParticleCloud mu = cloud1d({1.0, 3.0});  // mean 2

    CHECK(eval_diffusion(mean_field(1.0, 0.0, 0.5), Vec::Zero(1), mu)(0, 0) == 0.5);

    CoefficientSpec ml = mean_field(1.0, 0.0, 1.0);
    ml.diffusion = MeanLinearDiffusion{1.0, 0.1};
    CHECK(eval_diffusion(ml, Vec::Zero(1), mu)(0, 0) == doctest::Approx(1.2).epsilon(1e-14));

    CoefficientSpec sl = mean_field(1.0, 0.0, 1.0);
    sl.diffusion = StateLinearDiffusion{1.0, 0.0};
    CHECK(eval_diffusion(sl, Vec::Constant(1, 9.0), mu)(0, 0) == 1.0);
    sl.diffusion = StateLinearDiffusion{1.0, 0.25};
    CHECK(eval_diffusion(sl, Vec::Constant(1, 2.0), mu)(0, 0) == doctest::Approx(1.5));
}

TEST_CASE("hypothesis certification accepts dominating constants") {
    const CoefficientSpec spec = mean_field(1.0, 0.25, 0.5);
    // Symbolic pair is (L3, L4) = (0.25, 1.75); the declared (0.5, 1.75)
    // dominates it.
    AssumptionConstants constants{1.0, 0.25, 0.0, 0.5, 1.75, true};
    const CertificationReport report = certify_hypotheses(spec, constants, 4000);
    CHECK(report.passed());

    // Tight symbolic pair passes with nonnegative slack up to rounding.
    AssumptionConstants tight{1.0, 0.25, 0.0, 0.25, 1.75, true};
    const CertificationReport tight_report = certify_hypotheses(spec, tight, 4000);
    CHECK(tight_report.passed());
    for (const auto& check : tight_report.checks) {
        CHECK(check.worst_slack >= -1e-10);
    }
}

TEST_CASE("hypothesis certification catches non-dissipative declarations") {
    // theta = 0.1 with unit mean coupling: true lambda = 2*theta - 2*a_mf < 0.
    const CoefficientSpec spec = mean_field(0.1, 1.0, 0.5);
    AssumptionConstants constants{2.0, 2.0, 0.0, 1.0, 1.2, true};
    const CertificationReport report = certify_hypotheses(spec, constants, 4000);
    CHECK_FALSE(report.passed());
    bool witnessed = false;
    for (const auto& check : report.checks) {
        if (check.violated) witnessed = witnessed || !check.witness.empty();
    }
    CHECK(witnessed);
}

TEST_CASE("zero drift with constant diffusion certifies with the norm bound") {
    CoefficientSpec spec = mean_field(0.0, 0.0, 1.0);
    AssumptionConstants constants{1.0, 0.0, 0.0, 0.0, 0.0, false};
    CHECK(certify_hypotheses(spec, constants, 1000).passed());
    CHECK_THROWS_AS(certify_hypotheses(spec, constants, 999), ConfigError);
}

TEST_CASE("lambda accessor") {
    CHECK(lambda_of({1.0, 0.0, 0.0, 0.5, 2.0, true}) == doctest::Approx(1.5));
    CHECK(lambda_of({1.0, 0.0, 0.0, 0.7, 0.7, true}) == 0.0);
    // Symbolic dissipativity of the benchmark drift: lambda = 2*theta - 2*a_mf.
    const double theta = 1.0, a_mf = 0.25;
    AssumptionConstants symbolic{1.0, a_mf, 0.0, a_mf, 2.0 * theta - a_mf, true};
    CHECK(lambda_of(symbolic) == doctest::Approx(2.0 * theta - 2.0 * a_mf));
}

TEST_CASE("perturbation family") {
    CoefficientSpec spec = mean_field(1.0, 0.25, 0.5);
    spec.perturbation = {1.0, 0.25};
    const ParticleCloud mu = cloud1d({0.5, 1.5});

    const Vec x = Vec::Constant(1, 0.7);
    const Vec base_drift = eval_drift(spec, x, mu);
    const Mat base_sigma = eval_diffusion(spec, x, mu);
    for (int n : {1, 3, 9}) {
        const CoefficientSpec indexed = spec.at_index(n);
        CHECK((eval_drift(indexed, x, mu) - base_drift).norm() ==
              doctest::Approx(std::abs(std::sin(0.7)) / n).epsilon(1e-12));
        CHECK((eval_diffusion(indexed, x, mu) - base_sigma).norm() ==
              doctest::Approx(0.25 / n).epsilon(1e-12));
    }
    CHECK_THROWS_AS(spec.at_index(0), ConfigError);
}
