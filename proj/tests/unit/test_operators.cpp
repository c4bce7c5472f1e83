#include "mvsde/operators.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace mvsde;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vec v1(double x) { return Vec::Constant(1, x); }

Vec v2(double x, double y) {
    Vec v(2);
    v << x, y;
    return v;
}

OperatorSpec half_line() {
    return OperatorSpec::normal_cone(BoxSet{v1(0.0), v1(kInf)});
}

OperatorSpec unit_interval_sym() {
    return OperatorSpec::normal_cone(BoxSet{v1(-1.0), v1(1.0)});
}

// Grid oracle: the resolvent of a subdifferential minimizes
// y -> eps*w*|y| + 0.5*(y - x)^2.
double prox_abs_grid_oracle(double weight, double eps, double x) {
    double best_y = 0.0;
    double best_val = std::numeric_limits<double>::infinity();
    for (double y = -2.0; y <= 2.0; y += 1e-5) {
        const double val = eps * weight * std::abs(y) + 0.5 * (y - x) * (y - x);
        if (val < best_val) {
            best_val = val;
            best_y = y;
        }
    }
    return best_y;
}

// Moreau-envelope value for f(y) = y^2/2 by grid minimization.
double quadratic_envelope_grid(double eps, double x) {
    double best = std::numeric_limits<double>::infinity();
    for (double y = -10.0; y <= 10.0; y += 1e-4) {
        best = std::min(best, 0.5 * y * y + (y - x) * (y - x) / (2.0 * eps));
    }
    return best;
}

}  // namespace

TEST_CASE("resolvent closed forms") {
    CHECK(resolvent(OperatorSpec::linear(Mat::Identity(1, 1)), 1.0, v1(2.0))[0] ==
          doctest::Approx(1.0).epsilon(1e-14));
    CHECK(resolvent(half_line(), 0.5, v1(-3.0))[0] == 0.0);

    // Soft threshold collapses small inputs to zero; cross-checked by grid
    // minimization of the prox objective.
    const double collapsed = resolvent(OperatorSpec::scaled_abs(1.0, 1), 0.25, v1(0.1))[0];
    CHECK(collapsed == 0.0);
    CHECK(std::abs(prox_abs_grid_oracle(1.0, 0.25, 0.1) - collapsed) <= 2e-5);

    // Above the threshold the grid oracle must match as well.
    const double shrunk = resolvent(OperatorSpec::scaled_abs(1.0, 1), 0.25, v1(0.8))[0];
    CHECK(shrunk == doctest::Approx(0.55).epsilon(1e-12));
    CHECK(std::abs(prox_abs_grid_oracle(1.0, 0.25, 0.8) - shrunk) <= 2e-5);

    // Sum kind: scaled projection.
    const OperatorSpec sum = OperatorSpec::normal_cone_plus_linear(BoxSet{v1(-1.0), v1(1.0)}, 0.5);
    CHECK(resolvent(sum, 1.0, v1(0.6))[0] == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(resolvent(sum, 1.0, v1(4.0))[0] == doctest::Approx(1.0).epsilon(1e-14));

    CHECK_THROWS_AS(resolvent(half_line(), 0.0, v1(1.0)), ConfigError);
    CHECK_THROWS_AS(resolvent(half_line(), -1.0, v1(1.0)), ConfigError);
    CHECK_THROWS_AS(resolvent(half_line(), 1.0, v2(1.0, 2.0)), ConfigError);
}

TEST_CASE("yosida closed forms") {
    CHECK(yosida(half_line(), 0.5, v1(-3.0))[0] == doctest::Approx(-6.0).epsilon(1e-14));
    CHECK(yosida(OperatorSpec::zero(2), 0.3, v2(1.0, -2.0)).norm() == 0.0);

    // A_eps(x) = x/(1+eps) for the identity map; verified against the
    // finite-difference gradient of the Moreau envelope.
    const double value = yosida(OperatorSpec::linear(Mat::Identity(1, 1)), 1.0, v1(4.0))[0];
    CHECK(value == doctest::Approx(2.0).epsilon(1e-12));
    const double delta = 1e-3;
    const double fd = (quadratic_envelope_grid(1.0, 4.0 + delta) -
                       quadratic_envelope_grid(1.0, 4.0 - delta)) /
                      (2.0 * delta);
    CHECK(fd == doctest::Approx(value).epsilon(1e-3));
}

TEST_CASE("minimal section and domain projection") {
    const OperatorSpec box01 = OperatorSpec::normal_cone(BoxSet{v1(0.0), v1(1.0)});
    CHECK(minimal_section(box01, v1(0.5))->norm() == 0.0);
    CHECK_FALSE(minimal_section(box01, v1(2.0)).has_value());
    CHECK(minimal_section(OperatorSpec::linear(2.0 * Mat::Identity(1, 1)), v1(3.0))->coeff(0) ==
          doctest::Approx(6.0));

    const auto abs_section = minimal_section(OperatorSpec::scaled_abs(1.5, 2), v2(2.0, 0.0));
    CHECK((*abs_section)[0] == doctest::Approx(1.5));
    CHECK((*abs_section)[1] == 0.0);

    const Vec ball_proj =
        project_domain_closure(OperatorSpec::normal_cone(BallSet{Vec::Zero(2), 1.0}), v2(3.0, 4.0));
    CHECK(ball_proj[0] == doctest::Approx(0.6).epsilon(1e-14));
    CHECK(ball_proj[1] == doctest::Approx(0.8).epsilon(1e-14));
    CHECK(project_domain_closure(OperatorSpec::zero(1), v1(7.0))[0] == 7.0);
    CHECK(project_domain_closure(half_line(), v1(-7.0))[0] == 0.0);

    // Sum kind at a boundary point: least-norm element of N_C(x) + beta*x.
    const OperatorSpec sum = OperatorSpec::normal_cone_plus_linear(BoxSet{v1(-1.0), v1(1.0)}, 0.5);
    CHECK(minimal_section(sum, v1(1.0))->coeff(0) == doctest::Approx(0.5));
    CHECK(minimal_section(sum, v1(-1.0))->coeff(0) == doctest::Approx(-0.5));
    CHECK(minimal_section(sum, v1(0.25))->coeff(0) == doctest::Approx(0.125));
}

TEST_CASE("coercivity constants certify on the built-ins") {
    {
        const auto cert = yosida_coercivity_constants(unit_interval_sym());
        CHECK(cert.certified);
        CHECK(cert.constants.anchor.norm() == 0.0);
        CHECK(cert.constants.inner_radius == doctest::Approx(1.0));
        CHECK(cert.constants.slack == 0.0);
        // Independent re-verification on our own grid.
        const OperatorSpec op = unit_interval_sym();
        for (double eps : {1e-3, 1e-2, 0.1, 1.0}) {
            for (double x = -10.0; x <= 10.0; x += 0.25) {
                const double field = yosida(op, eps, v1(x))[0];
                const double lhs = field * x;
                const double rhs = cert.constants.inner_radius * std::abs(field) -
                                   cert.constants.slack * std::abs(x) -
                                   cert.constants.inner_radius * cert.constants.slack;
                CHECK(lhs >= rhs - 1e-9);
            }
        }
    }
    CHECK(yosida_coercivity_constants(OperatorSpec::zero(3)).certified);
    {
        const auto cert = yosida_coercivity_constants(OperatorSpec::linear(Mat::Identity(1, 1)));
        CHECK(cert.certified);
        CHECK(cert.constants.slack == doctest::Approx(1.0));
    }
}

TEST_CASE("operator sequence deviations") {
    OperatorSequenceSpec seq{half_line(), OperatorSequenceSpec::Family::LinearShift, 1.0, 3.0,
                             0.5};
    const std::vector<Vec> grid = {v1(0.0), v1(0.5), v1(1.0)};

    const double dev5 = yosida_uniform_deviation(seq, 0.1, grid, 5);
    const double dev10 = yosida_uniform_deviation(seq, 0.1, grid, 10);
    CHECK(dev10 <= dev5);
    CHECK(dev10 > 0.0);

    // Constant family: identically zero.
    OperatorSequenceSpec constant = seq;
    constant.family = OperatorSequenceSpec::Family::Constant;
    CHECK(yosida_uniform_deviation(constant, 0.1, grid, 5) == 0.0);

    // Ten-fold index growth shrinks the deviation by at least five-fold
    // (closed-form resolvent difference is O(1/n)).
    const double dev50 = yosida_uniform_deviation(seq, 0.1, grid, 50);
    CHECK(dev50 <= dev5 / 5.0);

    CHECK_THROWS_AS(yosida_uniform_deviation(seq, 0.1, {v1(-1.0)}, 5), ConfigError);
    CHECK_THROWS_AS(yosida_uniform_deviation(seq, 0.1, {}, 5), ConfigError);
}

TEST_CASE("shifted resolvent agrees with the sum-kind closed form") {
    const OperatorSpec cone = unit_interval_sym();
    const OperatorSpec sum = OperatorSpec::normal_cone_plus_linear(BoxSet{v1(-1.0), v1(1.0)}, 0.7);
    for (double x : {-3.0, -0.4, 0.0, 0.9, 2.5}) {
        for (double eps : {1e-3, 0.1, 1.0}) {
            CHECK(resolvent(cone, eps, v1(x), 0.7)[0] ==
                  doctest::Approx(resolvent(sum, eps, v1(x))[0]).epsilon(1e-14));
        }
    }
}

TEST_CASE("local bound certification") {
    OperatorSequenceSpec seq{half_line(), OperatorSequenceSpec::Family::LinearShift, 1.0, 3.0,
                             0.5};
    // kappa-ball around the origin leaves the half-line domain.
    CHECK(check_local_bound(seq, {1, 2, 4}).has_value());

    Vec lo = v1(-2.0), hi = v1(2.0);
    OperatorSequenceSpec boxed{OperatorSpec::normal_cone(BoxSet{lo, hi}),
                               OperatorSequenceSpec::Family::LinearShift, 1.0, 1.0, 0.5};
    CHECK_FALSE(check_local_bound(boxed, {1, 2, 4}).has_value());

    OperatorSequenceSpec tight = boxed;
    tight.local_bound = 0.1;  // true sup is c*kappa = 0.5
    CHECK(check_local_bound(tight, {1}).has_value());
}

TEST_CASE("operator construction rejects invalid specs") {
    Mat bad(2, 2);
    bad << -1.0, 0.0, 0.0, 1.0;
    CHECK_THROWS_AS(OperatorSpec::linear(bad), ConfigError);

    // Origin outside the set violates the domain hypothesis.
    CHECK_THROWS_AS(OperatorSpec::normal_cone(BoxSet{v1(1.0), v1(2.0)}), ConfigError);
    CHECK_THROWS_AS(OperatorSpec::scaled_abs(-0.5, 1), ConfigError);
    CHECK_THROWS_AS(OperatorSpec::normal_cone_plus_linear(BoxSet{v1(-1.0), v1(1.0)}, -0.1),
                    ConfigError);
}
