#pragma once

#include "mvsde/operators.hpp"

#include <string>
#include <vector>

namespace mvsde {

struct PropertyResult {
    std::string name;
    bool pass = true;
    std::string detail;
};

struct NamedOperator {
    std::string name;
    OperatorSpec spec;
};

/// The fixed catalog the property suites run against.
std::vector<NamedOperator> builtin_operator_catalog();

/// Resolvent/Yosida calculus properties on random samples per catalog entry:
/// contraction, Lipschitz bound, monotonicity, selection alignment, minimal-
/// section domination, resolvent and Yosida limits, coercivity certificates.
std::vector<PropertyResult> operator_property_suite(int samples_per_operator);

/// Transport-metric properties: metric axioms, sorted-vs-assignment oracle
/// equivalence, factorial brute force for tiny clouds, W1 <= W2, moment-norm
/// monotonicity in theta.
std::vector<PropertyResult> measure_property_suite(int instances);

/// Coefficient hypotheses: symbolic constants certify with tight slack, a
/// non-dissipative spec is caught with a witness, Lipschitz behavior and the
/// 1/n perturbation envelope hold on samples.
std::vector<PropertyResult> coefficient_property_suite(int sample_budget);

/// Solver invariants at reduced scale: determinism across reruns and thread
/// counts, domain preservation, coupling sanity, step-size self-consistency,
/// reflection-variation stability, moment-sup stability in epsilon.
std::vector<PropertyResult> solver_property_suite(int particles);

/// Experiment-level invariants at reduced scale: zero-gap couplings,
/// stationary-quantile agreement, translation covariance of the contraction
/// fit, the deterministic t=0 ergodicity row, null-perturbation exactness and
/// closed-form deviation arithmetic.
std::vector<PropertyResult> lab_property_suite(int particles);

/// Full reduced-budget suite with a fixed internal seed; repeated invocations
/// produce the identical report.
std::vector<PropertyResult> run_selftest();

}  // namespace mvsde
