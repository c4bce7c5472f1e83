#pragma once

#include "mvsde/ergodicity.hpp"
#include "mvsde/solver.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mvsde {

/// Sequence of systems indexed by n: operator family A^n, coefficient family
/// (b^n, sigma^n), one shared initial law.
struct SequenceSystem {
    OperatorSequenceSpec operators;
    CoefficientSpec coefficients;  // limit coefficients; indices derive b^n, sigma^n
    InitialLaw initial;
    std::vector<int> indices;
};

/// System at index n, or the limit system when n is absent.
SdeSystem system_at(const SequenceSystem& seq, std::optional<int> n);

/// Shared shape of the monotone-trend assertions: consecutive values may rise
/// by at most the pair slack, and the final value must clear the declared
/// threshold.
struct TrendSettings {
    double pair_slack = 0.1;
    std::optional<double> final_ratio_max;  // final <= ratio * first
    std::optional<double> final_abs_max;
};

struct ConvergenceRow {
    int n = 0;
    double sup_mse = 0.0;
    double terminal_w2 = 0.0;
};

struct ConvergenceReport {
    std::vector<ConvergenceRow> rows;
    bool monotone_pass = true;
    bool final_pass = true;
    std::string failure;
    bool passed() const { return monotone_pass && final_pass; }
};

/// For each n, couples the indexed system with the limit system on identical
/// noise and the identical initial cloud, and records the pathwise estimator
/// sup over the time grid of (1/N) sum |X^n_i - X_i|^2.
ConvergenceReport solution_convergence_experiment(const SequenceSystem& seq,
                                                  const SolverConfig& config,
                                                  const AssumptionConstants& constants,
                                                  const TrendSettings& trend);

struct PenalizationRow {
    double eps = 0.0;
    double sup_mse = 0.0;
};

struct PenalizationReport {
    std::vector<PenalizationRow> rows;
    bool monotone_pass = true;
    bool final_pass = true;
    std::string failure;
    bool passed() const { return monotone_pass && final_pass; }
};

/// Shared-noise gap between the explicit penalized scheme at each epsilon and
/// the resolvent-implicit reference. When h_ratio is set the step is
/// h = eps * h_ratio per run, otherwise config.step serves every epsilon.
PenalizationReport penalization_experiment(const SdeSystem& system,
                                           const std::vector<double>& eps_list,
                                           const SolverConfig& config,
                                           std::optional<double> h_ratio,
                                           const TrendSettings& trend);

struct DeviationRow {
    int n = 0;
    double operator_dev = 0.0;
    double drift_dev = 0.0;
    double diffusion_dev = 0.0;
};

struct DeviationReport {
    std::vector<DeviationRow> rows;
    bool pass = true;
    std::string failure;
};

/// Tabulates sup-grid |A^n_eps - A_eps|, |b^n - b| and |sigma^n - sigma| per
/// index and asserts each deviation drops toward zero along the list.
DeviationReport hypothesis_sequence_checks(const SequenceSystem& seq, double eps,
                                           const std::vector<Vec>& grid,
                                           const std::vector<int>& indices);

struct InvariantGapRow {
    int n = 0;
    double w2_gap = 0.0;
    double w1_gap = 0.0;
    double second_moment = 0.0;
};

struct InvariantConvergenceReport {
    std::vector<InvariantGapRow> rows;
    double noise_floor = 0.0;
    double limit_second_moment = 0.0;
    double moment_bound = 0.0;
    bool monotone_pass = true;
    bool final_pass = true;
    bool moment_pass = true;
    std::string failure;
    bool passed() const { return monotone_pass && final_pass && moment_pass; }
};

struct InvariantConvergenceSettings {
    double burn_in = 0.0;
    double pair_slack = 0.1;
    double floor_multiple = 2.0;              // final gap <= floor_multiple * floor
    std::optional<double> moment_bound;       // default: 4 * limit second moment + 1
};

/// Estimates the indexed and limit invariant measures on shared noise,
/// reports W2/W1 gaps against the Monte-Carlo floor (two fresh-seed estimates
/// of the limit) and asserts the uniform second-moment bound.
InvariantConvergenceReport invariant_convergence_experiment(
    const SequenceSystem& seq, const SolverConfig& config,
    const AssumptionConstants& constants, const InvariantConvergenceSettings& settings);

}  // namespace mvsde
