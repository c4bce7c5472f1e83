#pragma once

#include "mvsde/convex_set.hpp"
#include "mvsde/types.hpp"

#include <optional>
#include <variant>
#include <vector>

namespace mvsde {

// Closed catalog of maximal monotone operators with closed-form resolvents.
// Multivalued evaluation is never materialized; all access goes through the
// resolvent, the Yosida approximation and the minimal section.

struct ZeroMap {
    int dim = 1;
};

/// x -> Mx with x'Mx >= 0 (symmetric part positive semidefinite).
struct LinearMap {
    Mat matrix;
};

/// Normal cone of a closed convex set; domain is the set itself.
struct NormalConeMap {
    ConvexSet set;
};

/// Subdifferential of x -> weight * |x|_1.
struct ScaledAbsSubdifferential {
    double weight = 1.0;
    int dim = 1;
};

/// Normal cone of a set plus beta * identity, beta >= 0.
struct NormalConePlusLinear {
    ConvexSet set;
    double beta = 0.0;
};

class OperatorSpec {
public:
    using Variant = std::variant<ZeroMap, LinearMap, NormalConeMap, ScaledAbsSubdifferential,
                                 NormalConePlusLinear>;

    static OperatorSpec zero(int dim);
    static OperatorSpec linear(Mat matrix);
    static OperatorSpec normal_cone(ConvexSet set);
    static OperatorSpec scaled_abs(double weight, int dim);
    static OperatorSpec normal_cone_plus_linear(ConvexSet set, double beta);

    int dimension() const { return dim_; }
    const Variant& node() const { return node_; }

    /// The convex set underlying the domain, or nullptr when D(A) = R^d.
    const ConvexSet* domain_set() const;
    bool in_domain(const Vec& x) const;

private:
    OperatorSpec(Variant node, int dim) : node_(std::move(node)), dim_(dim) {}
    Variant node_;
    int dim_;
};

/// Resolvent (I + eps*(A + shift*I))^{-1} x. Requires eps > 0, shift >= 0.
/// Single-valued, 1-Lipschitz, values in D(A).
void resolvent_into(const OperatorSpec& op, double eps, const Vec& x, Vec& out,
                    double shift = 0.0);
Vec resolvent(const OperatorSpec& op, double eps, const Vec& x, double shift = 0.0);

/// Yosida approximation (x - J_eps(x))/eps of A + shift*I; (1/eps)-Lipschitz,
/// monotone, and a selection of (A + shift*I) at J_eps(x).
void yosida_into(const OperatorSpec& op, double eps, const Vec& x, Vec& out, double shift = 0.0);
Vec yosida(const OperatorSpec& op, double eps, const Vec& x, double shift = 0.0);

/// Least-norm element of A(x); nullopt when x is outside the domain (the
/// minimal section is infinite there, a legitimate query result).
std::optional<Vec> minimal_section(const OperatorSpec& op, const Vec& x);

/// Exact projection onto closure(D(A)); identity for full-domain operators.
Vec project_domain_closure(const OperatorSpec& op, const Vec& x);

/// Constants (anchor a, inner_radius M1 > 0, slack M2 >= 0) for the uniform
/// coercivity bound  <A_eps(x), x-a> >= M1|A_eps(x)| - M2|x-a| - M1*M2,
/// valid for every eps > 0 and x. Candidates are certified on an
/// (eps, x)-grid, not proved.
struct CoercivityConstants {
    Vec anchor;
    double inner_radius = 1.0;
    double slack = 0.0;
};

struct CoercivityCertificate {
    CoercivityConstants constants;
    bool certified = false;
    double worst_margin = 0.0;  // min over the grid of lhs - rhs
    double violating_eps = 0.0;
    Vec violating_x;
};

CoercivityCertificate yosida_coercivity_constants(const OperatorSpec& op);

/// A sequence A^n derived from a base operator: either the constant family
/// A^n = A or the shifted family A^n = A + (c/n) * identity, c >= 0.
struct OperatorSequenceSpec {
    enum class Family { Constant, LinearShift };

    OperatorSpec base;
    Family family = Family::Constant;
    double shift_scale = 0.0;  // c
    double local_bound = 0.0;  // declared gamma
    double local_radius = 1.0; // declared kappa

    double shift_at(int n) const;
};

/// max over the grid of |A^n_eps(x) - A_eps(x)|; every grid point must lie in
/// closure(D(A)).
double yosida_uniform_deviation(const OperatorSequenceSpec& seq, double eps,
                                const std::vector<Vec>& grid, int n);

/// Sampled check of the declared (gamma, kappa) local bound: requires the
/// closed kappa-ball inside D(A) and |A^n_eps(x)| <= gamma near eps -> 0 for
/// the listed indices. Returns an explanation on failure.
std::optional<std::string> check_local_bound(const OperatorSequenceSpec& seq,
                                             const std::vector<int>& indices,
                                             int samples_per_index = 256);

}  // namespace mvsde
