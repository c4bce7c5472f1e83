#include "mvsde/operators.hpp"

#include "mvsde/rng.hpp"

#include <cmath>
#include <sstream>

namespace mvsde {

namespace {

double soft_threshold(double v, double t) {
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
}

void check_monotone_linear(const Mat& m) {
    if (m.rows() != m.cols() || m.rows() < 1) {
        throw ConfigError("linear operator matrix must be square and nonempty");
    }
    const Mat sym = 0.5 * (m + m.transpose());
    const Eigen::SelfAdjointEigenSolver<Mat> es(sym);
    if (es.eigenvalues().minCoeff() < -1e-10) {
        throw ConfigError("linear operator matrix must have positive semidefinite symmetric part");
    }
}

}  // namespace

OperatorSpec OperatorSpec::zero(int dim) {
    if (dim < 1) throw ConfigError("operator dimension must be positive");
    return OperatorSpec(ZeroMap{dim}, dim);
}

OperatorSpec OperatorSpec::linear(Mat matrix) {
    check_monotone_linear(matrix);
    const int d = static_cast<int>(matrix.rows());
    return OperatorSpec(LinearMap{std::move(matrix)}, d);
}

OperatorSpec OperatorSpec::normal_cone(ConvexSet set) {
    const int d = set_dim(set);
    if (d < 1) throw ConfigError("convex set dimension must be positive");
    if (!set_contains(set, Vec::Zero(d))) {
        throw ConfigError("normal-cone operator requires the origin inside its set");
    }
    return OperatorSpec(NormalConeMap{std::move(set)}, d);
}

OperatorSpec OperatorSpec::scaled_abs(double weight, int dim) {
    if (dim < 1) throw ConfigError("operator dimension must be positive");
    if (!(weight >= 0.0)) throw ConfigError("scaled-abs weight must be nonnegative");
    return OperatorSpec(ScaledAbsSubdifferential{weight, dim}, dim);
}

OperatorSpec OperatorSpec::normal_cone_plus_linear(ConvexSet set, double beta) {
    const int d = set_dim(set);
    if (d < 1) throw ConfigError("convex set dimension must be positive");
    if (!(beta >= 0.0)) throw ConfigError("normal_cone_plus_linear beta must be nonnegative");
    if (!set_contains(set, Vec::Zero(d))) {
        throw ConfigError("normal-cone operator requires the origin inside its set");
    }
    return OperatorSpec(NormalConePlusLinear{std::move(set), beta}, d);
}

const ConvexSet* OperatorSpec::domain_set() const {
    if (const auto* nc = std::get_if<NormalConeMap>(&node_)) return &nc->set;
    if (const auto* ncl = std::get_if<NormalConePlusLinear>(&node_)) return &ncl->set;
    return nullptr;
}

bool OperatorSpec::in_domain(const Vec& x) const {
    const ConvexSet* set = domain_set();
    return set == nullptr || set_contains(*set, x);
}

void resolvent_into(const OperatorSpec& op, double eps, const Vec& x, Vec& out, double shift) {
    if (!(eps > 0.0)) throw ConfigError("resolvent requires eps > 0");
    if (!(shift >= 0.0)) throw ConfigError("operator shift must be nonnegative");
    if (x.size() != op.dimension()) throw ConfigError("resolvent: point dimension mismatch");

    // (I + eps(A + cI))^{-1} x = J^A_{eps/(1+eps c)}(x / (1 + eps c))
    double scale = 1.0;
    double eff_eps = eps;
    if (shift > 0.0) {
        scale = 1.0 / (1.0 + eps * shift);
        eff_eps = eps * scale;
    }

    std::visit([&](const auto& node) {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, ZeroMap>) {
            out = scale * x;
        } else if constexpr (std::is_same_v<T, LinearMap>) {
            const Mat lhs = Mat::Identity(x.size(), x.size()) + eff_eps * node.matrix;
            out = lhs.partialPivLu().solve(scale * x);
        } else if constexpr (std::is_same_v<T, NormalConeMap>) {
            if (scale == 1.0) {
                project_onto_into(node.set, x, out);
            } else {
                project_onto_into(node.set, Vec(scale * x), out);
            }
        } else if constexpr (std::is_same_v<T, ScaledAbsSubdifferential>) {
            out.resize(x.size());
            const double t = eff_eps * node.weight;
            for (Eigen::Index i = 0; i < x.size(); ++i) {
                out[i] = soft_threshold(scale * x[i], t);
            }
        } else if constexpr (std::is_same_v<T, NormalConePlusLinear>) {
            const double s = scale / (1.0 + eff_eps * node.beta);
            project_onto_into(node.set, Vec(s * x), out);
        }
    }, op.node());

#ifdef MVSDE_FAULT_INJECT_RESOLVENT
    // Test-only corrupted build for the self-test negative control.
    out *= 1.0 + 1e-3;
#endif
}

Vec resolvent(const OperatorSpec& op, double eps, const Vec& x, double shift) {
    Vec out;
    resolvent_into(op, eps, x, out, shift);
    return out;
}

void yosida_into(const OperatorSpec& op, double eps, const Vec& x, Vec& out, double shift) {
    resolvent_into(op, eps, x, out, shift);
    out = (x - out) / eps;
}

Vec yosida(const OperatorSpec& op, double eps, const Vec& x, double shift) {
    Vec out;
    yosida_into(op, eps, x, out, shift);
    return out;
}

std::optional<Vec> minimal_section(const OperatorSpec& op, const Vec& x) {
    if (x.size() != op.dimension()) throw ConfigError("minimal_section: point dimension mismatch");
    return std::visit([&](const auto& node) -> std::optional<Vec> {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, ZeroMap>) {
            return Vec::Zero(x.size());
        } else if constexpr (std::is_same_v<T, LinearMap>) {
            return Vec(node.matrix * x);
        } else if constexpr (std::is_same_v<T, NormalConeMap>) {
            if (!set_contains(node.set, x)) return std::nullopt;
            return Vec::Zero(x.size());
        } else if constexpr (std::is_same_v<T, ScaledAbsSubdifferential>) {
            Vec out(x.size());
            for (Eigen::Index i = 0; i < x.size(); ++i) {
                out[i] = (x[i] > 0.0) ? node.weight : (x[i] < 0.0 ? -node.weight : 0.0);
            }
            return out;
        } else if constexpr (std::is_same_v<T, NormalConePlusLinear>) {
            if (!set_contains(node.set, x)) return std::nullopt;
            // argmin over {u + beta x : u in N_C(x)}.
            const Vec base = node.beta * x;
            return Vec(project_normal_cone(node.set, x, Vec(-base)) + base);
        }
    }, op.node());
}

Vec project_domain_closure(const OperatorSpec& op, const Vec& x) {
    if (x.size() != op.dimension()) {
        throw ConfigError("project_domain_closure: point dimension mismatch");
    }
    const ConvexSet* set = op.domain_set();
    if (set == nullptr) return x;
    return project_onto(*set, x);
}

namespace {

CoercivityConstants coercivity_candidate(const OperatorSpec& op) {
    return std::visit([&](const auto& node) -> CoercivityConstants {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, ZeroMap>) {
            return {Vec::Zero(node.dim), 1.0, 0.0};
        } else if constexpr (std::is_same_v<T, LinearMap>) {
            const double norm = node.matrix.operatorNorm();
            return {Vec::Zero(node.matrix.rows()), 1.0, std::max(1.0, norm)};
        } else if constexpr (std::is_same_v<T, NormalConeMap>) {
            const InscribedBall ball = inscribed_ball(node.set);
            return {ball.center, ball.radius, 0.0};
        } else if constexpr (std::is_same_v<T, ScaledAbsSubdifferential>) {
            const double m2 = node.weight * std::sqrt(static_cast<double>(node.dim));
            return {Vec::Zero(node.dim), 1.0, m2};
        } else if constexpr (std::is_same_v<T, NormalConePlusLinear>) {
            const InscribedBall ball = inscribed_ball(node.set);
            const double r = std::max(ball.radius, 1e-6);
            const double reach = r + ball.center.norm();
            return {ball.center, ball.radius, node.beta * reach * reach / (4.0 * r)};
        }
    }, op.node());
}

}  // namespace

CoercivityCertificate yosida_coercivity_constants(const OperatorSpec& op) {
    CoercivityCertificate cert;
    cert.constants = coercivity_candidate(op);
    const Vec& a = cert.constants.anchor;
    const double m1 = cert.constants.inner_radius;
    const double m2 = cert.constants.slack;

    const int d = op.dimension();
    const std::vector<double> eps_grid = {1e-3, 3.16e-3, 1e-2, 3.16e-2, 1e-1, 3.16e-1, 1.0};

    std::vector<Vec> points;
    if (d == 1) {
        for (int i = 0; i <= 200; ++i) {
            Vec x(1);
            x[0] = -10.0 + 0.1 * i;
            points.push_back(x);
        }
    } else if (d == 2) {
        for (int i = 0; i <= 40; ++i) {
            for (int j = 0; j <= 40; ++j) {
                Vec x(2);
                x[0] = -10.0 + 0.5 * i;
                x[1] = -10.0 + 0.5 * j;
                points.push_back(x);
            }
        }
    } else {
        rng::SequenceSampler sampler(0x636f6572ULL, rng::Stream::Property);
        for (int k = 0; k < 4000; ++k) {
            Vec x(d);
            for (int i = 0; i < d; ++i) x[i] = sampler.uniform(-10.0, 10.0);
            points.push_back(std::move(x));
        }
    }

    cert.certified = true;
    cert.worst_margin = std::numeric_limits<double>::infinity();
    Vec field;
    for (const double eps : eps_grid) {
        for (const Vec& x : points) {
            yosida_into(op, eps, x, field);
            const double lhs = field.dot(x - a);
            const double rhs = m1 * field.norm() - m2 * (x - a).norm() - m1 * m2;
            const double margin = lhs - rhs;
            if (margin < cert.worst_margin) cert.worst_margin = margin;
            if (margin < -1e-9 * std::max(1.0, std::abs(rhs))) {
                cert.certified = false;
                cert.violating_eps = eps;
                cert.violating_x = x;
                return cert;
            }
        }
    }
    return cert;
}

double OperatorSequenceSpec::shift_at(int n) const {
    if (n < 1) throw ConfigError("operator sequence index must be positive");
    return family == Family::LinearShift ? shift_scale / static_cast<double>(n) : 0.0;
}

double yosida_uniform_deviation(const OperatorSequenceSpec& seq, double eps,
                                const std::vector<Vec>& grid, int n) {
    if (grid.empty()) throw ConfigError("yosida_uniform_deviation: empty grid");
    const double shift = seq.shift_at(n);
    double worst = 0.0;
    Vec limit, indexed;
    for (const Vec& x : grid) {
        const Vec proj = project_domain_closure(seq.base, x);
        if ((proj - x).norm() > 1e-9) {
            throw ConfigError("yosida_uniform_deviation: grid point outside closure of the domain");
        }
        yosida_into(seq.base, eps, x, limit);
        yosida_into(seq.base, eps, x, indexed, shift);
        worst = std::max(worst, (indexed - limit).norm());
    }
    return worst;
}

std::optional<std::string> check_local_bound(const OperatorSequenceSpec& seq,
                                             const std::vector<int>& indices,
                                             int samples_per_index) {
    const int d = seq.base.dimension();
    const double kappa = seq.local_radius;
    if (!(kappa > 0.0)) return "local radius kappa must be positive";

    const ConvexSet* set = seq.base.domain_set();
    if (set != nullptr && !contains_origin_ball(*set, kappa)) {
        std::ostringstream oss;
        oss << "closed ball of radius " << kappa << " around the origin is not inside the domain";
        return oss.str();
    }

    // |A^n_eps| increases to the minimal-section norm as eps decreases, so a
    // small-eps sample bounds the declared gamma from below (necessary check).
    const double eps = 1e-6;
    rng::SequenceSampler sampler(0x6c6f63616cULL, rng::Stream::Property);
    Vec field;
    for (const int n : indices) {
        const double shift = seq.shift_at(n);
        for (int k = 0; k < samples_per_index; ++k) {
            Vec x(d);
            double r = 0.0;
            for (int i = 0; i < d; ++i) {
                x[i] = sampler.uniform(-1.0, 1.0);
                r += x[i] * x[i];
            }
            if (r > 0.0) x *= kappa * std::pow(sampler.uniform01(), 1.0 / d) / std::sqrt(r);
            yosida_into(seq.base, eps, x, field, shift);
            if (field.norm() > seq.local_bound + 1e-6) {
                std::ostringstream oss;
                oss << "declared local bound " << seq.local_bound << " violated at index " << n
                    << " (|A^n_eps(x)| = " << field.norm() << ")";
                return oss.str();
            }
        }
    }
    return std::nullopt;
}

}  // namespace mvsde
