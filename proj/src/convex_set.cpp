#include "mvsde/convex_set.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mvsde {

namespace {

constexpr double kBallTol = 1e-12;
// Tolerance for deciding which box/ball constraints are active at a point
// when identifying the normal cone.
constexpr double kActiveTol = 1e-9;

}  // namespace

int set_dim(const ConvexSet& set) {
    return std::visit([](const auto& s) -> int {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, BoxSet>) return static_cast<int>(s.lower.size());
        if constexpr (std::is_same_v<T, BallSet>) return static_cast<int>(s.center.size());
        if constexpr (std::is_same_v<T, HalfSpaceSet>) return static_cast<int>(s.normal.size());
    }, set);
}

bool set_contains(const ConvexSet& set, const Vec& x) {
    return std::visit([&](const auto& s) -> bool {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, BoxSet>) {
            for (Eigen::Index i = 0; i < x.size(); ++i) {
                if (x[i] < s.lower[i] || x[i] > s.upper[i]) return false;
            }
            return true;
        }
        if constexpr (std::is_same_v<T, BallSet>) {
            return (x - s.center).norm() <= s.radius + kBallTol;
        }
        if constexpr (std::is_same_v<T, HalfSpaceSet>) {
            return s.normal.dot(x) <= s.offset;
        }
    }, set);
}

void project_onto_into(const ConvexSet& set, const Vec& x, Vec& out) {
    std::visit([&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, BoxSet>) {
            out.resize(x.size());
            for (Eigen::Index i = 0; i < x.size(); ++i) {
                out[i] = std::min(std::max(x[i], s.lower[i]), s.upper[i]);
            }
        } else if constexpr (std::is_same_v<T, BallSet>) {
            out = x - s.center;
            const double r = out.norm();
            if (r > s.radius) {
                out *= s.radius / r;
                out += s.center;
            } else {
                out = x;  // interior points map to themselves exactly
            }
        } else if constexpr (std::is_same_v<T, HalfSpaceSet>) {
            const double excess = s.normal.dot(x) - s.offset;
            out = x;
            if (excess > 0.0) out -= excess * s.normal;
        }
    }, set);
}

Vec project_onto(const ConvexSet& set, const Vec& x) {
    Vec out;
    project_onto_into(set, x, out);
    return out;
}

bool contains_origin_ball(const ConvexSet& set, double radius) {
    return std::visit([&](const auto& s) -> bool {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, BoxSet>) {
            for (Eigen::Index i = 0; i < s.lower.size(); ++i) {
                if (s.lower[i] > -radius || s.upper[i] < radius) return false;
            }
            return true;
        }
        if constexpr (std::is_same_v<T, BallSet>) {
            return s.center.norm() + radius <= s.radius + kBallTol;
        }
        if constexpr (std::is_same_v<T, HalfSpaceSet>) {
            return radius <= s.offset;
        }
    }, set);
}

InscribedBall inscribed_ball(const ConvexSet& set) {
    return std::visit([](const auto& s) -> InscribedBall {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, BoxSet>) {
            const auto d = s.lower.size();
            Vec center(d);
            double radius = std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < d; ++i) {
                const bool lo_fin = std::isfinite(s.lower[i]);
                const bool hi_fin = std::isfinite(s.upper[i]);
                if (lo_fin && hi_fin) {
                    center[i] = 0.5 * (s.lower[i] + s.upper[i]);
                    radius = std::min(radius, 0.5 * (s.upper[i] - s.lower[i]));
                } else if (lo_fin) {
                    center[i] = s.lower[i] + 1.0;
                    radius = std::min(radius, 1.0);
                } else if (hi_fin) {
                    center[i] = s.upper[i] - 1.0;
                    radius = std::min(radius, 1.0);
                } else {
                    center[i] = 0.0;
                }
            }
            if (!std::isfinite(radius)) radius = 1.0;  // box == R^d
            return {center, radius};
        }
        if constexpr (std::is_same_v<T, BallSet>) {
            return {s.center, s.radius};
        }
        if constexpr (std::is_same_v<T, HalfSpaceSet>) {
            return {s.normal * (s.offset - 1.0), 1.0};
        }
    }, set);
}

Vec project_normal_cone(const ConvexSet& set, const Vec& x, const Vec& v) {
    return std::visit([&](const auto& s) -> Vec {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, BoxSet>) {
            // Componentwise cone: [0,inf) at an active upper bound, (-inf,0]
            // at an active lower bound, {0} inactive, R if the bounds pinch.
            Vec out = Vec::Zero(x.size());
            for (Eigen::Index i = 0; i < x.size(); ++i) {
                const bool at_lo = std::isfinite(s.lower[i]) && x[i] <= s.lower[i] + kActiveTol;
                const bool at_hi = std::isfinite(s.upper[i]) && x[i] >= s.upper[i] - kActiveTol;
                if (at_lo && at_hi) {
                    out[i] = v[i];
                } else if (at_hi) {
                    out[i] = std::max(v[i], 0.0);
                } else if (at_lo) {
                    out[i] = std::min(v[i], 0.0);
                }
            }
            return out;
        }
        if constexpr (std::is_same_v<T, BallSet>) {
            Vec u = x - s.center;
            const double r = u.norm();
            if (r < s.radius - kActiveTol || r == 0.0) return Vec::Zero(x.size());
            u /= r;
            return std::max(u.dot(v), 0.0) * u;
        }
        if constexpr (std::is_same_v<T, HalfSpaceSet>) {
            if (s.normal.dot(x) < s.offset - kActiveTol) return Vec::Zero(x.size());
            return std::max(s.normal.dot(v), 0.0) * s.normal;
        }
    }, set);
}

double normal_cone_misalignment(const ConvexSet& set, const Vec& x, const Vec& v) {
    const double n = v.norm();
    if (n == 0.0) return 0.0;
    const Vec proj = project_normal_cone(set, x, v);
    return (v - proj).norm() / n;
}

}  // namespace mvsde
