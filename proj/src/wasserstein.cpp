#include "mvsde/wasserstein.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace mvsde {

namespace {

constexpr int kAssignmentSizeCap = 512;

void check_pair(const ParticleCloud& a, const ParticleCloud& b, bool require_1d) {
    if (a.size() != b.size()) {
        throw ConfigError("transport distance requires equal-size clouds");
    }
    if (a.dim() != b.dim()) {
        throw ConfigError("transport distance requires equal-dimension clouds");
    }
    if (require_1d && a.dim() != 1) {
        throw ConfigError("sorted transport requires one-dimensional clouds");
    }
}

/// Shortest-augmenting-path assignment with dual potentials, O(n^3).
/// Returns the minimal total cost of a perfect matching.
double assignment_cost(const std::vector<double>& cost, int n) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<int> match(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);

    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const int i0 = match[j0];
            int j1 = -1;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur =
                    cost[static_cast<std::size_t>(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const int j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    double total = 0.0;
    for (int j = 1; j <= n; ++j) {
        total += cost[static_cast<std::size_t>(match[j] - 1) * n + (j - 1)];
    }
    return total;
}

double sorted_cost(const ParticleCloud& a, const ParticleCloud& b, int power) {
    const std::vector<double> sa = a.sorted_scalars();
    const std::vector<double> sb = b.sorted_scalars();
    double s = 0.0;
    for (std::size_t i = 0; i < sa.size(); ++i) {
        const double gap = std::abs(sa[i] - sb[i]);
        s += (power == 2) ? gap * gap : gap;
    }
    return s / static_cast<double>(sa.size());
}

double assignment_distance(const ParticleCloud& a, const ParticleCloud& b, int power) {
    const int n = a.size();
    std::vector<double> cost(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double gap = (a.point(i) - b.point(j)).norm();
            cost[static_cast<std::size_t>(i) * n + j] = (power == 2) ? gap * gap : gap;
        }
    }
    const double mean_cost = assignment_cost(cost, n) / static_cast<double>(n);
    return (power == 2) ? std::sqrt(std::max(mean_cost, 0.0)) : mean_cost;
}

}  // namespace

DistanceReport w2_sorted_1d(const ParticleCloud& a, const ParticleCloud& b) {
    check_pair(a, b, /*require_1d=*/true);
    return {std::sqrt(sorted_cost(a, b, 2)), TransportMethod::Sorted1D, a.size(), b.size()};
}

double w1_sorted_1d(const ParticleCloud& a, const ParticleCloud& b) {
    check_pair(a, b, /*require_1d=*/true);
    return sorted_cost(a, b, 1);
}

DistanceReport w2_exact_assignment(const ParticleCloud& a, const ParticleCloud& b) {
    check_pair(a, b, /*require_1d=*/false);
    if (a.size() > kAssignmentSizeCap) {
        throw ConfigError(
            "exact assignment is limited to 512 points per cloud; "
            "use one-dimensional experiments for larger N");
    }
    return {assignment_distance(a, b, 2), TransportMethod::ExactAssignment, a.size(), b.size()};
}

double w2_distance(const ParticleCloud& a, const ParticleCloud& b) {
    if (a.dim() == 1 && b.dim() == 1) return w2_sorted_1d(a, b).value;
    return w2_exact_assignment(a, b).value;
}

double w1_distance(const ParticleCloud& a, const ParticleCloud& b) {
    if (a.dim() == 1 && b.dim() == 1) return w1_sorted_1d(a, b);
    check_pair(a, b, /*require_1d=*/false);
    if (a.size() > kAssignmentSizeCap) {
        throw ConfigError(
            "exact assignment is limited to 512 points per cloud; "
            "use one-dimensional experiments for larger N");
    }
    return assignment_distance(a, b, 1);
}

}  // namespace mvsde
