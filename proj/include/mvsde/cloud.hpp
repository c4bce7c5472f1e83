#pragma once

#include "mvsde/types.hpp"

#include <span>
#include <vector>

namespace mvsde {

/// Uniformly weighted empirical measure: N points in R^d, stored row-major.
/// Immutable value semantics after construction; all points finite.
class ParticleCloud {
public:
    ParticleCloud(int dim, int count);  // zero-initialized
    static ParticleCloud from_points(const std::vector<Vec>& points);
    static ParticleCloud from_flat(int dim, std::vector<double> data);

    int dim() const { return dim_; }
    int size() const { return count_; }

    Eigen::Map<const Vec> point(int i) const {
        return Eigen::Map<const Vec>(data_.data() + static_cast<std::size_t>(i) * dim_, dim_);
    }
    void set_point(int i, const Vec& x);

    std::span<double> flat() { return data_; }
    std::span<const double> flat() const { return data_; }

    Vec mean() const;
    /// (1/N) sum tanh(x_i) componentwise; the bounded statistic used by the
    /// kernel-integral drift.
    Vec bounded_mean() const;
    /// (1/N) sum |x_i|^2, i.e. the squared 2-moment norm.
    double second_moment() const;
    bool all_finite() const;

    std::vector<double> sorted_scalars() const;  // d = 1 only

private:
    int dim_;
    int count_;
    std::vector<double> data_;
};

/// ((1/N) sum |x_i|^theta)^(1/theta) for theta >= 1.
double moment_norm(const ParticleCloud& cloud, double theta);

/// Order-statistic quantile (d = 1): sorted value at index ceil(q*N) clamped
/// to [1, N].
double quantile(const ParticleCloud& cloud, double q);

}  // namespace mvsde
