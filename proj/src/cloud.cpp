#include "mvsde/cloud.hpp"

#include <algorithm>
#include <cmath>

namespace mvsde {

ParticleCloud::ParticleCloud(int dim, int count)
    : dim_(dim), count_(count), data_(static_cast<std::size_t>(dim) * count, 0.0) {
    if (dim < 1 || count < 1) throw ConfigError("particle cloud requires dim >= 1 and N >= 1");
}

ParticleCloud ParticleCloud::from_points(const std::vector<Vec>& points) {
    if (points.empty()) throw ConfigError("particle cloud requires at least one point");
    ParticleCloud cloud(static_cast<int>(points.front().size()), static_cast<int>(points.size()));
    for (int i = 0; i < cloud.count_; ++i) {
        cloud.set_point(i, points[static_cast<std::size_t>(i)]);
    }
    return cloud;
}

ParticleCloud ParticleCloud::from_flat(int dim, std::vector<double> data) {
    if (dim < 1 || data.empty() || data.size() % static_cast<std::size_t>(dim) != 0) {
        throw ConfigError("particle cloud flat data size must be a positive multiple of dim");
    }
    ParticleCloud cloud(dim, static_cast<int>(data.size() / static_cast<std::size_t>(dim)));
    cloud.data_ = std::move(data);
    if (!cloud.all_finite()) throw ConfigError("particle cloud contains non-finite points");
    return cloud;
}

void ParticleCloud::set_point(int i, const Vec& x) {
    if (x.size() != dim_) throw ConfigError("set_point: dimension mismatch");
    if (!x.allFinite()) throw ConfigError("particle cloud points must be finite");
    std::copy(x.data(), x.data() + dim_, data_.data() + static_cast<std::size_t>(i) * dim_);
}

Vec ParticleCloud::mean() const {
    Vec m = Vec::Zero(dim_);
    for (int i = 0; i < count_; ++i) m += point(i);
    return m / static_cast<double>(count_);
}

Vec ParticleCloud::bounded_mean() const {
    Vec m = Vec::Zero(dim_);
    for (int i = 0; i < count_; ++i) {
        const auto p = point(i);
        for (int j = 0; j < dim_; ++j) m[j] += std::tanh(p[j]);
    }
    return m / static_cast<double>(count_);
}

double ParticleCloud::second_moment() const {
    double s = 0.0;
    for (int i = 0; i < count_; ++i) s += point(i).squaredNorm();
    return s / static_cast<double>(count_);
}

bool ParticleCloud::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

std::vector<double> ParticleCloud::sorted_scalars() const {
    if (dim_ != 1) throw ConfigError("sorted_scalars requires a one-dimensional cloud");
    std::vector<double> values = data_;
    std::sort(values.begin(), values.end());
    return values;
}

double moment_norm(const ParticleCloud& cloud, double theta) {
    if (!(theta >= 1.0)) throw ConfigError("moment_norm requires theta >= 1");
    double s = 0.0;
    for (int i = 0; i < cloud.size(); ++i) {
        s += std::pow(cloud.point(i).norm(), theta);
    }
    return std::pow(s / static_cast<double>(cloud.size()), 1.0 / theta);
}

double quantile(const ParticleCloud& cloud, double q) {
    if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("quantile requires q in [0,1]");
    const std::vector<double> sorted = cloud.sorted_scalars();
    const int n = static_cast<int>(sorted.size());
    int idx = static_cast<int>(std::ceil(q * n));
    idx = std::clamp(idx, 1, n);
    return sorted[static_cast<std::size_t>(idx - 1)];
}

}  // namespace mvsde
