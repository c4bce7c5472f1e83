#pragma once

#include "mvsde/cloud.hpp"

namespace mvsde {

enum class TransportMethod { Sorted1D, ExactAssignment };

struct DistanceReport {
    double value = 0.0;
    TransportMethod method = TransportMethod::Sorted1D;
    int size_a = 0;
    int size_b = 0;
};

/// W2 between equal-size one-dimensional clouds via the sorted coupling,
/// which is the exact optimal transport in d = 1.
DistanceReport w2_sorted_1d(const ParticleCloud& a, const ParticleCloud& b);

/// W1 analogue of w2_sorted_1d (absolute costs).
double w1_sorted_1d(const ParticleCloud& a, const ParticleCloud& b);

/// Exact W2 for equal-size clouds in any dimension via minimum-cost perfect
/// matching on squared Euclidean costs. Cubic cost; sizes above 512 are
/// rejected (use one-dimensional experiments instead).
DistanceReport w2_exact_assignment(const ParticleCloud& a, const ParticleCloud& b);

/// Sorted coupling when d == 1, exact assignment otherwise.
double w2_distance(const ParticleCloud& a, const ParticleCloud& b);
double w1_distance(const ParticleCloud& a, const ParticleCloud& b);

}  // namespace mvsde
