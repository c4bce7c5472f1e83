#pragma once

#include "mvsde/types.hpp"

#include <variant>

namespace mvsde {

/// Axis-aligned box; entries of `lower`/`upper` may be -inf/+inf.
struct BoxSet {
    Vec lower;
    Vec upper;
};

struct BallSet {
    Vec center;
    double radius = 1.0;
};

/// Half-space { x : <normal, x> <= offset } with |normal| = 1.
struct HalfSpaceSet {
    Vec normal;
    double offset = 0.0;
};

using ConvexSet = std::variant<BoxSet, BallSet, HalfSpaceSet>;

int set_dim(const ConvexSet& set);

/// Membership test. Boxes and half-spaces compare exactly; balls allow
/// |x - center| <= radius + 1e-12.
bool set_contains(const ConvexSet& set, const Vec& x);

void project_onto_into(const ConvexSet& set, const Vec& x, Vec& out);
Vec project_onto(const ConvexSet& set, const Vec& x);

/// Whether the closed ball B(0, radius) is contained in the set.
bool contains_origin_ball(const ConvexSet& set, double radius);

/// A point together with the radius of a ball around it inside the set.
struct InscribedBall {
    Vec center;
    double radius = 0.0;
};

/// Canonical interior anchor used for the Yosida coercivity constants.
InscribedBall inscribed_ball(const ConvexSet& set);

/// Projection of `v` onto the normal cone of the set at `x` (x must belong to
/// the set; interior points have normal cone {0}).
Vec project_normal_cone(const ConvexSet& set, const Vec& x, const Vec& v);

/// Relative distance of direction `v` from the normal cone at boundary point
/// `x`: |v - proj_{N(x)}(v)| / |v|. Zero when v lies in the cone.
double normal_cone_misalignment(const ConvexSet& set, const Vec& x, const Vec& v);

}  // namespace mvsde
