#pragma once

#include "pemq/geometry.hpp"

namespace pemq::predicates {

// Exact-sign geometric predicates. A floating-point filter answers the easy
// cases; ambiguous determinants are re-evaluated in rational arithmetic.

/// +1 if c lies left of the directed line a->b, -1 if right, 0 if collinear.
int orient(Point2 a, Point2 b, Point2 c);

/// +1 if d lies strictly inside the circumcircle of the CCW triangle (a,b,c),
/// -1 if outside, 0 if cocircular.
int incircle(Point2 a, Point2 b, Point2 c, Point2 d);

/// True when closed segments [a,b] and [c,d] share at least one point.
bool segments_intersect(Point2 a, Point2 b, Point2 c, Point2 d);

/// True when p lies on the closed segment [a,b].
bool on_segment(Point2 a, Point2 b, Point2 p);

}  // namespace pemq::predicates
