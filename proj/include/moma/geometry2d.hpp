#pragma once

#include "moma/skeleton.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace moma {

template <typename Scalar>
using GroundPoint = Eigen::Matrix<Scalar, 2, 1>;

template <typename Scalar>
using GroundPoints = std::vector<GroundPoint<Scalar>, Eigen::aligned_allocator<GroundPoint<Scalar>>>;

/// Drops the up coordinate; the remaining two keep their X < Y < Z order.
template <typename Derived>
GroundPoint<typename Derived::Scalar> project_to_ground(const Eigen::MatrixBase<Derived>& p, Axis up) {
    using S = typename Derived::Scalar;
    switch (up) {
    case Axis::X: return GroundPoint<S>(p[1], p[2]);
    case Axis::Y: return GroundPoint<S>(p[0], p[2]);
    case Axis::Z: break;
    }
    return GroundPoint<S>(p[0], p[1]);
}

template <typename Derived>
GroundPoints<typename Derived::Scalar> project_to_ground_all(const Eigen::MatrixBase<Derived>& points, Axis up) {
    GroundPoints<typename Derived::Scalar> out;
    out.reserve(static_cast<std::size_t>(points.cols()));
    for (Index i = 0; i < points.cols(); ++i)
        out.push_back(project_to_ground(points.col(i), up));
    return out;
}

/// z-component of (a - o) x (b - o); positive when o, a, b turn counter-clockwise.
template <typename Scalar>
Scalar cross(const GroundPoint<Scalar>& o, const GroundPoint<Scalar>& a, const GroundPoint<Scalar>& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

/**
 * Monotone-chain convex hull, counter-clockwise, starting at the lowest-x
 * (then lowest-y) point. Collinear boundary points are dropped. With fewer
 * than three distinct points the distinct points are returned.
 */
template <typename Scalar>
GroundPoints<Scalar> convex_hull(GroundPoints<Scalar> pts) {
    auto less = [](const GroundPoint<Scalar>& a, const GroundPoint<Scalar>& b) {
        return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
    };
    std::sort(pts.begin(), pts.end(), less);
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3)
        return pts;

    GroundPoints<Scalar> hull(2 * pts.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= Scalar(0))
            --k;
        hull[k++] = pts[i];
    }
    for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= Scalar(0))
            --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

/// Shoelace area of an ordered polygon (either orientation).
template <typename Scalar>
Scalar polygon_area(const GroundPoints<Scalar>& poly) {
    if (poly.size() < 3)
        return Scalar(0);
    Scalar twice = 0;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++)
        twice += poly[j].x() * poly[i].y() - poly[i].x() * poly[j].y();
    return std::abs(twice) / Scalar(2);
}

/// Closed perimeter; a two-point hull counts its segment twice.
template <typename Scalar>
Scalar hull_perimeter(const GroundPoints<Scalar>& poly) {
    if (poly.size() < 2)
        return Scalar(0);
    Scalar total = 0;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++)
        total += (poly[i] - poly[j]).norm();
    return total;
}

/**
 * True when `p` lies inside or on the boundary of a counter-clockwise convex
 * polygon, i.e. never strictly to the right of an edge. Degenerate hulls
 * (a point or a segment) contain only the points they cover.
 */
template <typename Scalar>
bool point_in_convex_polygon(const GroundPoint<Scalar>& p, const GroundPoints<Scalar>& hull) {
    const Scalar eps = Scalar(64) * std::numeric_limits<Scalar>::epsilon();
    if (hull.empty())
        return false;
    if (hull.size() == 1)
        return (p - hull[0]).norm() <= eps * (Scalar(1) + hull[0].norm());
    if (hull.size() == 2) {
        const GroundPoint<Scalar> d = hull[1] - hull[0];
        const Scalar len2 = d.squaredNorm();
        const Scalar t = (p - hull[0]).dot(d) / len2;
        if (t < -eps || t > Scalar(1) + eps)
            return false;
        return std::abs(cross(hull[0], hull[1], p)) <= eps * len2 + eps;
    }
    for (std::size_t i = 0, j = hull.size() - 1; i < hull.size(); j = i++) {
        const GroundPoint<Scalar> edge = hull[i] - hull[j];
        // scale-aware slack so points on an edge survive rounding
        const Scalar slack = eps * edge.norm() * ((p - hull[j]).norm() + Scalar(1));
        if (cross(hull[j], hull[i], p) < -slack)
            return false;
    }
    return true;
}

} // namespace moma
