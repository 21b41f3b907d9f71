#pragma once

#include "moma/timed_series.hpp"

#include <Eigen/Core>

#include <string>

namespace moma {

/// Velocity (order 1), acceleration (2) or jerk (3) of a positional track, same frame count as the source.
template <typename Scalar = double>
struct DerivativeTrack {
    TimedSeries<Scalar> values;
    int order = 1;
};

namespace detail {

template <typename Scalar>
Scalar fixed_step(const TimedSeries<Scalar>& s) {
    if (!s.fixed_rate())
        throw InvalidArgument("differentiation requires a fixed frame rate; resample stamped data first");
    return Scalar(1) / static_cast<Scalar>(s.frame_rate());
}

template <typename Scalar>
void require_frames(const TimedSeries<Scalar>& s, Index n, const char* what) {
    if (s.frames() < n)
        throw InvalidArgument(std::string(what) + " needs at least " + std::to_string(n) + " frames, got " +
                              std::to_string(s.frames()));
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> node_rows(const TimedSeries<Scalar>& s, Index node) {
    if (node < 0 || 3 * node + 3 > s.dims())
        throw RangeError("node " + std::to_string(node) + " outside a track of " + std::to_string(s.dims() / 3) +
                         " nodes");
    return s.matrix().middleRows(3 * node, 3);
}

} // namespace detail

/// Central difference inside, one-sided first difference at both ends.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
first_difference(const Eigen::MatrixBase<Derived>& x, typename Derived::Scalar dt) {
    const Index n = x.cols();
    Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> v(x.rows(), n);
    for (Index i = 1; i + 1 < n; ++i)
        v.col(i) = (x.col(i + 1) - x.col(i - 1)) / (2 * dt);
    v.col(0) = (x.col(1) - x.col(0)) / dt;
    v.col(n - 1) = (x.col(n - 1) - x.col(n - 2)) / dt;
    return v;
}

/// Second central difference; endpoints copy their interior neighbour.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
second_difference(const Eigen::MatrixBase<Derived>& x, typename Derived::Scalar dt) {
    const Index n = x.cols();
    Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> a(x.rows(), n);
    for (Index i = 1; i + 1 < n; ++i)
        a.col(i) = (x.col(i + 1) - 2 * x.col(i) + x.col(i - 1)) / (dt * dt);
    a.col(0) = a.col(1);
    a.col(n - 1) = a.col(n - 2);
    return a;
}

/**
 * Five-point third-derivative stencil
 *   (x[i+2] - 2 x[i+1] + 2 x[i-1] - x[i-2]) / (2 dt^3)
 * at i in [2, n-3]; the first and last two frames copy the nearest computed value.
 */
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
third_difference(const Eigen::MatrixBase<Derived>& x, typename Derived::Scalar dt) {
    const Index n = x.cols();
    Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> j(x.rows(), n);
    const auto denom = 2 * dt * dt * dt;
    for (Index i = 2; i + 2 < n; ++i)
        j.col(i) = (x.col(i + 2) - 2 * x.col(i + 1) + 2 * x.col(i - 1) - x.col(i - 2)) / denom;
    j.col(0) = j.col(1) = j.col(2);
    j.col(n - 1) = j.col(n - 2) = j.col(n - 3);
    return j;
}

/// Velocity of every row of `track` (all nodes at once).
template <typename Scalar>
DerivativeTrack<Scalar> velocities(const TimedSeries<Scalar>& track) {
    const Scalar dt = detail::fixed_step(track);
    detail::require_frames(track, 3, "velocity");
    return {TimedSeries<Scalar>(first_difference(track.matrix(), dt), track.time_model()), 1};
}

template <typename Scalar>
DerivativeTrack<Scalar> accelerations(const TimedSeries<Scalar>& track) {
    const Scalar dt = detail::fixed_step(track);
    detail::require_frames(track, 3, "acceleration");
    return {TimedSeries<Scalar>(second_difference(track.matrix(), dt), track.time_model()), 2};
}

template <typename Scalar>
DerivativeTrack<Scalar> jerks(const TimedSeries<Scalar>& track) {
    const Scalar dt = detail::fixed_step(track);
    detail::require_frames(track, 5, "jerk");
    return {TimedSeries<Scalar>(third_difference(track.matrix(), dt), track.time_model()), 3};
}

template <typename Scalar>
DerivativeTrack<Scalar> velocity(const TimedSeries<Scalar>& track, Index node) {
    const Scalar dt = detail::fixed_step(track);
    detail::require_frames(track, 3, "velocity");
    return {TimedSeries<Scalar>(first_difference(detail::node_rows(track, node), dt), track.time_model()), 1};
}

template <typename Scalar>
DerivativeTrack<Scalar> acceleration(const TimedSeries<Scalar>& track, Index node) {
    const Scalar dt = detail::fixed_step(track);
    detail::require_frames(track, 3, "acceleration");
    return {TimedSeries<Scalar>(second_difference(detail::node_rows(track, node), dt), track.time_model()), 2};
}

template <typename Scalar>
DerivativeTrack<Scalar> jerk_vector(const TimedSeries<Scalar>& track, Index node) {
    const Scalar dt = detail::fixed_step(track);
    detail::require_frames(track, 5, "jerk");
    return {TimedSeries<Scalar>(third_difference(detail::node_rows(track, node), dt), track.time_model()), 3};
}

/// Per-node Euclidean norm of a 3N-row track, giving N rows.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
node_norms(const Eigen::MatrixBase<Derived>& x) {
    if (x.rows() % 3 != 0)
        throw DimensionError("expected 3 rows per node, got " + std::to_string(x.rows()) + " rows");
    Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> out(x.rows() / 3, x.cols());
    for (Index k = 0; k < out.rows(); ++k)
        out.row(k) = x.middleRows(3 * k, 3).colwise().norm();
    return out;
}

/// Length of each jerk vector; a 3N-row input yields one magnitude row per node.
template <typename Scalar>
DerivativeTrack<Scalar> jerk_magnitude(const DerivativeTrack<Scalar>& jerk) {
    if (jerk.order != 3)
        throw InvalidArgument("jerk_magnitude expects a third-order derivative track");
    return {TimedSeries<Scalar>(node_norms(jerk.values.matrix()), jerk.values.time_model()), 3};
}

} // namespace moma
