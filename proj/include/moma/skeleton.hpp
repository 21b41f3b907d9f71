#pragma once

#include "moma/error.hpp"
#include "moma/timed_series.hpp"

#include <Eigen/Geometry>

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace moma {

enum class Axis { X = 0, Y = 1, Z = 2 };

/// Order in which three per-axis rotations are composed, e.g. "ZXY".
struct AxisOrder {
    std::array<Axis, 3> axes{Axis::Z, Axis::X, Axis::Y};

    static AxisOrder parse(std::string_view text) {
        if (text.size() != 3)
            throw InvalidArgument("axis order must name three axes: '" + std::string(text) + "'");
        AxisOrder order;
        bool seen[3] = {false, false, false};
        for (std::size_t i = 0; i < 3; ++i) {
            const char c = static_cast<char>(text[i] & ~0x20);
            if (c < 'X' || c > 'Z')
                throw InvalidArgument("invalid axis '" + std::string(1, text[i]) + "'");
            const int a = c - 'X';
            if (seen[a])
                throw InvalidArgument("axis order repeats an axis: '" + std::string(text) + "'");
            seen[a] = true;
            order.axes[i] = static_cast<Axis>(a);
        }
        return order;
    }

    std::string str() const {
        std::string s;
        for (Axis a : axes)
            s.push_back(static_cast<char>('X' + static_cast<int>(a)));
        return s;
    }

    bool operator==(const AxisOrder&) const = default;
};

inline Eigen::Vector3d unit_axis(Axis a) { return Eigen::Vector3d::Unit(static_cast<int>(a)); }

constexpr double kQuaternionTolerance = 1e-6;

/// Renormalizes a quaternion within tolerance of unit length; rejects anything further off.
inline Eigen::Quaterniond checked_unit(const Eigen::Quaterniond& q) {
    const double n = q.norm();
    if (!std::isfinite(n) || std::abs(n - 1.0) > kQuaternionTolerance)
        throw InvalidArgument("quaternion norm " + std::to_string(n) + " is not unit");
    return Eigen::Quaterniond(q.coeffs() / n);
}

/// Rotation composed as R_{order[0]}(a0) * R_{order[1]}(a1) * R_{order[2]}(a2), angles in degrees.
inline Eigen::Quaterniond euler_to_quaternion(const Eigen::Vector3d& degrees, const AxisOrder& order) {
    Eigen::Quaterniond q = Eigen::Quaterniond::Identity();
    for (int i = 0; i < 3; ++i)
        q = q * Eigen::Quaterniond(Eigen::AngleAxisd(degrees[i] * M_PI / 180.0, unit_axis(order.axes[i])));
    return q.normalized();
}

/// Inverse of euler_to_quaternion: first and last angles in (-180, 180], middle in [-90, 90].
inline Eigen::Vector3d quaternion_to_euler(const Eigen::Quaterniond& q, const AxisOrder& order) {
    const Eigen::Matrix3d r = q.normalized().toRotationMatrix();
    const int i = static_cast<int>(order.axes[0]);
    const int j = static_cast<int>(order.axes[1]);
    const int k = static_cast<int>(order.axes[2]);
    // +1 for cyclic (even) permutations of XYZ
    const double s = ((j - i + 3) % 3 == 1) ? 1.0 : -1.0;
    const double middle = std::asin(std::clamp(s * r(i, k), -1.0, 1.0));
    const double first = std::atan2(-s * r(j, k), r(k, k));
    const double last = std::atan2(-s * r(i, j), r(i, i));
    return Eigen::Vector3d(first, middle, last) * (180.0 / M_PI);
}

/**
 * Bone hierarchy. Node 0 is the root; every other node's parent has a lower
 * index. Offsets are rest translations from the parent, in meters.
 */
class SkeletonTopology {
public:
    SkeletonTopology() = default;

    /// Appends a node; pass parent = -1 for the root.
    Index add_node(std::string name, Index parent, const Eigen::Vector3d& offset) {
        const Index id = node_count();
        if (parent < 0 && id != 0)
            throw InvalidArgument("only node 0 may be the root ('" + name + "')");
        if (parent >= id)
            throw InvalidArgument("parent of '" + name + "' must precede it");
        if (id == 0 && parent >= 0)
            throw InvalidArgument("the first node must be the root");
        names_.push_back(std::move(name));
        parents_.push_back(parent);
        offsets_.push_back(offset);
        return id;
    }

    Index node_count() const noexcept { return static_cast<Index>(names_.size()); }
    const std::string& name(Index node) const { return names_.at(static_cast<std::size_t>(node)); }
    Index parent(Index node) const { return parents_.at(static_cast<std::size_t>(node)); }
    const Eigen::Vector3d& offset(Index node) const { return offsets_.at(static_cast<std::size_t>(node)); }
    const std::vector<std::string>& names() const noexcept { return names_; }

    std::optional<Index> find(std::string_view name) const {
        for (std::size_t i = 0; i < names_.size(); ++i)
            if (names_[i] == name)
                return static_cast<Index>(i);
        return std::nullopt;
    }

    Index require(std::string_view name) const {
        if (auto id = find(name))
            return *id;
        throw InvalidArgument("unknown node '" + std::string(name) + "'");
    }

    bool operator==(const SkeletonTopology&) const = default;

private:
    std::vector<std::string> names_;
    std::vector<Index> parents_;
    std::vector<Eigen::Vector3d> offsets_;
};

enum class RotationSpace { Local, Global };

/// Per-frame node positions (3 per node, global frame) and per-node rotations (w, x, y, z).
struct PoseTrack {
    Series positions;
    Series rotations;
    RotationSpace space = RotationSpace::Local;

    Index node_count() const { return positions.dims() / 3; }
};

/// Global positions from local rotations. `translations`, when given, replaces each node's rest offset.
inline Eigen::Matrix3Xd forward_kinematics(const SkeletonTopology& topo,
                                          std::span<const Eigen::Quaterniond> local_rotations,
                                          const Eigen::Vector3d& root_position,
                                          std::span<const Eigen::Vector3d> translations = {}) {
    const Index n = topo.node_count();
    if (static_cast<Index>(local_rotations.size()) != n)
        throw DimensionError("forward kinematics needs one rotation per node");
    if (!translations.empty() && static_cast<Index>(translations.size()) != n)
        throw DimensionError("forward kinematics needs one translation per node");

    Eigen::Matrix3Xd positions(3, n);
    std::vector<Eigen::Quaterniond> global(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        const auto u = static_cast<std::size_t>(i);
        const Eigen::Quaterniond local = checked_unit(local_rotations[u]);
        const Index p = topo.parent(i);
        if (p < 0) {
            positions.col(i) = root_position;
            global[u] = local;
        } else {
            const auto pu = static_cast<std::size_t>(p);
            const Eigen::Vector3d& offset = translations.empty() ? topo.offset(i) : translations[u];
            positions.col(i) = positions.col(p) + global[pu] * offset;
            global[u] = global[pu] * local;
        }
    }
    return positions;
}

inline std::vector<Eigen::Quaterniond> local_to_global(const SkeletonTopology& topo,
                                                       std::span<const Eigen::Quaterniond> local) {
    if (static_cast<Index>(local.size()) != topo.node_count())
        throw DimensionError("one rotation per node expected");
    std::vector<Eigen::Quaterniond> global(local.size());
    for (std::size_t i = 0; i < local.size(); ++i) {
        const Index p = topo.parent(static_cast<Index>(i));
        const Eigen::Quaterniond q = checked_unit(local[i]);
        global[i] = p < 0 ? q : global[static_cast<std::size_t>(p)] * q;
    }
    return global;
}

inline std::vector<Eigen::Quaterniond> global_to_local(const SkeletonTopology& topo,
                                                       std::span<const Eigen::Quaterniond> global) {
    if (static_cast<Index>(global.size()) != topo.node_count())
        throw DimensionError("one rotation per node expected");
    std::vector<Eigen::Quaterniond> local(global.size());
    for (std::size_t i = 0; i < global.size(); ++i) {
        const Index p = topo.parent(static_cast<Index>(i));
        const Eigen::Quaterniond q = checked_unit(global[i]);
        local[i] = p < 0 ? q : checked_unit(global[static_cast<std::size_t>(p)]).conjugate() * q;
    }
    return local;
}

/// Rotations of one frame of a rotation series laid out as (w, x, y, z) per node.
template <typename Derived>
std::vector<Eigen::Quaterniond> unpack_rotations(const Eigen::MatrixBase<Derived>& column) {
    if (column.size() % 4 != 0)
        throw DimensionError("rotation frame size is not a multiple of 4");
    std::vector<Eigen::Quaterniond> out;
    out.reserve(static_cast<std::size_t>(column.size() / 4));
    for (Index i = 0; i < column.size(); i += 4)
        out.emplace_back(column[i], column[i + 1], column[i + 2], column[i + 3]);
    return out;
}

inline Eigen::VectorXd pack_rotations(std::span<const Eigen::Quaterniond> rotations) {
    Eigen::VectorXd v(4 * static_cast<Index>(rotations.size()));
    for (std::size_t i = 0; i < rotations.size(); ++i) {
        const auto k = 4 * static_cast<Index>(i);
        v[k] = rotations[i].w();
        v[k + 1] = rotations[i].x();
        v[k + 2] = rotations[i].y();
        v[k + 3] = rotations[i].z();
    }
    return v;
}

/// View of one frame of a position series as a 3 x nodes matrix.
template <typename Derived>
Eigen::Matrix3Xd frame_positions(const Eigen::MatrixBase<Derived>& column) {
    if (column.size() % 3 != 0)
        throw DimensionError("position frame size is not a multiple of 3");
    Eigen::VectorXd flat = column;
    return Eigen::Map<const Eigen::Matrix3Xd>(flat.data(), 3, flat.size() / 3);
}

} // namespace moma
