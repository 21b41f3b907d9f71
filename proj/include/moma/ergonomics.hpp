#pragma once

#include "moma/skeleton.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace moma {

/**
 * Natural cubic spline through (angle, score) knots with strictly increasing
 * angles. Outside the knot range the boundary knot's score is returned; a
 * single knot gives a constant.
 */
class NaturalCubicSpline {
public:
    NaturalCubicSpline(std::vector<double> x, std::vector<double> y);

    double operator()(double x) const;

    const std::vector<double>& knots_x() const noexcept { return x_; }
    const std::vector<double>& knots_y() const noexcept { return y_; }
    /// Second derivative at each knot (zero at both ends).
    const std::vector<double>& curvature() const noexcept { return m_; }

private:
    std::vector<double> x_, y_, m_;
};

/// Score of one degree of freedom at angle `theta` (degrees).
inline double dof_discomfort(double theta, const NaturalCubicSpline& knots) { return knots(theta); }

struct DofDiscomfort {
    Axis axis = Axis::X;
    NaturalCubicSpline curve;
};

/// Discomfort curves of one joint; DoF angles come from its local rotation decomposed in `order`.
struct JointDiscomfort {
    std::string joint;
    Index node = 0;
    AxisOrder order;
    std::vector<DofDiscomfort> dofs;
};

/**
 * Per-joint, per-DoF discomfort knots. Text format:
 *
 *     joint <node-name> <euler-order>
 *     dof <X|Y|Z>
 *     <angle-degrees> <score>
 *     ...
 *
 * Lines starting with '#' are comments.
 */
class DiscomfortTable {
public:
    DiscomfortTable() = default;
    explicit DiscomfortTable(std::vector<JointDiscomfort> joints) : joints_(std::move(joints)) {}

    static DiscomfortTable parse(std::string_view text, const SkeletonTopology& topology);

    const std::vector<JointDiscomfort>& joints() const noexcept { return joints_; }
    const JointDiscomfort& joint(std::string_view name) const;
    bool empty() const noexcept { return joints_.empty(); }

private:
    std::vector<JointDiscomfort> joints_;
};

/// Angle (degrees) of `axis` when `q` is decomposed as Euler angles in `order`.
double dof_angle(const Eigen::Quaterniond& q, const AxisOrder& order, Axis axis);

/// Sum of the joint's DoF discomforts for one frame of local rotations (one per node).
double joint_stress(std::span<const Eigen::Quaterniond> local_rotations, const JointDiscomfort& joint);
double joint_stress(std::span<const Eigen::Quaterniond> local_rotations, std::string_view joint,
                    const DiscomfortTable& table);

/// Unweighted sum of all tabled joint stresses.
double postural_load(std::span<const Eigen::Quaterniond> local_rotations, const DiscomfortTable& table);

struct SpherenessSample {
    double radius = 0.0;    ///< mean end-effector distance to the CoM
    double deviation = 0.0; ///< population standard deviation of those distances
};

/// Mean and spread of end-effector distances from `com` (head, hands and feet by convention).
SpherenessSample sphereness(const Eigen::Matrix3Xd& frame, std::span<const Index> end_effectors,
                            const Eigen::Vector3d& com);

} // namespace moma
