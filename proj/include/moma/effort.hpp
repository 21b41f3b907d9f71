#pragma once

#include "moma/feature_series.hpp"
#include "moma/geometry2d.hpp"
#include "moma/kinematics.hpp"

#include <string>
#include <vector>

namespace moma {

/// Trailing analysis window of `seconds`, ending at the current frame.
struct EffortWindow {
    double seconds = 0.5;

    /// round(seconds * rate), at least 1.
    Index frames(double frame_rate) const;
    /// Feature-name suffix, e.g. "0.5".
    std::string label() const;
};

/// Net displacement below this (meters) leaves space effort undefined.
inline constexpr double kDisplacementEpsilon = 1e-6;

/// Throws unless `weights` has one entry per joint and sums to 1 within 1e-6.
void check_joint_weights(const Eigen::VectorXd& weights, Index joints);

// Per-frame kernels. Each reads only frames max(0, i - w + 1) .. i of its input,
// so streaming and offline evaluation agree bit for bit.

double trailing_max_at(const Eigen::Ref<const Eigen::RowVectorXd>& x, Index w, Index i);
double trailing_mean_at(const Eigen::Ref<const Eigen::RowVectorXd>& x, Index w, Index i);
/// Path length over net displacement of one joint's 3-row track; NaN below kDisplacementEpsilon.
double directness_at(const Eigen::Ref<const Eigen::MatrixXd>& xyz, Index w, Index i);

/// Weighted sum over joints with positive weight; NaN if any of those joints is NaN.
double weighted_sum(const Eigen::Ref<const Eigen::VectorXd>& per_joint, const Eigen::VectorXd& weights);

/// |v|^2 per joint from a 3J-row velocity matrix.
Eigen::MatrixXd joint_kinetic_energy(const Eigen::Ref<const Eigen::MatrixXd>& velocities);

/// Per-joint values (one component per joint) and their weighted whole-body aggregate.
struct JointFeature {
    FeatureSeries joints;
    FeatureSeries body;
};

JointFeature kinetic_energy(const DerivativeTrack<double>& velocities, const Eigen::VectorXd& weights,
                            const std::vector<std::string>& joint_names = {});

/// Trailing maximum of a scalar energy series.
FeatureSeries weight_effort(const FeatureSeries& energy, const EffortWindow& window);

/// Windowed mean of acceleration magnitude per joint.
JointFeature time_effort(const DerivativeTrack<double>& accelerations, const Eigen::VectorXd& weights,
                         const EffortWindow& window, const std::vector<std::string>& joint_names = {});

/// Windowed path length over net displacement per joint; undefined where the joint barely moved.
JointFeature space_effort(const Series& positions, const Eigen::VectorXd& weights, const EffortWindow& window,
                          const std::vector<std::string>& joint_names = {});

/// Windowed mean of jerk magnitude per joint (input: one magnitude row per joint).
JointFeature flow_effort(const DerivativeTrack<double>& jerk_magnitudes, const Eigen::VectorXd& weights,
                         const EffortWindow& window, const std::vector<std::string>& joint_names = {});

/// Running ground path length of one point.
class CoveredDistance {
public:
    double add(const GroundPoint<double>& p);
    double value() const noexcept { return total_; }

private:
    bool started_ = false;
    GroundPoint<double> last_ = GroundPoint<double>::Zero();
    double total_ = 0.0;
};

/// Running convex-hull area of a ground trace.
class CoveredArea {
public:
    double add(const GroundPoint<double>& p);
    double value() const noexcept { return area_; }
    const GroundPoints<double>& hull() const noexcept { return hull_; }

private:
    GroundPoints<double> hull_;
    double area_ = 0.0;
};

FeatureSeries covered_distance(const Series& positions, Index node, Axis up = Axis::Z);
FeatureSeries covered_area(const Series& positions, Index node, Axis up = Axis::Z);

} // namespace moma
