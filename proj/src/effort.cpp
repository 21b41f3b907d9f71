#include "moma/effort.hpp"

#include "moma/text.hpp"

#include <cmath>
#include <limits>

namespace moma {

Index EffortWindow::frames(double frame_rate) const {
    if (!(seconds > 0.0))
        throw InvalidArgument("effort window must be positive");
    return std::max<Index>(1, static_cast<Index>(std::llround(seconds * frame_rate)));
}

std::string EffortWindow::label() const { return format_number(seconds); }

void check_joint_weights(const Eigen::VectorXd& weights, Index joints) {
    if (weights.size() != joints)
        throw DimensionError("got " + std::to_string(weights.size()) + " joint weights for " +
                             std::to_string(joints) + " joints");
    if ((weights.array() < 0.0).any())
        throw InvalidArgument("joint weights must be non-negative");
    if (std::abs(weights.sum() - 1.0) > 1e-6)
        throw InvalidArgument("joint weights sum to " + format_number(weights.sum()) + ", expected 1");
}

double trailing_max_at(const Eigen::Ref<const Eigen::RowVectorXd>& x, Index w, Index i) {
    const Index s = std::max<Index>(0, i - w + 1);
    double m = -std::numeric_limits<double>::infinity();
    for (Index j = s; j <= i; ++j)
        m = std::max(m, x[j]);
    return m;
}

double trailing_mean_at(const Eigen::Ref<const Eigen::RowVectorXd>& x, Index w, Index i) {
    const Index s = std::max<Index>(0, i - w + 1);
    double sum = 0.0;
    for (Index j = s; j <= i; ++j)
        sum += x[j];
    return sum / static_cast<double>(i - s + 1);
}

double directness_at(const Eigen::Ref<const Eigen::MatrixXd>& xyz, Index w, Index i) {
    const Index s = std::max<Index>(0, i - w + 1);
    double path = 0.0;
    for (Index j = s + 1; j <= i; ++j)
        path += (xyz.col(j) - xyz.col(j - 1)).norm();
    const double net = (xyz.col(i) - xyz.col(s)).norm();
    if (net < kDisplacementEpsilon)
        return std::numeric_limits<double>::quiet_NaN();
    return path / net;
}

double weighted_sum(const Eigen::Ref<const Eigen::VectorXd>& per_joint, const Eigen::VectorXd& weights) {
    double total = 0.0;
    for (Index k = 0; k < per_joint.size(); ++k) {
        if (weights[k] == 0.0)
            continue;
        if (std::isnan(per_joint[k]))
            return std::numeric_limits<double>::quiet_NaN();
        total += weights[k] * per_joint[k];
    }
    return total;
}

Eigen::MatrixXd joint_kinetic_energy(const Eigen::Ref<const Eigen::MatrixXd>& velocities) {
    if (velocities.rows() % 3 != 0)
        throw DimensionError("velocity matrix needs 3 rows per joint");
    Eigen::MatrixXd e(velocities.rows() / 3, velocities.cols());
    for (Index k = 0; k < e.rows(); ++k)
        e.row(k) = velocities.middleRows(3 * k, 3).colwise().squaredNorm();
    return e;
}

namespace {

std::vector<std::string> component_names(const std::vector<std::string>& names, Index joints) {
    if (!names.empty()) {
        if (static_cast<Index>(names.size()) != joints)
            throw DimensionError("joint name count differs from joint count");
        return names;
    }
    std::vector<std::string> out;
    for (Index k = 0; k < joints; ++k)
        out.push_back(std::to_string(k));
    return out;
}

JointFeature assemble(std::string name, Eigen::MatrixXd per_joint, const Eigen::VectorXd& weights,
                      const TimeModel& time, const std::vector<std::string>& names) {
    Eigen::MatrixXd body(1, per_joint.cols());
    for (Index f = 0; f < per_joint.cols(); ++f)
        body(0, f) = weighted_sum(per_joint.col(f), weights);
    JointFeature out;
    out.joints.name = name;
    out.joints.components = component_names(names, per_joint.rows());
    out.joints.values = Series(std::move(per_joint), time);
    out.body.name = std::move(name);
    out.body.values = Series(std::move(body), time);
    return out;
}

} // namespace

JointFeature kinetic_energy(const DerivativeTrack<double>& velocities, const Eigen::VectorXd& weights,
                            const std::vector<std::string>& joint_names) {
    if (velocities.order != 1)
        throw InvalidArgument("kinetic energy expects a velocity track");
    Eigen::MatrixXd per_joint = joint_kinetic_energy(velocities.values.matrix());
    check_joint_weights(weights, per_joint.rows());
    return assemble("kinetic_energy", std::move(per_joint), weights, velocities.values.time_model(), joint_names);
}

FeatureSeries weight_effort(const FeatureSeries& energy, const EffortWindow& window) {
    if (energy.values.dims() != 1)
        throw DimensionError("weight effort expects a scalar energy series");
    const Index w = window.frames(energy.values.frame_rate());
    const Eigen::RowVectorXd e = energy.values.matrix().row(0);
    Eigen::MatrixXd out(1, e.size());
    for (Index i = 0; i < e.size(); ++i)
        out(0, i) = trailing_max_at(e, w, i);
    return {"weight_effort_" + window.label(), {}, Series(std::move(out), energy.values.time_model())};
}

JointFeature time_effort(const DerivativeTrack<double>& accelerations, const Eigen::VectorXd& weights,
                         const EffortWindow& window, const std::vector<std::string>& joint_names) {
    if (accelerations.order != 2)
        throw InvalidArgument("time effort expects an acceleration track");
    const Eigen::MatrixXd mag = node_norms(accelerations.values.matrix());
    check_joint_weights(weights, mag.rows());
    const Index w = window.frames(accelerations.values.frame_rate());
    Eigen::MatrixXd per_joint(mag.rows(), mag.cols());
    for (Index k = 0; k < mag.rows(); ++k)
        for (Index i = 0; i < mag.cols(); ++i)
            per_joint(k, i) = trailing_mean_at(mag.row(k), w, i);
    return assemble("time_effort_" + window.label(), std::move(per_joint), weights,
                    accelerations.values.time_model(), joint_names);
}

JointFeature space_effort(const Series& positions, const Eigen::VectorXd& weights, const EffortWindow& window,
                          const std::vector<std::string>& joint_names) {
    if (positions.dims() % 3 != 0)
        throw DimensionError("position track needs 3 rows per joint");
    const Index joints = positions.dims() / 3;
    check_joint_weights(weights, joints);
    const Index w = window.frames(positions.frame_rate());
    if (w < 2)
        throw InvalidArgument("space effort window must span at least 2 frames");
    const Eigen::MatrixXd x = positions.matrix();
    Eigen::MatrixXd per_joint(joints, x.cols());
    for (Index k = 0; k < joints; ++k) {
        const Eigen::MatrixXd xyz = x.middleRows(3 * k, 3);
        for (Index i = 0; i < x.cols(); ++i)
            per_joint(k, i) = directness_at(xyz, w, i);
    }
    return assemble("space_effort_" + window.label(), std::move(per_joint), weights, positions.time_model(),
                    joint_names);
}

JointFeature flow_effort(const DerivativeTrack<double>& jerk_magnitudes, const Eigen::VectorXd& weights,
                         const EffortWindow& window, const std::vector<std::string>& joint_names) {
    if (jerk_magnitudes.order != 3)
        throw InvalidArgument("flow effort expects jerk magnitudes");
    const Eigen::MatrixXd mag = jerk_magnitudes.values.matrix();
    check_joint_weights(weights, mag.rows());
    const Index w = window.frames(jerk_magnitudes.values.frame_rate());
    Eigen::MatrixXd per_joint(mag.rows(), mag.cols());
    for (Index k = 0; k < mag.rows(); ++k)
        for (Index i = 0; i < mag.cols(); ++i)
            per_joint(k, i) = trailing_mean_at(mag.row(k), w, i);
    return assemble("flow_effort_" + window.label(), std::move(per_joint), weights,
                    jerk_magnitudes.values.time_model(), joint_names);
}

double CoveredDistance::add(const GroundPoint<double>& p) {
    if (started_)
        total_ += (p - last_).norm();
    started_ = true;
    last_ = p;
    return total_;
}

double CoveredArea::add(const GroundPoint<double>& p) {
    if (hull_.size() >= 3 && point_in_convex_polygon(p, hull_))
        return area_;
    GroundPoints<double> pts = hull_;
    pts.push_back(p);
    hull_ = convex_hull(std::move(pts));
    area_ = std::max(area_, polygon_area(hull_));
    return area_;
}

namespace {

template <typename Accumulator>
FeatureSeries accumulate_ground(const Series& positions, Index node, Axis up, std::string name) {
    if (node < 0 || 3 * node + 3 > positions.dims())
        throw RangeError("node " + std::to_string(node) + " outside the position track");
    if (positions.frames() < 1)
        throw InvalidArgument(name + " needs at least one frame");
    Accumulator acc;
    Eigen::MatrixXd out(1, positions.frames());
    for (Index i = 0; i < positions.frames(); ++i) {
        const Eigen::Vector3d p = positions.frame(i).template segment<3>(3 * node);
        out(0, i) = acc.add(project_to_ground(p, up));
    }
    return {std::move(name), {}, Series(std::move(out), positions.time_model())};
}

} // namespace

FeatureSeries covered_distance(const Series& positions, Index node, Axis up) {
    return accumulate_ground<CoveredDistance>(positions, node, up, "covered_distance");
}

FeatureSeries covered_area(const Series& positions, Index node, Axis up) {
    return accumulate_ground<CoveredArea>(positions, node, up, "covered_area");
}

} // namespace moma
