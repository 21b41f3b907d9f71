#include "moma/accel.hpp"

#include "moma/kinematics.hpp"

#include <cmath>
#include <limits>

namespace moma {

AccelRig::AccelRig(Eigen::MatrixXd velocities, Eigen::MatrixXd jerks, double frame_rate, AccelParams params,
                   double start_time)
    : velocities_(std::move(velocities)), jerks_(std::move(jerks)), frame_rate_(frame_rate),
      start_time_(start_time), params_(params) {
    if (velocities_.rows() % 3 != 0 || velocities_.rows() / 3 < 2)
        throw InvalidArgument("an accelerometer rig needs at least 2 joints with 3 rows each");
    if (jerks_.rows() != velocities_.rows() || jerks_.cols() != velocities_.cols())
        throw DimensionError("velocity and jerk tracks differ in shape");
    if (!(frame_rate_ > 0.0))
        throw InvalidArgument("frame rate must be positive");
    if (!(params_.threshold >= 0.0 && params_.threshold <= 1.0))
        throw InvalidArgument("WEI threshold must lie in [0, 1]");
    if (!(params_.mass > 0.0))
        throw InvalidArgument("joint mass must be positive");
    lag_ = params_.lag > 0 ? params_.lag : std::max<Index>(1, static_cast<Index>(std::llround(0.5 * frame_rate_)));
}

AccelRig AccelRig::from_positions(const Series& positions, std::span<const Index> joints, AccelParams params) {
    if (!positions.fixed_rate())
        throw InvalidArgument("accelerometer indices require a fixed frame rate");
    if (positions.frames() < 5)
        throw InvalidArgument("accelerometer indices need at least 5 frames");
    const Eigen::MatrixXd all = positions.matrix();
    Eigen::MatrixXd x(3 * static_cast<Index>(joints.size()), all.cols());
    for (std::size_t k = 0; k < joints.size(); ++k) {
        if (joints[k] < 0 || 3 * joints[k] + 3 > all.rows())
            throw RangeError("rig joint " + std::to_string(joints[k]) + " outside the position track");
        x.middleRows(3 * static_cast<Index>(k), 3) = all.middleRows(3 * joints[k], 3);
    }
    const double dt = 1.0 / positions.frame_rate();
    const double start = positions.time_of_index(0);
    return AccelRig(first_difference(x, dt), third_difference(x, dt), positions.frame_rate(), params, start);
}

namespace {

void check(const AccelRig& rig, Index joint, Index frame) {
    if (joint < 0 || joint >= rig.joints())
        throw RangeError("joint " + std::to_string(joint) + " outside the rig");
    if (frame < 0 || frame >= rig.frames())
        throw RangeError("frame " + std::to_string(frame) + " outside the rig's " + std::to_string(rig.frames()) +
                         " frames");
}

Eigen::VectorXd energies(const AccelRig& rig, Index frame) {
    Eigen::VectorXd e(rig.joints());
    for (Index k = 0; k < rig.joints(); ++k)
        e[k] = joint_energy(rig, k, frame);
    return e;
}

} // namespace

double joint_energy(const AccelRig& rig, Index joint, Index frame) {
    check(rig, joint, frame);
    const double v2 = rig.velocities().col(frame).segment<3>(3 * joint).squaredNorm();
    return 0.5 * rig.params().mass * v2;
}

double weighted_energy_index(const Eigen::Ref<const Eigen::VectorXd>& j, double threshold) {
    if (j.size() < 1)
        throw InvalidArgument("WEI needs at least one joint");
    Index k = 0;
    for (Index i = 1; i < j.size(); ++i)
        if (j[i] > j[k])
            k = i;
    const double m = j[k];
    if (m == 0.0)
        return 0.0;
    if (j.size() == 1)
        return m;
    const double share = (1.0 - threshold) / static_cast<double>(j.size() - 1);
    double total = m;
    for (Index i = 0; i < j.size(); ++i)
        if (i != k)
            total += j[i] / m * share;
    return total;
}

double wei(const AccelRig& rig, Index frame) {
    check(rig, 0, frame);
    return weighted_energy_index(energies(rig, frame), rig.params().threshold);
}

double fluidity_index(const AccelRig& rig, Index joint, Index frame) {
    check(rig, joint, frame);
    const double j2 = rig.jerks().col(frame).segment<3>(3 * joint).squaredNorm();
    return 1.0 / std::max(j2, rig.params().fi_epsilon);
}

std::optional<double> impulsivity_index(const AccelRig& rig, Index joint, Index frame) {
    check(rig, joint, frame);
    if (frame < rig.lag())
        throw RangeError("impulsivity needs frame >= lag (" + std::to_string(rig.lag()) + ")");
    const double past = wei(rig, frame - rig.lag());
    if (past < rig.params().wei_epsilon)
        return std::nullopt;
    return (1.0 / fluidity_index(rig, joint, frame)) * wei(rig, frame) / past;
}

double mean_fluidity_index(const AccelRig& rig, Index frame) {
    double sum = 0.0;
    for (Index k = 0; k < rig.joints(); ++k)
        sum += fluidity_index(rig, k, frame);
    return sum / static_cast<double>(rig.joints());
}

namespace {

std::vector<std::string> joint_components(const AccelRig& rig, const std::vector<std::string>& names) {
    if (!names.empty()) {
        if (static_cast<Index>(names.size()) != rig.joints())
            throw DimensionError("joint name count differs from rig joint count");
        return names;
    }
    std::vector<std::string> out;
    for (Index k = 0; k < rig.joints(); ++k)
        out.push_back(std::to_string(k));
    return out;
}

} // namespace

FeatureSeries wei_series(const AccelRig& rig) {
    Eigen::MatrixXd out(1, rig.frames());
    for (Index f = 0; f < rig.frames(); ++f)
        out(0, f) = wei(rig, f);
    return {"wei", {}, Series(std::move(out), rig.time_model())};
}

FeatureSeries fluidity_series(const AccelRig& rig, const std::vector<std::string>& joint_names) {
    Eigen::MatrixXd out(rig.joints(), rig.frames());
    for (Index f = 0; f < rig.frames(); ++f)
        for (Index k = 0; k < rig.joints(); ++k)
            out(k, f) = fluidity_index(rig, k, f);
    return {"fluidity", joint_components(rig, joint_names), Series(std::move(out), rig.time_model())};
}

FeatureSeries impulsivity_series(const AccelRig& rig, const std::vector<std::string>& joint_names) {
    Eigen::MatrixXd out(rig.joints(), rig.frames());
    out.setConstant(std::numeric_limits<double>::quiet_NaN());
    for (Index f = rig.lag(); f < rig.frames(); ++f)
        for (Index k = 0; k < rig.joints(); ++k)
            if (auto ii = impulsivity_index(rig, k, f))
                out(k, f) = *ii;
    return {"impulsivity", joint_components(rig, joint_names), Series(std::move(out), rig.time_model())};
}

} // namespace moma
