#pragma once

#include "moma/feature_series.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace moma {

struct AccelParams {
    /// Mass applied to every joint.
    double mass = 1.0;
    /// Limits the contribution of the non-maximal joints, in [0, 1].
    double threshold = 0.5;
    /// Frames between the two energies compared by the impulsivity index; 0 selects 0.5 s worth.
    Index lag = 0;
    /// Floor of the squared jerk sum, keeping the fluidity index finite.
    double fi_epsilon = 1e-9;
    /// Past energy below this leaves the impulsivity index undefined.
    double wei_epsilon = 1e-9;
};

/**
 * Velocity and jerk of N tracked joints (3 rows each) sharing one fixed-rate
 * time base, e.g. four limb sensors.
 */
class AccelRig {
public:
    AccelRig(Eigen::MatrixXd velocities, Eigen::MatrixXd jerks, double frame_rate, AccelParams params = {},
             double start_time = 0.0);

    /// Derives velocity (central differences) and jerk (five-point stencil) of `joints` from a position track.
    static AccelRig from_positions(const Series& positions, std::span<const Index> joints, AccelParams params = {});

    Index joints() const { return velocities_.rows() / 3; }
    Index frames() const { return velocities_.cols(); }
    Index lag() const { return lag_; }
    double frame_rate() const { return frame_rate_; }
    const AccelParams& params() const { return params_; }
    const Eigen::MatrixXd& velocities() const { return velocities_; }
    const Eigen::MatrixXd& jerks() const { return jerks_; }
    TimeModel time_model() const { return FixedRate{frame_rate_, start_time_}; }

private:
    Eigen::MatrixXd velocities_;
    Eigen::MatrixXd jerks_;
    double frame_rate_;
    double start_time_;
    AccelParams params_;
    Index lag_;
};

/// 1/2 m |v|^2 of one joint.
double joint_energy(const AccelRig& rig, Index joint, Index frame);

/**
 * Weighted energy index of a set of joint energies: the maximum M plus, for
 * every other joint, (J_i / M) (1 - threshold) / (N - 1). Zero when all joints
 * are at rest; ties for the maximum go to the lowest index.
 */
double weighted_energy_index(const Eigen::Ref<const Eigen::VectorXd>& energies, double threshold);

double wei(const AccelRig& rig, Index frame);

/// 1 / max(|jerk|^2, fi_epsilon) of one joint.
double fluidity_index(const AccelRig& rig, Index joint, Index frame);

/// (1 / FI) * WEI(f) / WEI(f - lag); nullopt when the past energy is below wei_epsilon.
std::optional<double> impulsivity_index(const AccelRig& rig, Index joint, Index frame);

/// Mean over joints (extension: the per-joint values are primary).
double mean_fluidity_index(const AccelRig& rig, Index frame);

FeatureSeries wei_series(const AccelRig& rig);
FeatureSeries fluidity_series(const AccelRig& rig, const std::vector<std::string>& joint_names = {});
/// Frames before the lag, and frames with negligible past energy, are NaN.
FeatureSeries impulsivity_series(const AccelRig& rig, const std::vector<std::string>& joint_names = {});

} // namespace moma
