#pragma once

#include "moma/accel.hpp"
#include "moma/balance.hpp"
#include "moma/ergonomics.hpp"
#include "moma/feature_series.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace moma {

/// Thrown for a feature token that names no registered extractor.
struct UnknownFeature : InvalidArgument {
    using InvalidArgument::InvalidArgument;
};

/// Skeleton-dependent settings shared by all extractors.
struct FeatureResources {
    SkeletonTopology topology;
    SegmentModel segments;
    /// Per-node body weights (segment mass fractions on proximal nodes), sum 1.
    Eigen::VectorXd joint_weights;
    SupportConfig support;
    /// Head, hands and feet when present, otherwise the leaf nodes.
    std::vector<Index> effectors;
    /// Joints of the accelerometer indices: hands and feet when present, otherwise the leaf nodes.
    std::vector<Index> rig_joints;
    AccelParams accel;
    /// Node whose vertical coordinate feeds the period estimate.
    Index period_node = 0;
    /// Default node of the ground-trace features (pelvis / root).
    Index trace_node = 0;
    std::optional<DiscomfortTable> discomfort;
    Axis up = Axis::Z;
};

/**
 * Resolves defaults against a topology. `segment_text` overrides the built-in
 * humanoid table; without it a skeleton the table does not fit gets one
 * equal-mass segment per bone.
 */
FeatureResources make_resources(const SkeletonTopology& topology, Axis up = Axis::Z,
                                const std::optional<std::string>& segment_text = std::nullopt);

/// Position track (and optionally local rotations) with derivatives computed on first use.
class FeatureContext {
public:
    FeatureContext(const FeatureResources& resources, const Series& positions, const Series* rotations = nullptr);

    const FeatureResources& resources() const { return res_; }
    const Series& positions() const { return positions_; }
    const Series* rotations() const { return rotations_; }
    Index frames() const { return x_.cols(); }
    double frame_rate() const { return rate_; }

    const Eigen::MatrixXd& x() const { return x_; }
    Eigen::Map<const Eigen::Matrix3Xd> frame(Index i) const {
        return {x_.col(i).data(), 3, x_.rows() / 3};
    }
    const Eigen::MatrixXd& velocities();
    const Eigen::MatrixXd& accelerations();
    const Eigen::MatrixXd& jerks();
    const AccelRig& rig();

private:
    const FeatureResources& res_;
    const Series& positions_;
    const Series* rotations_;
    Eigen::MatrixXd x_;
    double rate_;
    std::optional<Eigen::MatrixXd> vel_, acc_, jerk_;
    std::optional<AccelRig> rig_;
};

/**
 * Computes one feature value per frame. `lookback` and `lookahead` bound the
 * frames an evaluation reads on either side of its target, so a streaming
 * caller can evaluate on a trimmed window and match offline output.
 */
class FeatureExtractor {
public:
    virtual ~FeatureExtractor() = default;

    virtual std::string name() const = 0;
    virtual std::vector<std::string> components() const { return {}; }
    Index dims() const {
        const auto c = components();
        return c.empty() ? 1 : static_cast<Index>(c.size());
    }
    virtual Index lookback() const { return 0; }
    virtual Index lookahead() const { return 0; }
    /// Stateful extractors must see every frame once, in order.
    virtual bool stateful() const { return false; }
    virtual bool needs_rotations() const { return false; }

    virtual void evaluate(FeatureContext& ctx, Index frame, Eigen::Ref<Eigen::VectorXd> out) = 0;
    virtual void reset() {}
};

/// Builds the extractor for a `name` or `name:param` token; throws UnknownFeature or InvalidArgument.
std::unique_ptr<FeatureExtractor> make_extractor(const std::string& token, const FeatureResources& resources,
                                                 double frame_rate);

/// Registered feature names.
std::vector<std::string> feature_names();

/// Splits a comma-separated feature list, dropping empty items.
std::vector<std::string> split_feature_list(const std::string& list);

class FeaturePipeline {
public:
    FeaturePipeline(FeatureResources resources, const std::vector<std::string>& tokens, double frame_rate);

    const FeatureResources& resources() const { return res_; }
    const std::vector<std::unique_ptr<FeatureExtractor>>& extractors() const { return extractors_; }
    double frame_rate() const { return rate_; }
    Index lookback() const;
    Index lookahead() const;
    bool needs_rotations() const;

    /// Evaluates every frame of a fixed-rate track, in order.
    std::vector<FeatureSeries> extract(const Series& positions, const Series* rotations = nullptr);

    /// Evaluates frame `i` of `ctx` into one vector per extractor.
    void evaluate(FeatureContext& ctx, Index i, std::vector<Eigen::VectorXd>& out);

    void reset();

private:
    FeatureResources res_;
    double rate_;
    std::vector<std::unique_ptr<FeatureExtractor>> extractors_;
};

} // namespace moma
