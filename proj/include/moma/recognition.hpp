#pragma once

#include "moma/labels.hpp"
#include "moma/skeleton.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace moma {

enum class RelationKind {
    PlaneSide,     ///< nodes a b c d: signed distance of d to plane (a, b, c) above threshold
    DistanceBelow, ///< nodes a b: |a - b| below threshold
    AngleBelow,    ///< nodes a b c d: angle between (b - a) and (d - c), degrees, below threshold
    SpeedAbove,    ///< node a: speed above threshold
};

std::string_view to_string(RelationKind kind);

/**
 * Boolean geometric predicate between joints. `on` switches the feature to
 * 1, `off` back to 0; equal values give plain thresholding. For the *Above
 * kinds off <= on, for the *Below kinds off >= on.
 */
struct RelationalFeatureDef {
    RelationKind kind = RelationKind::DistanceBelow;
    std::vector<Index> nodes;
    double on = 0.0;
    double off = 0.0;
};

/// Number of node arguments each kind takes.
Index relation_arity(RelationKind kind);

/// Parses `kind node... on [off]` lines ('#' comments) against a topology.
std::vector<RelationalFeatureDef> parse_feature_set(std::string_view text, const SkeletonTopology& topology);

/// features x frames, entries 0 or 1.
using FeatureMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Raw quantity a definition thresholds, for one frame (speed needs `velocity` = 3 x nodes).
double relation_value(const RelationalFeatureDef& def, const Eigen::Matrix3Xd& frame,
                      const Eigen::Matrix3Xd& velocity);

/// Evaluates every definition on every frame, applying hysteresis.
FeatureMatrix relational_features(const Series& positions, const std::vector<RelationalFeatureDef>& defs);

struct Run {
    std::uint8_t value = 0;
    Index start = 0;
    Index length = 0;

    bool operator==(const Run&) const = default;
};

/// Run-length encoding of each feature row.
std::vector<std::vector<Run>> segment_encode(const FeatureMatrix& m);
FeatureMatrix segment_decode(const std::vector<std::vector<Run>>& runs);

/// Mean of aligned executions, F x K in [0, 1]. Rows with a value in (tau_lo, tau_hi) are uncertain.
struct MotionTemplate {
    Eigen::MatrixXd values;
    double tau_lo = 0.1;
    double tau_hi = 0.9;

    Index features() const { return values.rows(); }
    Index frames() const { return values.cols(); }
    bool uncertain(Index feature, Index frame) const {
        const double v = values(feature, frame);
        return v > tau_lo && v < tau_hi;
    }
};

/// Header `F K tau_lo tau_hi`, then F rows of K values.
std::string write_template(const MotionTemplate& t);
MotionTemplate read_template(std::string_view text);

/// Mean absolute difference between two columns.
double column_distance(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b);

/// Full DTW warping path between two feature sequences (symmetric steps), from (0, 0) to the last frames.
std::vector<std::pair<Index, Index>> dtw_path(const Eigen::MatrixXd& reference, const Eigen::MatrixXd& other);

/// Aligns every execution to the first one and averages per reference frame.
MotionTemplate build_template(const std::vector<FeatureMatrix>& executions, double tau_lo = 0.1,
                              double tau_hi = 0.9);

/// Distance of the best template match ending at each motion frame, with that match's first frame.
struct MatchCurve {
    Eigen::VectorXd distance;
    std::vector<Index> start;
};

/**
 * Subsequence DTW with a free start. Local cost is the mean absolute
 * difference over the template's certain rows; a path's cost is its
 * accumulated cost divided by its length.
 */
MatchCurve subsequence_distance(const MotionTemplate& tmpl, const Eigen::MatrixXd& motion);

inline MatchCurve subsequence_distance(const MotionTemplate& tmpl, const FeatureMatrix& motion) {
    return subsequence_distance(tmpl, Eigen::MatrixXd(motion.cast<double>()));
}

/// Frame interval [first, last] of a detected occurrence.
struct Detection {
    Index first = 0;
    Index last = 0;

    bool operator==(const Detection&) const = default;
};

/**
 * Maximal runs of frames with distance strictly below `threshold`. Each run
 * is widened back to the start of its best match; runs closer than
 * `merge_gap` frames are merged. Output is sorted and disjoint.
 */
std::vector<Detection> detect(const MatchCurve& curve, double threshold, Index merge_gap = 1);

/// Converts detections to labels using a frame-to-seconds mapping of `frame_rate` starting at `start_time`.
std::vector<Label> detections_to_labels(const std::vector<Detection>& detections, double frame_rate,
                                        const std::string& name, double start_time = 0.0);

} // namespace moma
