#pragma once

#include "moma/geometry2d.hpp"
#include "moma/skeleton.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace moma {

/// A body segment between two nodes with its centre-of-mass ratio and share of body mass.
struct Segment {
    std::string name;
    Index proximal = 0;
    Index distal = 0;
    double com_ratio = 0.5;
    double mass_fraction = 0.0;
};

/// Segment table used for centre of mass and joint weights. Mass fractions sum to 1 (within 1e-6).
class SegmentModel {
public:
    SegmentModel() = default;
    explicit SegmentModel(std::vector<Segment> segments);

    /// Parses `name proximal distal com_ratio mass_fraction` lines against a topology; '#' starts a comment.
    static SegmentModel parse(std::string_view text, const SkeletonTopology& topology);

    const std::vector<Segment>& segments() const noexcept { return segments_; }
    bool empty() const noexcept { return segments_.empty(); }

    /// Per-node weights: each segment's mass fraction assigned to its proximal node.
    Eigen::VectorXd node_weights(Index node_count) const;

private:
    std::vector<Segment> segments_;
};

/// Default segment table for the common Hips/Spine/LeftArm/... humanoid naming.
std::string_view humanoid_segment_table();

Eigen::Vector3d segment_com(const Eigen::Matrix3Xd& frame, const Segment& segment);

/// Mass-fraction-weighted sum of the segment centres of mass.
Eigen::Vector3d global_com(const Eigen::Matrix3Xd& frame, const SegmentModel& model);

struct SupportBase {
    std::vector<Index> contacts;
    GroundPoints<double> hull;
    GroundPoint<double> center = GroundPoint<double>::Zero();
};

struct SupportConfig {
    /// Nodes allowed to touch the ground; empty means every node.
    std::vector<Index> candidates;
    /// Contacts lie within this height of the lowest candidate.
    double contact_epsilon = 0.05;
    /// And no higher than this absolute height.
    double ground_height = 0.05;
    Axis up = Axis::Z;
};

/// Contact nodes and their ground hull, or nullopt when the body is airborne.
std::optional<SupportBase> support_base(const Eigen::Matrix3Xd& frame, const std::vector<Index>& candidates,
                                        double contact_epsilon, double ground_height, Axis up);

std::optional<SupportBase> support_base(const Eigen::Matrix3Xd& frame, const SupportConfig& config);

inline constexpr int kBalanceInside = 1;
inline constexpr int kBalanceOutside = 0;
inline constexpr int kBalanceNoSupport = -2;

/// 1 when the CoM ground projection is inside the support hull, 0 outside, -2 without support.
int binary_balance(const Eigen::Matrix3Xd& frame, const SegmentModel& model, const SupportConfig& config);

/// Ground distance between support centre and CoM projection; nullopt when airborne.
std::optional<double> continuous_balance(const Eigen::Matrix3Xd& frame, const SegmentModel& model,
                                         const SupportConfig& config);

} // namespace moma
