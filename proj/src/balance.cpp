#include "moma/balance.hpp"

#include "moma/text.hpp"

#include <algorithm>
#include <limits>

namespace moma {

namespace {

constexpr std::string_view kHumanoidTable = R"(# Segment inertial parameters for an adult male body
# (de Leva adjustments of the Zatsiorsky-Seluyanov data).
# name          proximal       distal          com_ratio  mass_fraction
head            Neck           Head_end        0.4998     0.0694
trunk           Hips           Neck            0.5514     0.4346
upperarm_l      LeftArm        LeftForeArm     0.5772     0.0271
forearm_l       LeftForeArm    LeftHand        0.4574     0.0162
hand_l          LeftHand       LeftHand_end    0.7900     0.0061
upperarm_r      RightArm       RightForeArm    0.5772     0.0271
forearm_r       RightForeArm   RightHand       0.4574     0.0162
hand_r          RightHand      RightHand_end   0.7900     0.0061
thigh_l         LeftUpLeg      LeftLeg         0.4095     0.1416
shank_l         LeftLeg        LeftFoot        0.4459     0.0433
foot_l          LeftFoot       LeftToe_end     0.4415     0.0137
thigh_r         RightUpLeg     RightLeg        0.4095     0.1416
shank_r         RightLeg       RightFoot       0.4459     0.0433
foot_r          RightFoot      RightToe_end    0.4415     0.0137
)";

} // namespace

std::string_view humanoid_segment_table() { return kHumanoidTable; }

SegmentModel::SegmentModel(std::vector<Segment> segments) : segments_(std::move(segments)) {
    if (segments_.empty())
        throw InvalidArgument("segment model has no segments");
    double total = 0.0;
    for (const auto& s : segments_) {
        if (!(s.com_ratio >= 0.0 && s.com_ratio <= 1.0))
            throw InvalidArgument("segment '" + s.name + "' com_ratio outside [0, 1]");
        if (!(s.mass_fraction >= 0.0 && s.mass_fraction <= 1.0))
            throw InvalidArgument("segment '" + s.name + "' mass_fraction outside [0, 1]");
        total += s.mass_fraction;
    }
    if (std::abs(total - 1.0) > 1e-6)
        throw InvalidArgument("segment mass fractions sum to " + format_number(total) + ", expected 1");
}

SegmentModel SegmentModel::parse(std::string_view text, const SkeletonTopology& topology) {
    std::vector<Segment> segments;
    int line_no = 0;
    for (auto line : split_lines(text)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        const auto w = split_whitespace(line);
        if (w.empty())
            continue;
        if (w.size() != 5)
            throw ParseError("segment line needs 'name proximal distal com_ratio mass_fraction'", line_no);
        Segment s;
        s.name = std::string(w[0]);
        const auto prox = topology.find(w[1]);
        const auto dist = topology.find(w[2]);
        if (!prox || !dist)
            throw ParseError("segment '" + s.name + "' references unknown node '" +
                                 std::string(prox ? w[2] : w[1]) + "'",
                             line_no);
        s.proximal = *prox;
        s.distal = *dist;
        s.com_ratio = parse_number(w[3], line_no);
        s.mass_fraction = parse_number(w[4], line_no);
        segments.push_back(std::move(s));
    }
    return SegmentModel(std::move(segments));
}

Eigen::VectorXd SegmentModel::node_weights(Index node_count) const {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(node_count);
    for (const auto& s : segments_) {
        if (s.proximal >= node_count)
            throw RangeError("segment '" + s.name + "' references a node outside the skeleton");
        w[s.proximal] += s.mass_fraction;
    }
    return w;
}

Eigen::Vector3d segment_com(const Eigen::Matrix3Xd& frame, const Segment& segment) {
    if (segment.proximal < 0 || segment.distal < 0 || segment.proximal >= frame.cols() ||
        segment.distal >= frame.cols())
        throw RangeError("segment '" + segment.name + "' references an unknown node");
    const auto prox = frame.col(segment.proximal);
    return prox + segment.com_ratio * (frame.col(segment.distal) - prox);
}

Eigen::Vector3d global_com(const Eigen::Matrix3Xd& frame, const SegmentModel& model) {
    if (model.empty())
        throw InvalidArgument("empty segment model");
    Eigen::Vector3d com = Eigen::Vector3d::Zero();
    for (const auto& s : model.segments())
        com += s.mass_fraction * segment_com(frame, s);
    return com;
}

std::optional<SupportBase> support_base(const Eigen::Matrix3Xd& frame, const std::vector<Index>& candidates,
                                        double contact_epsilon, double ground_height, Axis up) {
    if (candidates.empty())
        throw InvalidArgument("support base needs at least one candidate node");
    if (!(contact_epsilon >= 0.0))
        throw InvalidArgument("contact epsilon must be non-negative");
    const int up_row = static_cast<int>(up);

    double lowest = std::numeric_limits<double>::infinity();
    for (Index c : candidates) {
        if (c < 0 || c >= frame.cols())
            throw RangeError("support candidate " + std::to_string(c) + " is not a node");
        lowest = std::min(lowest, frame(up_row, c));
    }

    SupportBase base;
    GroundPoints<double> ground;
    for (Index c : candidates) {
        const double h = frame(up_row, c);
        if (h <= lowest + contact_epsilon && h <= ground_height) {
            base.contacts.push_back(c);
            ground.push_back(project_to_ground(frame.col(c), up));
        }
    }
    if (base.contacts.empty())
        return std::nullopt;

    for (const auto& g : ground)
        base.center += g;
    base.center /= static_cast<double>(ground.size());
    base.hull = convex_hull(std::move(ground));
    return base;
}

std::optional<SupportBase> support_base(const Eigen::Matrix3Xd& frame, const SupportConfig& config) {
    if (!config.candidates.empty())
        return support_base(frame, config.candidates, config.contact_epsilon, config.ground_height, config.up);
    std::vector<Index> all(static_cast<std::size_t>(frame.cols()));
    for (Index i = 0; i < frame.cols(); ++i)
        all[static_cast<std::size_t>(i)] = i;
    return support_base(frame, all, config.contact_epsilon, config.ground_height, config.up);
}

int binary_balance(const Eigen::Matrix3Xd& frame, const SegmentModel& model, const SupportConfig& config) {
    const auto base = support_base(frame, config);
    if (!base)
        return kBalanceNoSupport;
    const auto com = project_to_ground(global_com(frame, model), config.up);
    return point_in_convex_polygon(com, base->hull) ? kBalanceInside : kBalanceOutside;
}

std::optional<double> continuous_balance(const Eigen::Matrix3Xd& frame, const SegmentModel& model,
                                         const SupportConfig& config) {
    const auto base = support_base(frame, config);
    if (!base)
        return std::nullopt;
    const auto com = project_to_ground(global_com(frame, model), config.up);
    return (com - base->center).norm();
}

} // namespace moma
