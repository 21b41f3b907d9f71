#pragma once

#include "moma/skeleton.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace moma {

enum class BvhChannel { Xposition, Yposition, Zposition, Xrotation, Yrotation, Zrotation };

std::string_view to_string(BvhChannel c);

/// A BVH file as written: hierarchy, per-node channel declarations and the raw motion block.
struct BvhDocument {
    SkeletonTopology topology;
    /// Declared channels per node; End Site nodes have none.
    std::vector<std::vector<BvhChannel>> channels;
    double frame_time = 0.0;
    /// channel_count x frames, columns in file order.
    Eigen::MatrixXd motion;

    Index channel_count() const { return motion.rows(); }
    Index frame_count() const { return motion.cols(); }
};

struct MotionData {
    SkeletonTopology topology;
    PoseTrack pose;
};

/// Parses the HIERARCHY and MOTION sections. Throws ParseError on malformed input.
BvhDocument parse_bvh_document(std::string_view text);

/// Converts raw channels into global positions (scaled by `scale`) and local quaternions.
MotionData to_motion(const BvhDocument& doc, double scale = 1.0);

inline MotionData parse_bvh(std::string_view text, double scale = 1.0) {
    return to_motion(parse_bvh_document(text), scale);
}

MotionData load_bvh(const std::string& path, double scale = 1.0);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view text);

} // namespace moma
