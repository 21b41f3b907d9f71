#pragma once

#include "moma/error.hpp"
#include "moma/timed_series.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace moma {

/// OSC argument: tag 'i', 'f', 'd' or 's'.
using OscArgument = std::variant<std::int32_t, float, double, std::string>;

/// An OSC 1.0 message. Equality compares floating-point arguments bit for bit.
struct OscMessage {
    std::string address;
    std::vector<OscArgument> arguments;

    /// Type-tag string without the leading ',', e.g. "dfff".
    std::string tags() const;
    bool operator==(const OscMessage& other) const;
};

struct OscError : Error {
    using Error::Error;
};
struct OscTruncated : OscError {
    using OscError::OscError;
};
struct OscMalformed : OscError {
    using OscError::OscError;
};
struct OscUnsupportedTag : OscError {
    using OscError::OscError;
};

/// Encodes with zero-terminated, 4-byte padded strings and big-endian numbers.
std::vector<std::uint8_t> encode(const OscMessage& message);

/// Throws OscTruncated, OscMalformed or OscUnsupportedTag on bad input.
OscMessage decode(std::span<const std::uint8_t> packet);

inline constexpr const char* kFrameAddress = "/moma/in/frame";
inline constexpr const char* kStatsAddress = "/moma/out/_stats";
inline constexpr const char* kOutputPrefix = "/moma/out/";

/// `/moma/in/frame`: a 64-bit timestamp followed by one 32-bit float per position value.
OscMessage frame_message(double time, const Eigen::Ref<const Eigen::VectorXd>& positions);

struct DecodedFrame {
    double time = 0.0;
    Eigen::VectorXd positions;
};

/// Checks address and tags `d` + 3J `f`; throws InvalidArgument on the wrong address or arity.
DecodedFrame parse_frame_message(const OscMessage& message, Index node_count);

/// `/moma/out/<column>` with a 64-bit timestamp and one 32-bit float per dimension.
OscMessage feature_message(const std::string& name, double time, const Eigen::Ref<const Eigen::VectorXd>& values);

/// `/moma/out/_stats` with dropped and processed frame counts.
OscMessage stats_message(std::int64_t dropped, std::int64_t frames);

} // namespace moma
