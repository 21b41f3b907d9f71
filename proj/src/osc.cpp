#include "moma/osc.hpp"

#include <algorithm>
#include <bit>
#include <limits>

namespace moma {

namespace {

template <typename T>
bool same_bits(const T& a, const T& b) {
    if constexpr (std::is_floating_point_v<T>) {
        using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
        return std::bit_cast<U>(a) == std::bit_cast<U>(b);
    } else {
        return a == b;
    }
}

char tag_of(const OscArgument& a) {
    switch (a.index()) {
    case 0: return 'i';
    case 1: return 'f';
    case 2: return 'd';
    default: return 's';
    }
}

void put_be(std::vector<std::uint8_t>& out, std::uint64_t bits, int bytes) {
    for (int i = bytes - 1; i >= 0; --i)
        out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

void put_string(std::vector<std::uint8_t>& out, const std::string& s) {
    if (s.find('\0') != std::string::npos)
        throw InvalidArgument("OSC strings cannot contain NUL");
    out.insert(out.end(), s.begin(), s.end());
    // at least one terminator, then pad to 4
    do
        out.push_back(0);
    while (out.size() % 4 != 0);
}

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

    std::string string(const char* what) {
        const auto begin = data_.begin() + static_cast<std::ptrdiff_t>(pos_);
        const auto nul = std::find(begin, data_.end(), std::uint8_t{0});
        if (nul == data_.end())
            throw OscTruncated(std::string("unterminated ") + what);
        std::string s(begin, nul);
        const std::size_t end = pad(pos_ + s.size() + 1);
        if (end > data_.size())
            throw OscTruncated(std::string(what) + " padding runs past the packet end");
        for (std::size_t i = pos_ + s.size(); i < end; ++i)
            if (data_[i] != 0)
                throw OscMalformed(std::string(what) + " padding is not zero");
        pos_ = end;
        return s;
    }

    std::uint64_t be(int bytes) {
        if (pos_ + static_cast<std::size_t>(bytes) > data_.size())
            throw OscTruncated("packet ends inside an argument");
        std::uint64_t v = 0;
        for (int i = 0; i < bytes; ++i)
            v = (v << 8) | data_[pos_++];
        return v;
    }

    bool done() const { return pos_ == data_.size(); }

private:
    static std::size_t pad(std::size_t n) { return (n + 3) & ~std::size_t{3}; }

    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
};

} // namespace

std::string OscMessage::tags() const {
    std::string t;
    for (const auto& a : arguments)
        t += tag_of(a);
    return t;
}

bool OscMessage::operator==(const OscMessage& other) const {
    if (address != other.address || arguments.size() != other.arguments.size())
        return false;
    for (std::size_t i = 0; i < arguments.size(); ++i) {
        if (arguments[i].index() != other.arguments[i].index())
            return false;
        const bool eq = std::visit(
            [&](const auto& a) { return same_bits(a, std::get<std::decay_t<decltype(a)>>(other.arguments[i])); },
            arguments[i]);
        if (!eq)
            return false;
    }
    return true;
}

std::vector<std::uint8_t> encode(const OscMessage& m) {
    if (m.address.empty() || m.address.front() != '/')
        throw InvalidArgument("OSC address must start with '/'");
    std::vector<std::uint8_t> out;
    put_string(out, m.address);
    put_string(out, "," + m.tags());
    for (const auto& a : m.arguments) {
        switch (a.index()) {
        case 0: put_be(out, static_cast<std::uint32_t>(std::get<0>(a)), 4); break;
        case 1: put_be(out, std::bit_cast<std::uint32_t>(std::get<1>(a)), 4); break;
        case 2: put_be(out, std::bit_cast<std::uint64_t>(std::get<2>(a)), 8); break;
        default: put_string(out, std::get<3>(a)); break;
        }
    }
    return out;
}

OscMessage decode(std::span<const std::uint8_t> packet) {
    if (packet.size() % 4 != 0)
        throw OscTruncated("packet length " + std::to_string(packet.size()) + " is not a multiple of 4");
    Reader in(packet);
    OscMessage m;
    m.address = in.string("address");
    if (m.address.empty() || m.address.front() != '/')
        throw OscMalformed("address must start with '/'");
    if (in.done())
        throw OscTruncated("missing type-tag string");
    const std::string tags = in.string("type-tag string");
    if (tags.empty() || tags.front() != ',')
        throw OscMalformed("type-tag string must start with ','");
    for (std::size_t i = 1; i < tags.size(); ++i) {
        switch (tags[i]) {
        case 'i': m.arguments.emplace_back(static_cast<std::int32_t>(static_cast<std::uint32_t>(in.be(4)))); break;
        case 'f': m.arguments.emplace_back(std::bit_cast<float>(static_cast<std::uint32_t>(in.be(4)))); break;
        case 'd': m.arguments.emplace_back(std::bit_cast<double>(in.be(8))); break;
        case 's': m.arguments.emplace_back(in.string("string argument")); break;
        default: throw OscUnsupportedTag(std::string("unsupported type tag '") + tags[i] + "'");
        }
    }
    if (!in.done())
        throw OscMalformed("trailing bytes after the last argument");
    return m;
}

OscMessage frame_message(double time, const Eigen::Ref<const Eigen::VectorXd>& positions) {
    OscMessage m{kFrameAddress, {}};
    m.arguments.reserve(static_cast<std::size_t>(positions.size()) + 1);
    m.arguments.emplace_back(time);
    for (Index i = 0; i < positions.size(); ++i)
        m.arguments.emplace_back(static_cast<float>(positions[i]));
    return m;
}

DecodedFrame parse_frame_message(const OscMessage& m, Index node_count) {
    if (m.address != kFrameAddress)
        throw InvalidArgument("unexpected address " + m.address);
    const std::string expected = "d" + std::string(static_cast<std::size_t>(3 * node_count), 'f');
    if (m.tags() != expected)
        throw InvalidArgument("frame message has tags '" + m.tags() + "', expected a double and " +
                              std::to_string(3 * node_count) + " floats");
    DecodedFrame f;
    f.time = std::get<double>(m.arguments[0]);
    f.positions.resize(3 * node_count);
    for (Index i = 0; i < f.positions.size(); ++i)
        f.positions[i] = std::get<float>(m.arguments[static_cast<std::size_t>(i) + 1]);
    return f;
}

OscMessage feature_message(const std::string& name, double time, const Eigen::Ref<const Eigen::VectorXd>& values) {
    OscMessage m{kOutputPrefix + name, {}};
    m.arguments.emplace_back(time);
    for (Index i = 0; i < values.size(); ++i)
        m.arguments.emplace_back(static_cast<float>(values[i]));
    return m;
}

OscMessage stats_message(std::int64_t dropped, std::int64_t frames) {
    const auto clamp = [](std::int64_t v) {
        return static_cast<std::int32_t>(std::min<std::int64_t>(v, std::numeric_limits<std::int32_t>::max()));
    };
    return {kStatsAddress, {clamp(dropped), clamp(frames)}};
}

} // namespace moma
