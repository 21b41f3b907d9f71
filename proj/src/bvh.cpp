#include "moma/bvh.hpp"

#include "moma/text.hpp"

#include <fstream>
#include <sstream>

namespace moma {

std::string_view to_string(BvhChannel c) {
    switch (c) {
    case BvhChannel::Xposition: return "Xposition";
    case BvhChannel::Yposition: return "Yposition";
    case BvhChannel::Zposition: return "Zposition";
    case BvhChannel::Xrotation: return "Xrotation";
    case BvhChannel::Yrotation: return "Yrotation";
    case BvhChannel::Zrotation: return "Zrotation";
    }
    return "?";
}

namespace {

bool is_rotation(BvhChannel c) {
    return c == BvhChannel::Xrotation || c == BvhChannel::Yrotation || c == BvhChannel::Zrotation;
}

int axis_of(BvhChannel c) { return static_cast<int>(c) % 3; }

struct Token {
    std::string_view text;
    int line;
};

class HierarchyReader {
public:
    HierarchyReader(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

    bool done() const { return pos_ >= tokens_.size(); }

    const Token& peek() const {
        if (done())
            throw ParseError("unexpected end of hierarchy", tokens_.empty() ? 0 : tokens_.back().line);
        return tokens_[pos_];
    }

    Token next() {
        const Token& t = peek();
        ++pos_;
        return t;
    }

    void expect(std::string_view word) {
        const Token t = next();
        if (t.text != word)
            throw ParseError("expected '" + std::string(word) + "', found '" + std::string(t.text) + "'", t.line);
    }

    double number() {
        const Token t = next();
        return parse_number(t.text, t.line);
    }

    void joint(BvhDocument& doc, std::string name, Index parent, int depth) {
        if (depth > 512)
            throw ParseError("hierarchy nested too deeply", peek().line);
        expect("{");
        expect("OFFSET");
        Eigen::Vector3d offset;
        for (int i = 0; i < 3; ++i)
            offset[i] = number();
        const Index id = doc.topology.add_node(std::move(name), parent, offset);
        doc.channels.emplace_back();

        if (peek().text == "CHANNELS") {
            next();
            const Token count_tok = next();
            const double count = parse_number(count_tok.text, count_tok.line);
            if (count < 0 || count > 6 || count != std::floor(count))
                throw ParseError("invalid channel count", count_tok.line);
            for (int i = 0; i < static_cast<int>(count); ++i) {
                const Token c = next();
                doc.channels.back().push_back(parse_channel(c));
            }
        }

        while (true) {
            const Token t = next();
            if (t.text == "}")
                return;
            if (t.text == "JOINT") {
                joint(doc, std::string(next().text), id, depth + 1);
            } else if (t.text == "End") {
                expect("Site");
                expect("{");
                expect("OFFSET");
                Eigen::Vector3d end;
                for (int i = 0; i < 3; ++i)
                    end[i] = number();
                expect("}");
                doc.topology.add_node(doc.topology.name(id) + "_end", id, end);
                doc.channels.emplace_back();
            } else {
                throw ParseError("unexpected token '" + std::string(t.text) + "' in joint block", t.line);
            }
        }
    }

private:
    static BvhChannel parse_channel(const Token& t) {
        static constexpr std::string_view names[] = {"Xposition", "Yposition", "Zposition",
                                                     "Xrotation", "Yrotation", "Zrotation"};
        for (int i = 0; i < 6; ++i)
            if (t.text == names[i])
                return static_cast<BvhChannel>(i);
        throw ParseError("unknown channel '" + std::string(t.text) + "'", t.line);
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
};

} // namespace

BvhDocument parse_bvh_document(std::string_view text) {
    const auto lines = split_lines(text);

    std::size_t motion_line = lines.size();
    bool has_hierarchy = false;
    std::vector<Token> tokens;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto words = split_whitespace(lines[i]);
        if (words.empty())
            continue;
        if (words[0] == "MOTION") {
            motion_line = i;
            break;
        }
        for (auto w : words) {
            if (!has_hierarchy) {
                if (w != "HIERARCHY")
                    throw ParseError("missing HIERARCHY section", static_cast<int>(i + 1));
                has_hierarchy = true;
                continue;
            }
            tokens.push_back({w, static_cast<int>(i + 1)});
        }
    }
    if (!has_hierarchy)
        throw ParseError("missing HIERARCHY section");
    if (motion_line == lines.size())
        throw ParseError("missing MOTION section");

    BvhDocument doc;
    HierarchyReader reader(std::move(tokens));
    reader.expect("ROOT");
    reader.joint(doc, std::string(reader.next().text), -1, 0);
    if (!reader.done())
        throw ParseError("content after the root joint", reader.peek().line);

    Index channel_count = 0;
    for (const auto& c : doc.channels)
        channel_count += static_cast<Index>(c.size());

    // MOTION header
    std::size_t i = motion_line + 1;
    auto next_nonblank = [&]() -> std::vector<std::string_view> {
        while (i < lines.size()) {
            auto words = split_whitespace(lines[i++]);
            if (!words.empty())
                return words;
        }
        throw ParseError("truncated MOTION header", static_cast<int>(i));
    };
    auto frames_words = next_nonblank();
    if (frames_words.size() != 2 || frames_words[0] != "Frames:")
        throw ParseError("expected 'Frames: <count>'", static_cast<int>(i));
    const double frames_d = parse_number(frames_words[1], static_cast<int>(i));
    if (frames_d < 0 || frames_d != std::floor(frames_d))
        throw ParseError("invalid frame count", static_cast<int>(i));
    const auto frames = static_cast<Index>(frames_d);

    auto time_words = next_nonblank();
    if (time_words.size() != 3 || time_words[0] != "Frame" || time_words[1] != "Time:")
        throw ParseError("expected 'Frame Time: <seconds>'", static_cast<int>(i));
    doc.frame_time = parse_number(time_words[2], static_cast<int>(i));
    if (!(doc.frame_time > 0.0))
        throw ParseError("frame time must be positive", static_cast<int>(i));

    doc.motion.resize(channel_count, frames);
    Index row = 0;
    for (; i < lines.size(); ++i) {
        const auto words = split_whitespace(lines[i]);
        if (words.empty())
            continue;
        const int line_no = static_cast<int>(i + 1);
        if (row >= frames)
            throw ParseError("more sample rows than the declared " + std::to_string(frames) + " frames", line_no);
        if (static_cast<Index>(words.size()) != channel_count)
            throw ParseError("sample row has " + std::to_string(words.size()) + " values, hierarchy declares " +
                                 std::to_string(channel_count) + " channels",
                             line_no);
        for (Index c = 0; c < channel_count; ++c)
            doc.motion(c, row) = parse_number(words[static_cast<std::size_t>(c)], line_no);
        ++row;
    }
    if (row != frames)
        throw ParseError("declared " + std::to_string(frames) + " frames but found " + std::to_string(row) +
                         " sample rows");
    return doc;
}

MotionData to_motion(const BvhDocument& doc, double scale) {
    const SkeletonTopology& topo = doc.topology;
    const Index nodes = topo.node_count();
    const Index frames = doc.frame_count();

    SkeletonTopology scaled;
    for (Index n = 0; n < nodes; ++n)
        scaled.add_node(topo.name(n), topo.parent(n), topo.offset(n) * scale);

    std::vector<AxisOrder> orders(static_cast<std::size_t>(nodes));
    for (Index n = 0; n < nodes; ++n) {
        std::string axes;
        for (BvhChannel c : doc.channels[static_cast<std::size_t>(n)])
            if (is_rotation(c))
                axes.push_back(static_cast<char>('X' + axis_of(c)));
        if (!axes.empty() && axes.size() != 3)
            throw ParseError("joint '" + topo.name(n) + "' declares " + std::to_string(axes.size()) +
                             " rotation channels; expected 3");
        if (axes.size() == 3)
            orders[static_cast<std::size_t>(n)] = AxisOrder::parse(axes);
    }

    const FixedRate rate{1.0 / doc.frame_time, 0.0};
    Eigen::MatrixXd positions(3 * nodes, frames);
    Eigen::MatrixXd rotations(4 * nodes, frames);

    std::vector<Eigen::Quaterniond> local(static_cast<std::size_t>(nodes));
    std::vector<Eigen::Vector3d> translation(static_cast<std::size_t>(nodes));
    for (Index f = 0; f < frames; ++f) {
        Index col = 0;
        for (Index n = 0; n < nodes; ++n) {
            const auto u = static_cast<std::size_t>(n);
            Eigen::Vector3d angles = Eigen::Vector3d::Zero();
            Eigen::Vector3d shift = Eigen::Vector3d::Zero();
            int rot_index = 0;
            for (BvhChannel c : doc.channels[u]) {
                const double v = doc.motion(col++, f);
                if (is_rotation(c))
                    angles[rot_index++] = v;
                else
                    shift[axis_of(c)] = v;
            }
            local[u] = rot_index == 3 ? euler_to_quaternion(angles, orders[u]) : Eigen::Quaterniond::Identity();
            translation[u] = (topo.offset(n) + shift) * scale;
        }
        const Eigen::Matrix3Xd p = forward_kinematics(scaled, local, translation[0], translation);
        positions.col(f) = Eigen::Map<const Eigen::VectorXd>(p.data(), 3 * nodes);
        rotations.col(f) = pack_rotations(local);
    }

    MotionData out;
    out.topology = std::move(scaled);
    out.pose.positions = Series(std::move(positions), rate);
    out.pose.rotations = Series(std::move(rotations), rate);
    out.pose.space = RotationSpace::Local;
    return out;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot write '" + path + "'");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out)
        throw Error("write to '" + path + "' failed");
}

MotionData load_bvh(const std::string& path, double scale) { return parse_bvh(read_text_file(path), scale); }

} // namespace moma
