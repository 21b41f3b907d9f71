#include "moma/stream.hpp"

#include "moma/bvh.hpp"
#include "moma/text.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <thread>

namespace moma {

namespace {

std::uint16_t parse_port(std::string_view v, int line) {
    const double p = parse_number(v, line);
    if (p < 0 || p > 65535 || p != std::floor(p))
        throw ParseError("port must be an integer in [0, 65535]", line);
    return static_cast<std::uint16_t>(p);
}

Index parse_count(std::string_view v, int line) {
    const double n = parse_number(v, line);
    if (n < 0 || n != std::floor(n))
        throw ParseError("expected a non-negative integer", line);
    return static_cast<Index>(n);
}

std::string resolve_path(std::string_view p, const std::string& base) {
    std::filesystem::path path{std::string(p)};
    if (path.is_relative() && !base.empty())
        path = std::filesystem::path(base) / path;
    return path.string();
}

} // namespace

StreamConfig parse_stream_config(std::string_view text, const std::string& base_dir) {
    StreamConfig c;
    int line_no = 0;
    for (auto line : split_lines(text)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        const auto w = split_whitespace(line);
        if (w.empty())
            continue;
        const auto key = w[0];
        if (w.size() < 2)
            throw ParseError("key '" + std::string(key) + "' has no value", line_no);
        if (key == "features") {
            for (std::size_t i = 1; i < w.size(); ++i)
                for (auto& f : split_feature_list(std::string(w[i])))
                    c.features.push_back(std::move(f));
            continue;
        }
        if (w.size() != 2)
            throw ParseError("key '" + std::string(key) + "' takes one value", line_no);
        const auto v = w[1];
        if (key == "listen_host")
            c.listen_host = v;
        else if (key == "listen_port")
            c.listen_port = parse_port(v, line_no);
        else if (key == "emit_host")
            c.emit_host = v;
        else if (key == "emit_port")
            c.emit_port = parse_port(v, line_no);
        else if (key == "nodes")
            c.nodes = parse_count(v, line_no);
        else if (key == "capacity")
            c.capacity = parse_count(v, line_no);
        else if (key == "queue")
            c.queue = parse_count(v, line_no);
        else if (key == "frame_rate")
            c.frame_rate = parse_number(v, line_no);
        else if (key == "emit_rate")
            c.emit_rate = parse_number(v, line_no);
        else if (key == "skeleton")
            c.skeleton = resolve_path(v, base_dir);
        else if (key == "segments")
            c.segments = resolve_path(v, base_dir);
        else if (key == "up") {
            if (v == "X")
                c.up = Axis::X;
            else if (v == "Y")
                c.up = Axis::Y;
            else if (v == "Z")
                c.up = Axis::Z;
            else
                throw ParseError("up must be X, Y or Z", line_no);
        } else
            throw ParseError("unknown key '" + std::string(key) + "'", line_no);
    }
    if (!(c.frame_rate > 0.0))
        throw ParseError("frame_rate must be positive");
    if (c.emit_rate < 0.0)
        throw ParseError("emit_rate must be non-negative");
    if (c.queue < 1)
        throw ParseError("queue must hold at least one frame");
    return c;
}

SkeletonTopology stream_topology(const StreamConfig& config) {
    if (!config.skeleton.empty()) {
        SkeletonTopology topo = load_bvh(config.skeleton).topology;
        if (config.nodes != 0 && config.nodes != topo.node_count())
            throw InvalidArgument("config declares " + std::to_string(config.nodes) + " nodes, skeleton has " +
                                  std::to_string(topo.node_count()));
        return topo;
    }
    if (config.nodes < 1)
        throw InvalidArgument("config needs 'nodes' or 'skeleton'");
    SkeletonTopology topo;
    for (Index i = 0; i < config.nodes; ++i)
        topo.add_node("n" + std::to_string(i), i == 0 ? -1 : 0, Eigen::Vector3d::Zero());
    return topo;
}

namespace {

// Frames before the oldest one a feature reads; the jerk stencil copies two frames at each edge.
constexpr Index kStencilMargin = 4;
// Shortest window the third difference accepts; earlier frames wait for it.
constexpr Index kWarmup = 5;

} // namespace

Index required_capacity(const FeaturePipeline& pipeline) {
    // the margin keeps the jerk stencil clear of the window's first frame
    return pipeline.lookback() + pipeline.lookahead() + kStencilMargin + 1;
}

FeaturePipeline make_stream_pipeline(const StreamConfig& config) {
    if (config.features.empty())
        throw InvalidArgument("stream config enables no features");
    const SkeletonTopology topo = stream_topology(config);
    std::optional<std::string> segments;
    if (!config.segments.empty())
        segments = read_text_file(config.segments);
    FeaturePipeline pipeline(make_resources(topo, config.up, segments), config.features, config.frame_rate);
    if (pipeline.needs_rotations())
        throw InvalidArgument("frame messages carry no rotations; postural_load cannot stream");
    if (config.capacity != 0 && config.capacity < required_capacity(pipeline))
        throw InvalidArgument("ring capacity " + std::to_string(config.capacity) +
                              " is below the enabled features' window of " +
                              std::to_string(required_capacity(pipeline)) + " frames");
    return pipeline;
}

DecodedFrame ingest_frame(const OscMessage& message, Series& ring, Index node_count) {
    if (ring.dims() != 3 * node_count)
        throw DimensionError("ring holds " + std::to_string(ring.dims()) + " values per frame, expected " +
                             std::to_string(3 * node_count));
    DecodedFrame f = parse_frame_message(message, node_count);
    if (ring.fixed_rate())
        ring.push_frame(f.positions);
    else
        ring.push_frame(f.positions, f.time);
    return f;
}

std::vector<OscMessage> feature_messages(const FeaturePipeline& pipeline, double time,
                                         const std::vector<Eigen::VectorXd>& values) {
    const auto& ex = pipeline.extractors();
    if (values.size() != ex.size())
        throw DimensionError("one value vector per extractor expected");
    std::vector<OscMessage> out;
    for (std::size_t k = 0; k < ex.size(); ++k)
        out.push_back(feature_message(ex[k]->name(), time, values[k]));
    return out;
}

Index emit_features(const FeaturePipeline& pipeline, double time, const std::vector<Eigen::VectorXd>& values,
                    const std::function<bool(const OscMessage&)>& sink) {
    Index sent = 0;
    for (const auto& m : feature_messages(pipeline, time, values))
        if (sink(m))
            ++sent;
    return sent;
}

StreamProcessor::StreamProcessor(FeaturePipeline pipeline, Index capacity, double frame_rate)
    : pipeline_(std::move(pipeline)), capacity_(capacity), rate_(frame_rate) {
    if (capacity_ == 0)
        capacity_ = required_capacity(pipeline_);
    if (capacity_ < required_capacity(pipeline_))
        throw InvalidArgument("ring capacity below the enabled features' window");
    pipeline_.reset();
}

std::vector<StreamProcessor::Output> StreamProcessor::push(double time,
                                                           const Eigen::Ref<const Eigen::VectorXd>& positions) {
    if (!ring_)
        ring_ = Series::ring(positions.size(), capacity_, FixedRate{rate_, time});
    ring_->push_frame(positions);
    ++pushed_;

    std::vector<Output> done;
    if (pushed_ < kWarmup)
        return done;
    const Index last = pushed_ - 1 - pipeline_.lookahead();
    const Index first_abs = pushed_ - ring_->frames();
    for (; next_ <= last; ++next_) {
        const Index start = std::max<Index>(0, next_ - pipeline_.lookback() - kStencilMargin);
        const Series window = ring_->slice(start - first_abs, pushed_ - start);
        FeatureContext ctx(pipeline_.resources(), window);
        Output out;
        out.frame = next_;
        out.time = ring_->time_of_index(next_ - first_abs);
        pipeline_.evaluate(ctx, next_ - start, out.values);
        done.push_back(std::move(out));
    }
    return done;
}

namespace {

StreamProcessor make_processor(const StreamConfig& config) {
    FeaturePipeline pipeline = make_stream_pipeline(config);
    return StreamProcessor(std::move(pipeline), config.capacity, config.frame_rate);
}

} // namespace

StreamServer::StreamServer(const StreamConfig& config)
    : config_(config), nodes_(0), processor_(make_processor(config)),
      socket_(UdpSocket::bind(config.listen_port, config.listen_host)) {
    nodes_ = processor_.pipeline().resources().topology.node_count();
    socket_.set_receive_buffer(8 << 20);
}

void StreamServer::run(const std::atomic<bool>& stop, const std::function<void(const StreamStats&)>& on_stats) {
    using namespace std::chrono;
    BoundedQueue<DecodedFrame> queue(static_cast<std::size_t>(config_.queue));

    std::thread receiver([&] {
        while (!stop.load()) {
            auto packet = socket_.receive(milliseconds(50));
            if (!packet)
                continue;
            try {
                auto frame = parse_frame_message(decode(*packet), nodes_);
                ++stats_.received;
                if (queue.push(std::move(frame)))
                    ++stats_.dropped;
            } catch (const Error&) {
                ++stats_.rejected;
            }
        }
    });

    const Index stride = config_.emit_rate > 0.0
                             ? std::max<Index>(1, static_cast<Index>(std::llround(config_.frame_rate / config_.emit_rate)))
                             : 1;
    auto send = [&](const OscMessage& m) {
        const bool ok = sender_.send_to(config_.emit_host, config_.emit_port, encode(m));
        if (!ok)
            ++stats_.send_failures;
        return ok;
    };
    auto next_stats = steady_clock::now() + seconds(1);
    double last_time = -std::numeric_limits<double>::infinity();

    while (!stop.load()) {
        if (auto frame = queue.pop(milliseconds(20))) {
            try {
                if (!(frame->time > last_time))
                    throw TimeOrderError("non-monotone frame time");
                last_time = frame->time;
                for (const auto& out : processor_.push(frame->time, frame->positions))
                    if (out.frame % stride == 0)
                        emit_features(processor_.pipeline(), out.time, out.values, send);
                ++stats_.processed;
            } catch (const Error&) {
                ++stats_.rejected;
            }
        }
        if (steady_clock::now() >= next_stats) {
            next_stats += seconds(1);
            send(stats_message(stats_.dropped.load(), stats_.processed.load()));
            if (on_stats)
                on_stats(stats_);
        }
    }
    receiver.join();
}

} // namespace moma
