#pragma once

#include "moma/features.hpp"
#include "moma/osc.hpp"
#include "moma/udp.hpp"

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace moma {

/// Settings of the streaming server, read from `key value` lines.
struct StreamConfig {
    std::string listen_host = "127.0.0.1";
    std::uint16_t listen_port = 9000;
    std::string emit_host = "127.0.0.1";
    std::uint16_t emit_port = 9001;
    /// Node count J of incoming frames; 0 takes it from the skeleton.
    Index nodes = 0;
    /// Ring capacity in frames; 0 sizes it from the enabled features.
    Index capacity = 0;
    std::vector<std::string> features;
    double frame_rate = 100.0;
    /// Emitted frames per second; 0 emits every frame.
    double emit_rate = 0.0;
    /// Bounded hand-off between receiver and processor, in frames.
    Index queue = 4096;
    /// BVH file supplying node names and hierarchy; optional.
    std::string skeleton;
    /// Segment table file; optional.
    std::string segments;
    Axis up = Axis::Z;
};

/// Parses a config; relative paths resolve against `base_dir`. Throws ParseError.
StreamConfig parse_stream_config(std::string_view text, const std::string& base_dir = "");

/// Topology from the config's skeleton, or J unnamed nodes n0..n{J-1} under a root.
SkeletonTopology stream_topology(const StreamConfig& config);

/// Builds the pipeline and checks the config against it; throws InvalidArgument.
FeaturePipeline make_stream_pipeline(const StreamConfig& config);

/// Smallest ring that still reproduces offline values for the pipeline.
Index required_capacity(const FeaturePipeline& pipeline);

/// Decodes a frame message into `ring` (one push_frame). Stamped rings take the message time.
DecodedFrame ingest_frame(const OscMessage& message, Series& ring, Index node_count);

/// One message per extractor at `/moma/out/<column>`; returns how many were sent.
Index emit_features(const FeaturePipeline& pipeline, double time, const std::vector<Eigen::VectorXd>& values,
                    const std::function<bool(const OscMessage&)>& sink);

/// Output messages of one frame's features.
std::vector<OscMessage> feature_messages(const FeaturePipeline& pipeline, double time,
                                         const std::vector<Eigen::VectorXd>& values);

/**
 * Ring-fed feature computation. Each pushed frame makes the frame `lookahead`
 * frames older computable; it is evaluated on the trailing part of the ring.
 * Nothing is emitted before five frames have arrived, then the backlog is flushed.
 */
class StreamProcessor {
public:
    StreamProcessor(FeaturePipeline pipeline, Index capacity, double frame_rate);

    struct Output {
        Index frame = 0; ///< absolute frame index since the first push
        double time = 0.0;
        std::vector<Eigen::VectorXd> values;
    };

    /// Pushes one frame of 3J positions; returns the newly computed frames, oldest first.
    std::vector<Output> push(double time, const Eigen::Ref<const Eigen::VectorXd>& positions);

    const FeaturePipeline& pipeline() const { return pipeline_; }
    /// Empty until the first frame arrives.
    const std::optional<Series>& ring() const { return ring_; }
    Index pushed() const { return pushed_; }

private:
    FeaturePipeline pipeline_;
    Index capacity_;
    double rate_;
    std::optional<Series> ring_;
    Index pushed_ = 0;
    Index next_ = 0;
};

/// Bounded FIFO; a push on a full queue drops the oldest entry.
template <typename T>
class BoundedQueue {
public:
    explicit BoundedQueue(std::size_t capacity) : capacity_(std::max<std::size_t>(1, capacity)) {}

    /// True when an entry was dropped to make room.
    bool push(T item) {
        bool dropped = false;
        {
            std::lock_guard lock(mutex_);
            if (items_.size() == capacity_) {
                items_.pop_front();
                dropped = true;
            }
            items_.push_back(std::move(item));
        }
        ready_.notify_one();
        return dropped;
    }

    template <typename Rep, typename Period>
    std::optional<T> pop(std::chrono::duration<Rep, Period> timeout) {
        std::unique_lock lock(mutex_);
        if (!ready_.wait_for(lock, timeout, [&] { return !items_.empty(); }))
            return std::nullopt;
        T item = std::move(items_.front());
        items_.pop_front();
        return item;
    }

    std::size_t size() const {
        std::lock_guard lock(mutex_);
        return items_.size();
    }

private:
    std::size_t capacity_;
    mutable std::mutex mutex_;
    std::condition_variable ready_;
    std::deque<T> items_;
};

struct StreamStats {
    std::atomic<std::int64_t> received{0};
    std::atomic<std::int64_t> processed{0};
    std::atomic<std::int64_t> dropped{0};
    std::atomic<std::int64_t> rejected{0};
    std::atomic<std::int64_t> send_failures{0};
};

/// Receiver thread (socket, decode, queue) plus processor (features, emit) until `stop` is set.
class StreamServer {
public:
    /// Binds the listen socket; throws Error when the port is unavailable.
    explicit StreamServer(const StreamConfig& config);

    std::uint16_t port() const { return socket_.local_port(); }
    const StreamStats& stats() const { return stats_; }
    const StreamConfig& config() const { return config_; }

    /// Blocks until `stop`; `on_stats` runs once per second on the processor thread.
    void run(const std::atomic<bool>& stop, const std::function<void(const StreamStats&)>& on_stats = {});

private:
    StreamConfig config_;
    Index nodes_;
    StreamProcessor processor_;
    UdpSocket socket_;
    UdpSocket sender_;
    StreamStats stats_;
};

} // namespace moma
