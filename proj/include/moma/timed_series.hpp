#pragma once

#include "moma/error.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace moma {

using Index = Eigen::Index;

/// Frames sampled at a constant rate; frame i sits at start_time + i / frame_rate.
struct FixedRate {
    double frame_rate = 1.0;
    double start_time = 0.0;
};

/// Frames carrying their own strictly increasing time stamps (seconds).
struct Stamped {
    std::vector<double> timestamps;
};

using TimeModel = std::variant<FixedRate, Stamped>;

enum class BufferMode { Offline, Ring };

/**
 * A dims x frames matrix of samples plus a time model.
 *
 * Offline series grow on every push. Ring series keep the last `capacity`
 * frames and evict the oldest one when full. Every accessor works on the
 * logical, chronological frame index whatever the mode, so feature code never
 * needs to know how the data is buffered.
 */
template <typename Scalar = double>
class TimedSeries {
public:
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    TimedSeries() : TimedSeries(0, FixedRate{}) {}

    /// Empty offline series.
    TimedSeries(Index dims, TimeModel time) : dims_(dims) {
        if (dims < 0)
            throw InvalidArgument("negative dimension count");
        init_time(time, 0);
        if (stamped_ && !stamps_.empty())
            throw InvalidArgument("an empty series cannot carry time stamps");
    }

    /// Offline series over existing data; a stamped model must hold one stamp per column.
    TimedSeries(Matrix values, TimeModel time) : dims_(values.rows()) {
        init_time(time, values.cols());
        frames_ = values.cols();
        storage_ = std::move(values);
    }

    static TimedSeries ring(Index dims, Index capacity, TimeModel time) {
        if (capacity < 1)
            throw InvalidArgument("ring capacity must be at least 1");
        TimedSeries s(dims, std::move(time));
        s.mode_ = BufferMode::Ring;
        s.storage_.resize(dims, capacity);
        if (s.stamped_)
            s.stamps_.assign(static_cast<std::size_t>(capacity), 0.0);
        return s;
    }

    Index dims() const noexcept { return dims_; }
    Index frames() const noexcept { return frames_; }
    bool empty() const noexcept { return frames_ == 0; }
    BufferMode mode() const noexcept { return mode_; }
    bool is_ring() const noexcept { return mode_ == BufferMode::Ring; }
    Index capacity() const noexcept { return is_ring() ? storage_.cols() : frames_; }
    bool fixed_rate() const noexcept { return !stamped_; }

    /// Frames pushed out of a ring since it was created.
    Index evicted() const noexcept { return evicted_; }

    double frame_rate() const {
        if (stamped_)
            throw InvalidArgument("series has no fixed frame rate");
        return rate_;
    }

    /// Time model describing exactly the frames currently held.
    TimeModel time_model() const {
        if (!stamped_)
            return FixedRate{rate_, frames_ > 0 ? time_of_index(0) : origin_ + evicted_ / rate_};
        Stamped st;
        st.timestamps.reserve(static_cast<std::size_t>(frames_));
        for (Index i = 0; i < frames_; ++i)
            st.timestamps.push_back(stamps_[phys(i)]);
        return st;
    }

    void push_frame(const Eigen::Ref<const Vector>& column, std::optional<double> t = std::nullopt) {
        if (column.size() != dims_)
            throw DimensionError("frame has " + std::to_string(column.size()) + " values, series expects " +
                                 std::to_string(dims_));
        if (stamped_) {
            if (!t)
                throw TimeOrderError("stamped series requires a time stamp per frame");
            if (frames_ > 0 && !(*t > stamps_[phys(frames_ - 1)]))
                throw TimeOrderError("non-monotone time stamp " + std::to_string(*t));
        }

        Index slot;
        if (is_ring()) {
            const Index cap = storage_.cols();
            if (frames_ == cap) {
                slot = head_;
                head_ = (head_ + 1) % cap;
                ++evicted_;
            } else {
                slot = (head_ + frames_) % cap;
                ++frames_;
            }
        } else {
            if (frames_ == storage_.cols())
                storage_.conservativeResize(dims_, std::max<Index>(16, 2 * storage_.cols()));
            slot = frames_++;
            if (stamped_)
                stamps_.resize(static_cast<std::size_t>(frames_));
        }
        storage_.col(slot) = column;
        if (stamped_)
            stamps_[static_cast<std::size_t>(slot)] = *t;
    }

    double time_of_index(Index i) const {
        check_index(i);
        if (stamped_)
            return stamps_[phys(i)];
        return origin_ + static_cast<double>(evicted_ + i) / rate_;
    }

    /// Nearest frame to `t`; exact midpoints resolve to the earlier frame.
    Index index_at_time(double t) const {
        if (frames_ == 0)
            throw RangeError("time query on an empty series");
        Index lo = 0, hi = frames_;
        while (lo < hi) {
            const Index mid = lo + (hi - lo) / 2;
            if (time_of_index(mid) < t)
                lo = mid + 1;
            else
                hi = mid;
        }
        if (lo == 0)
            return 0;
        if (lo == frames_)
            return frames_ - 1;
        const double before = time_of_index(lo - 1);
        const double after = time_of_index(lo);
        const double d_before = t - before;
        const double d_after = after - t;
        // midpoints computed in floating point may land an ulp off; treat as a tie
        if (d_before <= d_after + 1e-9 * (after - before))
            return lo - 1;
        return lo;
    }

    /// Offline copy of the frames with time in [t0, t1].
    TimedSeries window(double t0, double t1) const {
        if (t0 > t1)
            throw InvalidArgument("window start after window end");
        const double tol = stamped_ ? 0.0 : 1e-9 / rate_;
        Index first = 0;
        while (first < frames_ && time_of_index(first) < t0 - tol)
            ++first;
        Index last = first;
        while (last < frames_ && time_of_index(last) <= t1 + tol)
            ++last;
        if (first == last) {
            if (stamped_)
                return TimedSeries(dims_, Stamped{});
            return TimedSeries(dims_, FixedRate{rate_, t0});
        }
        return slice(first, last - first);
    }

    /// Offline copy of `count` chronological frames starting at `first`.
    TimedSeries slice(Index first, Index count) const {
        if (first < 0 || count < 0 || first + count > frames_)
            throw RangeError("slice [" + std::to_string(first) + ", +" + std::to_string(count) +
                             ") outside " + std::to_string(frames_) + " frames");
        Matrix m(dims_, count);
        for (Index i = 0; i < count; ++i)
            m.col(i) = storage_.col(static_cast<Index>(phys(first + i)));
        if (stamped_) {
            Stamped st;
            for (Index i = 0; i < count; ++i)
                st.timestamps.push_back(stamps_[phys(first + i)]);
            return TimedSeries(std::move(m), std::move(st));
        }
        const double start = count > 0 ? time_of_index(first) : origin_ + (evicted_ + first) / rate_;
        return TimedSeries(std::move(m), FixedRate{rate_, start});
    }

    TimedSeries to_offline() const { return slice(0, frames_); }

    /// Chronological copy of all values (dims x frames).
    Matrix matrix() const {
        if (!is_ring())
            return storage_.leftCols(frames_);
        return to_offline().storage_;
    }

    /// Offline data without copying; rings must be materialized first.
    auto values() const {
        if (is_ring())
            throw InvalidArgument("values() requires an offline series; call to_offline()");
        return storage_.leftCols(frames_);
    }

    auto frame(Index i) const {
        check_index(i);
        return storage_.col(static_cast<Index>(phys(i)));
    }

    Scalar operator()(Index row, Index i) const {
        check_index(i);
        return storage_(row, static_cast<Index>(phys(i)));
    }

private:
    void init_time(const TimeModel& time, Index cols) {
        if (const auto* fr = std::get_if<FixedRate>(&time)) {
            if (!(fr->frame_rate > 0.0) || !std::isfinite(fr->frame_rate))
                throw InvalidArgument("frame rate must be positive");
            rate_ = fr->frame_rate;
            origin_ = fr->start_time;
            stamped_ = false;
            return;
        }
        const auto& ts = std::get<Stamped>(time).timestamps;
        if (static_cast<Index>(ts.size()) != cols)
            throw DimensionError("expected " + std::to_string(cols) + " time stamps, got " +
                                 std::to_string(ts.size()));
        for (std::size_t i = 1; i < ts.size(); ++i)
            if (!(ts[i] > ts[i - 1]))
                throw TimeOrderError("time stamps must be strictly increasing");
        stamps_ = ts;
        stamped_ = true;
    }

    void check_index(Index i) const {
        if (i < 0 || i >= frames_)
            throw RangeError("frame index " + std::to_string(i) + " outside " + std::to_string(frames_) +
                             " frames");
    }

    std::size_t phys(Index i) const {
        if (!is_ring())
            return static_cast<std::size_t>(i);
        return static_cast<std::size_t>((head_ + i) % storage_.cols());
    }

    Index dims_ = 0;
    Matrix storage_;
    std::vector<double> stamps_;
    bool stamped_ = false;
    double rate_ = 1.0;
    double origin_ = 0.0;
    BufferMode mode_ = BufferMode::Offline;
    Index frames_ = 0;
    Index head_ = 0;
    Index evicted_ = 0;
};

using Series = TimedSeries<double>;

/// A ring series guarded for one writer and any number of snapshot readers.
template <typename Scalar = double>
class SharedRing {
public:
    SharedRing(Index dims, Index capacity, TimeModel time)
        : series_(TimedSeries<Scalar>::ring(dims, capacity, std::move(time))) {}

    void push_frame(const Eigen::Ref<const typename TimedSeries<Scalar>::Vector>& column,
                    std::optional<double> t = std::nullopt) {
        std::unique_lock lock(mutex_);
        series_.push_frame(column, t);
    }

    TimedSeries<Scalar> snapshot() const {
        std::shared_lock lock(mutex_);
        return series_.to_offline();
    }

    /// Offline copy of the newest `count` frames (fewer if not yet filled).
    TimedSeries<Scalar> snapshot_tail(Index count) const {
        std::shared_lock lock(mutex_);
        const Index n = std::min(count, series_.frames());
        return series_.slice(series_.frames() - n, n);
    }

    Index frames() const {
        std::shared_lock lock(mutex_);
        return series_.frames();
    }

    Index total_pushed() const {
        std::shared_lock lock(mutex_);
        return series_.frames() + series_.evicted();
    }

private:
    mutable std::shared_mutex mutex_;
    TimedSeries<Scalar> series_;
};

} // namespace moma
