#include "moma/timed_series.hpp"

#include <doctest.h>

#include <atomic>
#include <random>
#include <thread>

using namespace moma;

namespace {

Eigen::VectorXd v(double x) { return Eigen::VectorXd::Constant(2, x); }

} // namespace

TEST_CASE("ring keeps the newest frames in chronological order") {
    auto s = Series::ring(2, 4, FixedRate{100.0, 0.0});
    for (int i = 1; i <= 6; ++i)
        s.push_frame(v(i));
    REQUIRE(s.frames() == 4);
    for (Index i = 0; i < 4; ++i)
        CHECK(s(0, i) == static_cast<double>(i + 3));
    CHECK(s.time_of_index(0) == doctest::Approx(0.02));
    CHECK(s.evicted() == 2);
}

TEST_CASE("offline push appends") {
    Series s(2, FixedRate{100.0, 0.0});
    s.push_frame(v(7));
    CHECK(s.frames() == 1);
    CHECK(s.frame(0) == v(7));
}

TEST_CASE("push rejects bad columns and times") {
    Series stamped(1, Stamped{});
    stamped.push_frame(Eigen::VectorXd::Ones(1), 1.0);
    CHECK_THROWS_AS(stamped.push_frame(Eigen::VectorXd::Ones(1), 0.9), TimeOrderError);
    CHECK_THROWS_AS(stamped.push_frame(Eigen::VectorXd::Ones(1), 1.0), TimeOrderError);
    CHECK_THROWS_AS(stamped.push_frame(Eigen::VectorXd::Ones(1)), TimeOrderError);
    CHECK_THROWS_AS(stamped.push_frame(Eigen::VectorXd::Ones(3), 2.0), DimensionError);
    CHECK_THROWS_AS(Series(Eigen::MatrixXd::Zero(1, 3), Stamped{{0.0, 0.2, 0.1}}), TimeOrderError);
    CHECK_THROWS_AS(Series(1, FixedRate{0.0, 0.0}), InvalidArgument);
}

TEST_CASE("time of index") {
    Series fixed(Eigen::MatrixXd::Zero(1, 100), FixedRate{100.0, 0.0});
    CHECK(fixed.time_of_index(27) == doctest::Approx(0.27));
    CHECK_THROWS_AS(fixed.time_of_index(100), RangeError);

    Series stamped(Eigen::MatrixXd::Zero(1, 3), Stamped{{0.0, 0.1, 0.25}});
    CHECK(stamped.time_of_index(2) == 0.25);
}

TEST_CASE("index at time picks the nearest frame, earlier on ties") {
    Series stamped(Eigen::MatrixXd::Zero(1, 3), Stamped{{0.0, 0.1, 0.25}});
    CHECK(stamped.index_at_time(0.2) == 2);
    CHECK(stamped.index_at_time(-5.0) == 0);
    CHECK(stamped.index_at_time(9.0) == 2);

    Series fixed(Eigen::MatrixXd::Zero(1, 100), FixedRate{100.0, 0.0});
    CHECK(fixed.index_at_time(0.275) == 27);
    CHECK(fixed.index_at_time(0.2751) == 28);
    CHECK(fixed.index_at_time(0.2749) == 27);

    Series empty(1, FixedRate{100.0, 0.0});
    CHECK_THROWS_AS(empty.index_at_time(0.0), RangeError);
}

TEST_CASE("window is inclusive and may be empty") {
    Series fixed(Eigen::RowVectorXd::LinSpaced(100, 0, 99), FixedRate{100.0, 0.0});
    const Series w = fixed.window(0.10, 0.20);
    REQUIRE(w.frames() == 11);
    CHECK(w(0, 0) == 10.0);
    CHECK(w(0, 10) == 20.0);
    CHECK(w.time_of_index(0) == doctest::Approx(0.10));
    CHECK(fixed.window(5.0, 6.0).frames() == 0);
    CHECK_THROWS_AS(fixed.window(0.2, 0.1), InvalidArgument);
}

TEST_CASE("to_offline of offline and empty series") {
    Series fixed(Eigen::MatrixXd::Random(3, 5), FixedRate{50.0, 1.0});
    const Series copy = fixed.to_offline();
    CHECK(copy.matrix() == fixed.matrix());
    CHECK(copy.time_of_index(4) == fixed.time_of_index(4));
    auto ring = Series::ring(3, 4, FixedRate{50.0, 0.0});
    CHECK(ring.to_offline().frames() == 0);
    CHECK_FALSE(ring.to_offline().is_ring());
}

TEST_CASE("property: ring equals the tail of an offline shadow copy") {
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> cap_dist(1, 9), push_dist(0, 40);
    std::uniform_real_distribution<double> dt(0.001, 0.2), val(-1.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const bool stamped = trial % 2 == 1;
        const Index cap = cap_dist(rng);
        const TimeModel tm = stamped ? TimeModel{Stamped{}} : TimeModel{FixedRate{30.0, 0.5}};
        auto ring = Series::ring(3, cap, tm);
        Series shadow(3, tm);
        double t = 0.0;
        const int pushes = push_dist(rng);
        for (int p = 0; p < pushes; ++p) {
            Eigen::Vector3d col(val(rng), val(rng), val(rng));
            t += dt(rng);
            ring.push_frame(col, stamped ? std::optional<double>(t) : std::nullopt);
            shadow.push_frame(col, stamped ? std::optional<double>(t) : std::nullopt);
        }
        const Index n = std::min<Index>(cap, pushes);
        REQUIRE(ring.frames() == n);
        const Series tail = shadow.slice(shadow.frames() - n, n);
        const Series flat = ring.to_offline();
        CHECK(flat.matrix() == tail.matrix());
        for (Index i = 0; i < n; ++i) {
            CHECK(ring.time_of_index(i) == shadow.time_of_index(shadow.frames() - n + i));
            CHECK(ring.time_of_index(i) == doctest::Approx(tail.time_of_index(i)).epsilon(1e-12));
            CHECK(ring.index_at_time(ring.time_of_index(i)) == i);
            if (i > 0)
                CHECK(ring.time_of_index(i) > ring.time_of_index(i - 1));
        }
        if (n > 2) {
            const double t0 = ring.time_of_index(1), t1 = ring.time_of_index(n - 1);
            CHECK(ring.window(t0, t1).matrix() == shadow.window(t0, t1).matrix());
        }
    }
}

TEST_CASE("shared ring snapshots are whole frames") {
    SharedRing<double> ring(64, 16, FixedRate{1000.0, 0.0});
    std::atomic<bool> done{false};
    std::thread writer([&] {
        for (int i = 0; i < 5000; ++i)
            ring.push_frame(Eigen::VectorXd::Constant(64, i));
        done = true;
    });
    bool consistent = true;
    while (!done) {
        const Series snap = ring.snapshot();
        for (Index f = 0; f < snap.frames(); ++f)
            consistent &= (snap.frame(f).array() == snap(0, f)).all();
    }
    writer.join();
    CHECK(consistent);
    CHECK(ring.total_pushed() == 5000);
    CHECK(ring.snapshot_tail(4).frames() == 4);
}
