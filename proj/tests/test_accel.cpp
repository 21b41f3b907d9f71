#include "moma/accel.hpp"

#include <doctest.h>

#include <random>

using namespace moma;

namespace {

// Two joints, velocities and jerks set column by column.
AccelRig rig_of(const Eigen::MatrixXd& v, const Eigen::MatrixXd& j, AccelParams p = {}) {
    return AccelRig(v, j, 100.0, p);
}

Eigen::MatrixXd random_matrix(std::mt19937& rng, Index rows, Index cols) {
    std::normal_distribution<double> n;
    Eigen::MatrixXd m(rows, cols);
    for (Index i = 0; i < m.size(); ++i)
        m.data()[i] = n(rng);
    return m;
}

} // namespace

TEST_CASE("joint energy") {
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(6, 1);
    v.col(0) << 3, 4, 0, 0, 0, 0;
    const AccelRig r = rig_of(v, Eigen::MatrixXd::Zero(6, 1));
    CHECK(joint_energy(r, 0, 0) == 12.5);
    CHECK(joint_energy(r, 1, 0) == 0.0);
    CHECK_THROWS_AS(joint_energy(r, 2, 0), RangeError);
    CHECK_THROWS_AS(joint_energy(r, 0, 1), RangeError);

    AccelParams heavy;
    heavy.mass = 2.0;
    CHECK(joint_energy(rig_of(v, Eigen::MatrixXd::Zero(6, 1), heavy), 0, 0) == 25.0);
}

TEST_CASE("rig validation") {
    CHECK_THROWS_AS(AccelRig(Eigen::MatrixXd::Zero(3, 4), Eigen::MatrixXd::Zero(3, 4), 100.0), InvalidArgument);
    CHECK_THROWS_AS(AccelRig(Eigen::MatrixXd::Zero(6, 4), Eigen::MatrixXd::Zero(6, 3), 100.0), DimensionError);
    AccelParams bad;
    bad.threshold = 1.5;
    CHECK_THROWS_AS(AccelRig(Eigen::MatrixXd::Zero(6, 4), Eigen::MatrixXd::Zero(6, 4), 100.0, bad), InvalidArgument);
    CHECK(AccelRig(Eigen::MatrixXd::Zero(6, 4), Eigen::MatrixXd::Zero(6, 4), 100.0).lag() == 50);
    AccelParams lag;
    lag.lag = 7;
    CHECK(AccelRig(Eigen::MatrixXd::Zero(6, 4), Eigen::MatrixXd::Zero(6, 4), 100.0, lag).lag() == 7);
}

TEST_CASE("weighted energy index examples") {
    CHECK(weighted_energy_index(Eigen::Vector4d::Constant(2.0), 0.5) == doctest::Approx(2.5));
    CHECK(weighted_energy_index(Eigen::Vector4d::Zero(), 0.5) == 0.0);
    CHECK(weighted_energy_index(Eigen::VectorXd::Constant(1, 3.0), 0.5) == 3.0);
    // tie on the maximum: the lowest index is M, the other contributes fully
    CHECK(weighted_energy_index(Eigen::Vector2d(1.0, 1.0), 0.0) == doctest::Approx(2.0));
}

TEST_CASE("property: WEI bounds, oracle and scale consistency") {
    std::mt19937 rng(71);
    std::uniform_real_distribution<double> u(0.0, 10.0), thr(0.0, 1.0);
    for (int trial = 0; trial < 500; ++trial) {
        const Index n = 2 + trial % 5;
        Eigen::VectorXd j(n);
        for (Index i = 0; i < n; ++i)
            j[i] = u(rng);
        const double t = thr(rng);
        const double w = weighted_energy_index(j, t);
        const double m = j.maxCoeff();
        double expect = m;
        bool skipped = false;
        for (Index i = 0; i < n; ++i) {
            if (!skipped && j[i] == m) {
                skipped = true;
                continue;
            }
            expect += (j[i] / m) * (1 - t) / static_cast<double>(n - 1);
        }
        CHECK(w == doctest::Approx(expect).epsilon(1e-14));
        CHECK(w >= m);
        CHECK(w <= m + (1 - t) + 1e-12);

        const double s = 0.1 + u(rng);
        const double scaled = weighted_energy_index(Eigen::VectorXd(j * s * s), t);
        CHECK(scaled - s * s * m == doctest::Approx(w - m).epsilon(1e-9).scale(1e-9));
    }
}

TEST_CASE("fluidity index") {
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(6, 1);
    j.col(0) << 1, 2, 2, 0, 0, 0;
    const AccelRig r = rig_of(Eigen::MatrixXd::Zero(6, 1), j);
    CHECK(fluidity_index(r, 0, 0) == doctest::Approx(1.0 / 9.0));
    CHECK(fluidity_index(r, 1, 0) == doctest::Approx(1e9));
    CHECK(mean_fluidity_index(r, 0) == doctest::Approx((1.0 / 9.0 + 1e9) / 2));

    // constant acceleration has zero jerk: bounded maximum
    Eigen::MatrixXd pos(6, 20);
    for (Index i = 0; i < 20; ++i) {
        const double t = i / 100.0;
        pos.col(i) << 0.5 * t * t, 0, 0, t, 0, 0;
    }
    const std::vector<Index> joints{0, 1};
    const AccelRig c = AccelRig::from_positions(Series(pos, FixedRate{100.0, 0.0}), joints);
    for (Index f = 0; f < 20; ++f)
        CHECK(fluidity_index(c, 0, f) == doctest::Approx(1e9));

    std::mt19937 rng(72);
    const Eigen::MatrixXd jr = random_matrix(rng, 12, 30);
    const AccelRig rr = rig_of(random_matrix(rng, 12, 30), jr);
    for (Index f = 0; f < 30; ++f)
        for (Index k = 0; k < 4; ++k) {
            const double mag = std::sqrt(jr(3 * k, f) * jr(3 * k, f) + jr(3 * k + 1, f) * jr(3 * k + 1, f) +
                                         jr(3 * k + 2, f) * jr(3 * k + 2, f));
            CHECK(fluidity_index(rr, k, f) == doctest::Approx(1.0 / (mag * mag)).epsilon(1e-12));
            CHECK(fluidity_index(rr, k, f) > 0.0);
        }
}

TEST_CASE("impulsivity index") {
    AccelParams p;
    p.lag = 2;
    // steady motion: energies repeat, jerk (0, 3, 0) on joint 0
    Eigen::MatrixXd v(6, 5), j = Eigen::MatrixXd::Zero(6, 5);
    for (Index f = 0; f < 5; ++f) {
        v.col(f) << 1, 1, 0, 0, 2, 0;
        j(1, f) = 3.0;
    }
    const AccelRig steady = rig_of(v, j, p);
    CHECK(*impulsivity_index(steady, 0, 3) == doctest::Approx(9.0));
    CHECK_THROWS_AS(impulsivity_index(steady, 0, 1), RangeError);

    Eigen::MatrixXd start = v;
    start.leftCols(2).setZero();
    const AccelRig rest = rig_of(start, j, p);
    CHECK_FALSE(impulsivity_index(rest, 0, 2));
    CHECK(impulsivity_index(rest, 0, 4));

    const auto series = impulsivity_series(rest, {"a", "b"});
    CHECK(std::isnan(series.values(0, 0)));
    CHECK(std::isnan(series.values(0, 3)));
    CHECK(series.values(0, 4) == doctest::Approx(9.0));
    CHECK(series.column_names() == std::vector<std::string>{"impulsivity_a", "impulsivity_b"});

    std::mt19937 rng(73);
    p.lag = 5;
    const Eigen::MatrixXd vr = random_matrix(rng, 12, 30), jr = random_matrix(rng, 12, 30);
    const AccelRig rr = rig_of(vr, jr, p);
    for (Index f = 5; f < 30; ++f) {
        Eigen::Vector4d now, past;
        for (Index k = 0; k < 4; ++k) {
            now[k] = 0.5 * vr.col(f).segment<3>(3 * k).squaredNorm();
            past[k] = 0.5 * vr.col(f - 5).segment<3>(3 * k).squaredNorm();
        }
        for (Index k = 0; k < 4; ++k) {
            const double j2 = jr.col(f).segment<3>(3 * k).squaredNorm();
            const double expect = j2 * weighted_energy_index(now, 0.5) / weighted_energy_index(past, 0.5);
            const auto ii = impulsivity_index(rr, k, f);
            REQUIRE(ii);
            CHECK(*ii == doctest::Approx(expect).epsilon(1e-12));
            CHECK(*ii >= 0.0);
        }
    }
}

TEST_CASE("series outputs") {
    std::mt19937 rng(74);
    const AccelRig r = rig_of(random_matrix(rng, 6, 10), random_matrix(rng, 6, 10));
    const auto w = wei_series(r);
    CHECK(w.name == "wei");
    for (Index f = 0; f < 10; ++f)
        CHECK(w.values(0, f) == wei(r, f));
    const auto fl = fluidity_series(r);
    CHECK(fl.column_names() == std::vector<std::string>{"fluidity_0", "fluidity_1"});
    CHECK(fl.values(1, 3) == fluidity_index(r, 1, 3));
    CHECK_THROWS_AS(fluidity_series(r, {"only"}), DimensionError);
}
