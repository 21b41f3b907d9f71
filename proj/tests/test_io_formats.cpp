#include "moma/bvh.hpp"
#include "moma/feature_series.hpp"
#include "moma/labels.hpp"

#include "synthetic.hpp"

#include <doctest.h>

#include <random>

using namespace moma;

namespace {

const char* kTwoJoint = R"(HIERARCHY
ROOT Hips
{
  OFFSET 0 0 1
  CHANNELS 6 Xposition Yposition Zposition Zrotation Xrotation Yrotation
  JOINT Knee
  {
    OFFSET 0 0 -0.5
    CHANNELS 3 Zrotation Xrotation Yrotation
    End Site
    {
      OFFSET 0 0.2 -0.4
    }
  }
}
MOTION
Frames: 2
Frame Time: 0.01
0 0 0 0 0 0 0 0 0
0.5 0 0 0 0 0 0 90 0
)";

int parse_error_line(const std::string& text) {
    try {
        parse_bvh(text);
    } catch (const ParseError& e) {
        return e.line();
    }
    return -1;
}

} // namespace

TEST_CASE("minimal BVH") {
    const MotionData m = parse_bvh(kTwoJoint);
    CHECK(m.topology.node_count() == 3);
    CHECK(m.topology.name(2) == "Knee_end");
    CHECK(m.pose.positions.frame_rate() == doctest::Approx(100.0));
    CHECK(m.pose.positions.frames() == 2);

    // zero rotation: offset chain
    const Eigen::Matrix3Xd p0 = frame_positions(m.pose.positions.frame(0));
    CHECK((p0.col(0) - Eigen::Vector3d(0, 0, 1)).norm() < 1e-12);
    CHECK((p0.col(1) - Eigen::Vector3d(0, 0, 0.5)).norm() < 1e-12);
    CHECK((p0.col(2) - Eigen::Vector3d(0, 0.2, 0.1)).norm() < 1e-12);

    // root shifted by x=0.5, knee rotated 90 degrees about X
    const Eigen::Matrix3Xd p1 = frame_positions(m.pose.positions.frame(1));
    CHECK((p1.col(0) - Eigen::Vector3d(0.5, 0, 1)).norm() < 1e-12);
    CHECK((p1.col(2) - Eigen::Vector3d(0.5, 0.4, 0.7)).norm() < 1e-12);
    CHECK(m.pose.rotations.dims() == 12);
}

TEST_CASE("BVH errors") {
    const std::string base = kTwoJoint;
    CHECK_THROWS_AS(parse_bvh(base.substr(base.find("ROOT"))), ParseError);
    CHECK_THROWS_AS(parse_bvh(base.substr(0, base.find("MOTION"))), ParseError);

    std::string short_rows = base;
    short_rows.replace(short_rows.find("Frames: 2"), 9, "Frames: 3");
    CHECK_THROWS_AS(parse_bvh(short_rows), ParseError);

    std::string extra_rows = base + "0 0 0 0 0 0 0 0 0\n";
    CHECK_THROWS_AS(parse_bvh(extra_rows), ParseError);

    std::string narrow = base;
    narrow.replace(narrow.rfind("0.5 0 0"), 7, "0.5 0");
    CHECK(parse_error_line(narrow) == 20);

    std::string text = base;
    text.replace(text.rfind("90"), 2, "ninety");
    CHECK(parse_error_line(text) == 20);

    std::string channels = base;
    channels.replace(channels.find("CHANNELS 3 Zrotation Xrotation Yrotation"), 40, "CHANNELS 2 Zrotation Xrotation");
    std::string rows = channels;
    rows.replace(rows.find("0 0 0 0 0 0 0 0 0"), 17, "0 0 0 0 0 0 0 0");
    rows.replace(rows.find("0.5 0 0 0 0 0 0 90 0"), 20, "0.5 0 0 0 0 0 0 90");
    CHECK_THROWS_AS(parse_bvh(rows), ParseError);
}

TEST_CASE("BVH re-serialization keeps positions") {
    testing::WalkParams w;
    w.frames = 120;
    w.noise_deg = 3.0;
    const BvhDocument doc = testing::humanoid_document(w);
    const std::string text = testing::write_bvh_document(doc);
    const BvhDocument again = parse_bvh_document(text);
    CHECK(again.topology == doc.topology);
    CHECK(again.motion == doc.motion);
    CHECK(testing::write_bvh_document(again) == text);

    const MotionData a = to_motion(doc), b = to_motion(again);
    CHECK((a.pose.positions.matrix() - b.pose.positions.matrix()).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("labels") {
    const auto one = read_labels("0.5 1.25 laugh\n");
    REQUIRE(one.size() == 1);
    CHECK(one[0] == Label{0.5, 1.25, "laugh"});

    const std::string canonical = "0.1 0.2 a\n0.5 1.25 laugh\n3 4.125 b\n";
    CHECK(write_labels(read_labels(canonical)) == canonical);
    const auto sorted = read_labels("3 4 b\n\n0 1 a\n");
    CHECK(sorted[0].name == "a");

    CHECK_THROWS_AS(read_labels("2.0 1.0 x\n"), ParseError);
    CHECK_THROWS_AS(read_labels("1.0 x\n"), ParseError);
    CHECK_THROWS_AS(read_labels("a b c\n"), ParseError);
    CHECK_THROWS_AS(read_labels("-1 2 c\n"), ParseError);
    CHECK_THROWS(write_labels({{0, 1, "two words"}}));
}

TEST_CASE("property: label round-trip") {
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<Label> labels;
        for (int i = 0; i < 5; ++i) {
            const double a = u(rng), b = a + u(rng);
            labels.push_back({a, b, "l" + std::to_string(i)});
        }
        std::stable_sort(labels.begin(), labels.end(), [](const Label& x, const Label& y) { return x.start < y.start; });
        CHECK(read_labels(write_labels(labels)) == labels);
    }
}

TEST_CASE("feature CSV") {
    Eigen::MatrixXd one(1, 2);
    one << 1.5, -2.0;
    const FeatureSeries s{"energy", {}, Series(one, FixedRate{100.0, 0.0})};
    const std::string csv = export_feature_csv({s});
    CHECK(csv == "time,energy\n0,1.5\n0.01,-2\n");

    const FeatureSeries longer{"x", {}, Series(Eigen::MatrixXd::Zero(1, 3), FixedRate{100.0, 0.0})};
    CHECK_THROWS_AS(export_feature_csv({s, longer}), DimensionError);
    const FeatureSeries shifted{"y", {}, Series(one, FixedRate{100.0, 1.0})};
    CHECK_THROWS_AS(export_feature_csv({s, shifted}), TimeOrderError);
}

TEST_CASE("property: CSV round-trip is exact") {
    std::mt19937 rng(4);
    std::normal_distribution<double> n(0.0, 1e3);
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::MatrixXd a(3, 17), b(1, 17);
        for (Index i = 0; i < a.size(); ++i)
            a.data()[i] = n(rng);
        for (Index i = 0; i < b.size(); ++i)
            b.data()[i] = n(rng) * 1e-12;
        b(0, 3) = std::numeric_limits<double>::quiet_NaN();
        const TimeModel tm = FixedRate{120.0, 0.25};
        const std::vector<FeatureSeries> series{{"com", {"x", "y", "z"}, Series(a, tm)}, {"e", {}, Series(b, tm)}};
        const CsvTable t = parse_feature_csv(export_feature_csv(series));
        CHECK(t.columns == std::vector<std::string>{"com_x", "com_y", "com_z", "e"});
        CHECK(t.values.topRows(3) == a);
        for (Index i = 0; i < 17; ++i) {
            CHECK(t.times[static_cast<std::size_t>(i)] == series[0].values.time_of_index(i));
            if (i == 3)
                CHECK(std::isnan(t.values(3, i)));
            else
                CHECK(t.values(3, i) == b(0, i));
        }
    }
}
