#include "moma/skeleton.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace moma;

namespace {

// Rotation matrix about one axis, built from sines and cosines directly.
Eigen::Matrix3d axis_matrix(Axis a, double degrees) {
    const double r = degrees * M_PI / 180.0, c = std::cos(r), s = std::sin(r);
    Eigen::Matrix3d m;
    switch (a) {
    case Axis::X: m << 1, 0, 0, 0, c, -s, 0, s, c; break;
    case Axis::Y: m << c, 0, s, 0, 1, 0, -s, 0, c; break;
    case Axis::Z: m << c, -s, 0, s, c, 0, 0, 0, 1; break;
    }
    return m;
}

Eigen::Matrix3d chain(const Eigen::Vector3d& deg, const AxisOrder& o) {
    return axis_matrix(o.axes[0], deg[0]) * axis_matrix(o.axes[1], deg[1]) * axis_matrix(o.axes[2], deg[2]);
}

const char* kOrders[] = {"XYZ", "XZY", "YXZ", "YZX", "ZXY", "ZYX"};

Eigen::Quaterniond random_unit(std::mt19937& rng) {
    std::normal_distribution<double> n;
    return Eigen::Quaterniond(n(rng), n(rng), n(rng), n(rng)).normalized();
}

bool same_rotation(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b, double tol) {
    return (a.coeffs() - b.coeffs()).cwiseAbs().maxCoeff() < tol || (a.coeffs() + b.coeffs()).cwiseAbs().maxCoeff() < tol;
}

SkeletonTopology random_tree(std::mt19937& rng, Index n) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    SkeletonTopology t;
    t.add_node("root", -1, Eigen::Vector3d::Zero());
    for (Index i = 1; i < n; ++i)
        t.add_node("n" + std::to_string(i), std::uniform_int_distribution<Index>(0, i - 1)(rng),
                   Eigen::Vector3d(u(rng), u(rng), u(rng)));
    return t;
}

} // namespace

TEST_CASE("axis order parsing") {
    CHECK(AxisOrder::parse("zxy").str() == "ZXY");
    CHECK_THROWS_AS(AxisOrder::parse("XXY"), InvalidArgument);
    CHECK_THROWS_AS(AxisOrder::parse("XY"), InvalidArgument);
    CHECK_THROWS_AS(AxisOrder::parse("XYW"), InvalidArgument);
}

TEST_CASE("euler to quaternion examples") {
    for (const char* o : kOrders) {
        const auto q = euler_to_quaternion(Eigen::Vector3d::Zero(), AxisOrder::parse(o));
        CHECK(q.w() == doctest::Approx(1.0));
        CHECK(q.vec().norm() == doctest::Approx(0.0));
    }
    const auto q = euler_to_quaternion(Eigen::Vector3d(90, 0, 0), AxisOrder::parse("ZXY"));
    CHECK(q.w() == doctest::Approx(std::sqrt(0.5)));
    CHECK(q.x() == doctest::Approx(0.0));
    CHECK(q.y() == doctest::Approx(0.0));
    CHECK(q.z() == doctest::Approx(std::sqrt(0.5)));
}

TEST_CASE("property: euler conversion matches the matrix chain and inverts") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> outer(-179.0, 179.0), middle(-89.0, 89.0);
    for (const char* name : kOrders) {
        const AxisOrder o = AxisOrder::parse(name);
        for (int i = 0; i < 200; ++i) {
            const Eigen::Vector3d deg(outer(rng), middle(rng), outer(rng));
            const Eigen::Quaterniond q = euler_to_quaternion(deg, o);
            CHECK((q.toRotationMatrix() - chain(deg, o)).cwiseAbs().maxCoeff() < 1e-9);
            const Eigen::Vector3d back = quaternion_to_euler(q, o);
            CHECK((back - deg).cwiseAbs().maxCoeff() < 1e-7);
        }
    }
}

TEST_CASE("quaternion tolerance") {
    const Eigen::Quaterniond near(1.0 + 5e-7, 0, 0, 0);
    CHECK(checked_unit(near).norm() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(checked_unit(Eigen::Quaterniond(1.1, 0, 0, 0)), InvalidArgument);
}

TEST_CASE("topology invariants") {
    SkeletonTopology t;
    CHECK_THROWS_AS(t.add_node("a", 0, Eigen::Vector3d::Zero()), InvalidArgument);
    t.add_node("root", -1, Eigen::Vector3d::Zero());
    CHECK_THROWS_AS(t.add_node("second_root", -1, Eigen::Vector3d::Zero()), InvalidArgument);
    CHECK_THROWS_AS(t.add_node("forward", 1, Eigen::Vector3d::Zero()), InvalidArgument);
    t.add_node("child", 0, Eigen::Vector3d::UnitX());
    CHECK(t.find("child") == 1);
    CHECK_FALSE(t.find("nope"));
    CHECK_THROWS(t.require("nope"));
}

TEST_CASE("forward kinematics examples") {
    SkeletonTopology t;
    t.add_node("root", -1, Eigen::Vector3d::Zero());
    t.add_node("a", 0, Eigen::Vector3d(1, 0, 0));
    t.add_node("b", 1, Eigen::Vector3d(0, 2, 0));
    std::vector<Eigen::Quaterniond> rest(3, Eigen::Quaterniond::Identity());
    const Eigen::Matrix3Xd p = forward_kinematics(t, rest, Eigen::Vector3d(0, 0, 1));
    CHECK((p.col(2) - Eigen::Vector3d(1, 2, 1)).norm() < 1e-12);

    SkeletonTopology bone;
    bone.add_node("root", -1, Eigen::Vector3d::Zero());
    bone.add_node("tip", 0, Eigen::Vector3d(1, 0, 0));
    std::vector<Eigen::Quaterniond> q{Eigen::Quaterniond(Eigen::AngleAxisd(M_PI / 2, Eigen::Vector3d::UnitZ())),
                                      Eigen::Quaterniond::Identity()};
    const Eigen::Matrix3Xd tip = forward_kinematics(bone, q, Eigen::Vector3d::Zero());
    CHECK((tip.col(1) - Eigen::Vector3d(0, 1, 0)).norm() < 1e-12);

    q[0].coeffs() *= 1.2;
    CHECK_THROWS_AS(forward_kinematics(bone, q, Eigen::Vector3d::Zero()), InvalidArgument);
}

TEST_CASE("property: forward kinematics matches a homogeneous matrix chain") {
    std::mt19937 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const SkeletonTopology t = random_tree(rng, 10);
        std::vector<Eigen::Quaterniond> q;
        for (Index i = 0; i < 10; ++i)
            q.push_back(random_unit(rng));
        const Eigen::Vector3d root(0.3, -0.2, 1.0);
        const Eigen::Matrix3Xd p = forward_kinematics(t, q, root);

        std::vector<Eigen::Matrix4d> world(10);
        for (Index i = 0; i < 10; ++i) {
            Eigen::Matrix4d local = Eigen::Matrix4d::Identity();
            local.topLeftCorner<3, 3>() = q[static_cast<std::size_t>(i)].toRotationMatrix();
            local.topRightCorner<3, 1>() = i == 0 ? root : t.offset(i);
            world[static_cast<std::size_t>(i)] =
                i == 0 ? local : Eigen::Matrix4d(world[static_cast<std::size_t>(t.parent(i))] * local);
            CHECK((world[static_cast<std::size_t>(i)].topRightCorner<3, 1>() - p.col(i)).cwiseAbs().maxCoeff() <
                  1e-9);
            if (i > 0)
                CHECK(std::abs((p.col(i) - p.col(t.parent(i))).norm() - t.offset(i).norm()) < 1e-9);
        }

        // sign flip leaves positions unchanged
        auto flipped = q;
        for (auto& r : flipped)
            r.coeffs() = -r.coeffs();
        CHECK((forward_kinematics(t, flipped, root) - p).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("local and global rotations invert each other") {
    std::mt19937 rng(3);
    const SkeletonTopology t = random_tree(rng, 12);
    std::vector<Eigen::Quaterniond> identity(12, Eigen::Quaterniond::Identity());
    for (const auto& q : global_to_local(t, identity))
        CHECK(same_rotation(q, Eigen::Quaterniond::Identity(), 1e-12));

    std::vector<Eigen::Quaterniond> local = identity;
    local[0] = random_unit(rng);
    const auto global = local_to_global(t, local);
    for (const auto& g : global)
        CHECK(same_rotation(g, local[0], 1e-12));

    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Eigen::Quaterniond> g;
        for (int i = 0; i < 12; ++i)
            g.push_back(random_unit(rng));
        const auto back = local_to_global(t, global_to_local(t, g));
        for (std::size_t i = 0; i < g.size(); ++i)
            CHECK(same_rotation(back[i], g[i], 1e-9));
    }
}

TEST_CASE("rotation packing keeps w x y z order") {
    const std::vector<Eigen::Quaterniond> q{Eigen::Quaterniond(0.5, 0.5, 0.5, 0.5)};
    const Eigen::VectorXd packed = pack_rotations(q);
    CHECK(packed[0] == 0.5);
    const auto un = unpack_rotations(packed);
    CHECK(un[0].coeffs() == q[0].coeffs());
}
