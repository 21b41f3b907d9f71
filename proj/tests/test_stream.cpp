#include "moma/stream.hpp"

#include "synthetic.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <thread>

using namespace moma;
using namespace std::chrono_literals;

namespace {

std::string walk_file(Index frames = 60) {
    testing::WalkParams w;
    w.frames = frames;
    return testing::temp_file("walk.bvh", testing::humanoid_bvh(w));
}

StreamConfig unnamed(Index nodes, std::vector<std::string> features) {
    StreamConfig c;
    c.nodes = nodes;
    c.features = std::move(features);
    return c;
}

} // namespace

TEST_CASE("config parsing") {
    const StreamConfig c = parse_stream_config(R"(# server
listen_host 0.0.0.0
listen_port 7000
emit_host 10.0.0.2
emit_port 7001   # trailing comment
nodes 21
capacity 300
queue 64
frame_rate 120
emit_rate 30
features com, weight_effort:1
features period
skeleton takes/walk.bvh
segments /abs/segments.txt
up Y
)",
                                              "/data");
    CHECK(c.listen_host == "0.0.0.0");
    CHECK(c.listen_port == 7000);
    CHECK(c.emit_host == "10.0.0.2");
    CHECK(c.emit_port == 7001);
    CHECK(c.nodes == 21);
    CHECK(c.capacity == 300);
    CHECK(c.queue == 64);
    CHECK(c.frame_rate == 120.0);
    CHECK(c.emit_rate == 30.0);
    CHECK(c.features == std::vector<std::string>{"com", "weight_effort:1", "period"});
    CHECK(std::filesystem::path(c.skeleton) == std::filesystem::path("/data/takes/walk.bvh"));
    CHECK(c.segments == "/abs/segments.txt");
    CHECK(c.up == Axis::Y);

    const StreamConfig d = parse_stream_config("");
    CHECK(d.listen_port == 9000);
    CHECK(d.emit_port == 9001);
    CHECK(d.features.empty());
    CHECK(d.frame_rate == 100.0);
}

TEST_CASE("config errors") {
    for (const char* bad : {"colour red\n", "nodes\n", "listen_port 70000\n", "listen_port 1.5\n", "nodes -1\n",
                            "up W\n", "frame_rate 0\n", "emit_rate -1\n", "queue 0\n", "nodes 3 4\n",
                            "capacity many\n"}) {
        INFO(bad);
        CHECK_THROWS_AS(parse_stream_config(bad), ParseError);
    }
    try {
        parse_stream_config("nodes 3\n\nbogus 1\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
}

TEST_CASE("config validation against the pipeline") {
    CHECK_THROWS_AS(make_stream_pipeline(unnamed(4, {})), InvalidArgument);
    CHECK_THROWS_AS(make_stream_pipeline(unnamed(0, {"com"})), InvalidArgument);
    CHECK_THROWS_AS(make_stream_pipeline(unnamed(4, {"nope"})), UnknownFeature);

    StreamConfig small = unnamed(4, {"weight_effort"});
    small.capacity = 10;
    CHECK_THROWS_AS(make_stream_pipeline(small), InvalidArgument);
    small.capacity = 49 + 1 + 5;
    CHECK_NOTHROW(make_stream_pipeline(small));

    StreamConfig skel;
    skel.skeleton = walk_file(10);
    skel.features = {"com"};
    const FeaturePipeline p = make_stream_pipeline(skel);
    CHECK(p.resources().topology.node_count() == 26);
    CHECK(p.resources().topology.find("LeftHand"));
    skel.nodes = 5;
    CHECK_THROWS_AS(make_stream_pipeline(skel), InvalidArgument);

    // rotations never arrive over the wire
    StreamConfig load;
    load.skeleton = walk_file(10);
    load.features = {"postural_load"};
    CHECK_THROWS_AS(make_stream_pipeline(load), InvalidArgument);

    const SkeletonTopology t = stream_topology(unnamed(3, {"com"}));
    CHECK(t.node_count() == 3);
    CHECK(t.name(2) == "n2");
    CHECK(t.parent(2) == 0);
}

TEST_CASE("ingest frame") {
    Eigen::VectorXd p(6);
    p << 0.1, 0.2, 0.3, 1.0 / 3.0, -2.5, 1e-3;
    const OscMessage m = frame_message(1.25, p);
    CHECK(m.tags() == "dffffff");

    auto ring = Series::ring(6, 4, FixedRate{100.0, 0.0});
    const DecodedFrame f = ingest_frame(m, ring, 2);
    CHECK(f.time == 1.25);
    REQUIRE(ring.frames() == 1);
    for (Index i = 0; i < 6; ++i)
        CHECK(ring(i, 0) == static_cast<double>(static_cast<float>(p[i])));

    auto stamped = Series::ring(6, 4, Stamped{});
    ingest_frame(m, stamped, 2);
    CHECK(stamped.time_of_index(0) == 1.25);
    CHECK_THROWS_AS(ingest_frame(m, stamped, 2), TimeOrderError);

    CHECK_THROWS_AS(ingest_frame(m, ring, 3), DimensionError);
    OscMessage wrong = m;
    wrong.address = "/moma/in/other";
    CHECK_THROWS_AS(ingest_frame(wrong, ring, 2), InvalidArgument);
    OscMessage short_frame = m;
    short_frame.arguments.pop_back();
    CHECK_THROWS_AS(ingest_frame(short_frame, ring, 2), InvalidArgument);
}

TEST_CASE("feature messages") {
    FeaturePipeline p(make_resources(stream_topology(unnamed(3, {}))), {"com", "kinetic_energy"}, 100.0);
    const std::vector<Eigen::VectorXd> values{Eigen::Vector3d(1, 2, 3), Eigen::VectorXd::Constant(1, 0.5)};
    const auto msgs = feature_messages(p, 0.75, values);
    REQUIRE(msgs.size() == 2);
    CHECK(msgs[0].address == "/moma/out/com");
    CHECK(msgs[0].tags() == "dfff");
    CHECK(std::get<double>(msgs[0].arguments[0]) == 0.75);
    CHECK(std::get<float>(msgs[0].arguments[3]) == 3.0f);
    CHECK(msgs[1].address == "/moma/out/kinetic_energy");
    CHECK(msgs[1].tags() == "df");
    CHECK_THROWS_AS(feature_messages(p, 0.0, {values[0]}), DimensionError);

    int calls = 0;
    const Index sent = emit_features(p, 0.75, values, [&](const OscMessage&) { return ++calls == 1; });
    CHECK(calls == 2);
    CHECK(sent == 1);
}

TEST_CASE("bounded queue drops the oldest entry") {
    BoundedQueue<int> q(3);
    std::vector<bool> dropped;
    for (int i = 1; i <= 5; ++i)
        dropped.push_back(q.push(i));
    CHECK(dropped == std::vector<bool>{false, false, false, true, true});
    CHECK(q.size() == 3);
    CHECK(*q.pop(0ms) == 3);
    CHECK(*q.pop(0ms) == 4);
    CHECK(*q.pop(0ms) == 5);
    CHECK_FALSE(q.pop(1ms));

    BoundedQueue<int> one(0);
    one.push(1);
    CHECK(one.push(2));
    CHECK(*one.pop(0ms) == 2);
}

TEST_CASE("bounded queue hands entries across threads in order") {
    BoundedQueue<int> q(100000);
    std::thread producer([&] {
        for (int i = 0; i < 20000; ++i)
            q.push(i);
    });
    int expected = 0;
    bool ordered = true;
    while (expected < 20000) {
        if (auto v = q.pop(1000ms)) {
            ordered &= *v == expected;
            ++expected;
        } else {
            break;
        }
    }
    producer.join();
    CHECK(ordered);
    CHECK(expected == 20000);
}

TEST_CASE("udp loopback keeps messages bit exact") {
    UdpSocket rx = UdpSocket::bind(0);
    REQUIRE(rx.local_port() != 0);
    UdpSocket tx;
    CHECK_FALSE(rx.receive(10ms));

    Eigen::VectorXd p(9);
    p << 0.1, -0.2, 1e-30, 3e38, -0.0, 7.0, 1.0 / 7.0, -1e-5, 42.0;
    const OscMessage frame = frame_message(12.345678901234, p);
    REQUIRE(tx.send_to("127.0.0.1", rx.local_port(), encode(frame)));
    const auto packet = rx.receive(1000ms);
    REQUIRE(packet);
    CHECK(*packet == encode(frame));
    const OscMessage back = decode(*packet);
    CHECK(back == frame);
    CHECK(std::signbit(std::get<float>(back.arguments[5])));

    const OscMessage stats = stats_message(3, 1000);
    REQUIRE(tx.send_to("127.0.0.1", rx.local_port(), encode(stats)));
    CHECK(decode(*rx.receive(1000ms)) == stats);
}

TEST_CASE("port conflicts are reported") {
    UdpSocket taken = UdpSocket::bind(0);
    CHECK_THROWS_AS(UdpSocket::bind(taken.local_port()), Error);
    CHECK_THROWS_AS(UdpSocket::bind(0, "not-an-address"), Error);

    StreamConfig c = unnamed(2, {"com"});
    c.listen_port = taken.local_port();
    CHECK_THROWS_AS(StreamServer{c}, Error);
}

TEST_CASE("server computes and emits features for streamed frames") {
    testing::WalkParams w;
    w.frames = 60;
    const MotionData m = to_motion(testing::humanoid_document(w));
    const Index n = m.pose.positions.frames();

    UdpSocket out = UdpSocket::bind(0);
    StreamConfig c;
    c.listen_port = 0;
    c.emit_port = out.local_port();
    c.skeleton = walk_file(2);
    c.features = {"com", "kinetic_energy"};
    StreamServer server(c);
    REQUIRE(server.port() != 0);

    std::atomic<bool> stop{false};
    std::thread runner([&] { server.run(stop); });

    UdpSocket tx;
    for (Index i = 0; i < n; ++i)
        tx.send_to("127.0.0.1", server.port(), encode(frame_message(i / 100.0, m.pose.positions.frame(i))));
    tx.send_to("127.0.0.1", server.port(), std::vector<std::uint8_t>{1, 2, 3});

    // offline reference on the float-quantized positions the server received
    const Series quantized(m.pose.positions.matrix().cast<float>().cast<double>(), FixedRate{100.0, 0.0});
    FeaturePipeline offline(make_resources(m.topology), c.features, 100.0);
    const auto ref = offline.extract(quantized);

    std::map<std::string, std::vector<OscMessage>> got;
    bool stats_seen = false;
    const auto deadline = std::chrono::steady_clock::now() + 5s;
    while (std::chrono::steady_clock::now() < deadline && !(stats_seen && got["/moma/out/com"].size() >= 59)) {
        if (auto p = out.receive(100ms)) {
            const OscMessage msg = decode(*p);
            if (msg.address == kStatsAddress)
                stats_seen = true;
            else
                got[msg.address].push_back(msg);
        }
    }
    stop = true;
    runner.join();

    CHECK(stats_seen);
    CHECK(server.stats().received == n);
    CHECK(server.stats().processed == n);
    CHECK(server.stats().rejected == 1);
    CHECK(server.stats().dropped == 0);

    const auto& com = got["/moma/out/com"];
    const auto& ke = got["/moma/out/kinetic_energy"];
    REQUIRE(com.size() == static_cast<std::size_t>(n - 1));
    REQUIRE(ke.size() == com.size());
    for (std::size_t i = 0; i < com.size(); ++i) {
        const auto f = static_cast<Index>(i);
        CHECK(std::get<double>(com[i].arguments[0]) == doctest::Approx(f / 100.0).epsilon(1e-12));
        for (Index r = 0; r < 3; ++r)
            CHECK(std::get<float>(com[i].arguments[static_cast<std::size_t>(r) + 1]) ==
                  static_cast<float>(ref[0].values(r, f)));
        CHECK(std::get<float>(ke[i].arguments[1]) == static_cast<float>(ref[1].values(0, f)));
    }
}

TEST_CASE("server thins output to the emit rate") {
    UdpSocket out = UdpSocket::bind(0);
    StreamConfig c = unnamed(2, {"com"});
    c.listen_port = 0;
    c.emit_port = out.local_port();
    c.emit_rate = 25.0;
    StreamServer server(c);
    std::atomic<bool> stop{false};
    std::thread runner([&] { server.run(stop); });

    UdpSocket tx;
    for (int i = 0; i < 40; ++i)
        tx.send_to("127.0.0.1", server.port(), encode(frame_message(i / 100.0, Eigen::VectorXd::Constant(6, i))));
    std::vector<double> times;
    const auto deadline = std::chrono::steady_clock::now() + 3s;
    while (std::chrono::steady_clock::now() < deadline && times.size() < 10)
        if (auto p = out.receive(100ms)) {
            const OscMessage msg = decode(*p);
            if (msg.address == "/moma/out/com")
                times.push_back(std::get<double>(msg.arguments[0]));
        }
    stop = true;
    runner.join();
    REQUIRE(times.size() == 10);
    for (std::size_t i = 0; i < times.size(); ++i)
        CHECK(times[i] == doctest::Approx(0.04 * static_cast<double>(i)));
}
