// moma: motion-capture feature extraction, template matching and OSC streaming.

#include "moma/bvh.hpp"
#include "moma/features.hpp"
#include "moma/labels.hpp"
#include "moma/recognition.hpp"
#include "moma/stream.hpp"
#include "moma/text.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <iostream>
#include <thread>

namespace {

constexpr int kExitParse = 1;
constexpr int kExitUnknownFeature = 2;

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

moma::Axis parse_axis(const std::string& s) {
    if (s == "X" || s == "x")
        return moma::Axis::X;
    if (s == "Y" || s == "y")
        return moma::Axis::Y;
    if (s == "Z" || s == "z")
        return moma::Axis::Z;
    throw moma::InvalidArgument("up axis must be X, Y or Z");
}

struct ExtractArgs {
    std::string input;
    std::string features;
    std::string output;
    std::string lab;
    std::string segments;
    std::string discomfort;
    std::string up = "Z";
    double scale = 1.0;
};

int cmd_extract(const ExtractArgs& a) {
    const moma::MotionData motion = moma::load_bvh(a.input, a.scale);
    std::optional<std::string> segments;
    if (!a.segments.empty())
        segments = moma::read_text_file(a.segments);
    moma::FeatureResources res = moma::make_resources(motion.topology, parse_axis(a.up), segments);
    if (!a.discomfort.empty())
        res.discomfort = moma::DiscomfortTable::parse(moma::read_text_file(a.discomfort), motion.topology);

    const auto tokens = moma::split_feature_list(a.features);
    if (tokens.empty())
        throw moma::InvalidArgument("no features selected");
    moma::FeaturePipeline pipeline(std::move(res), tokens, motion.pose.positions.frame_rate());
    const auto series = pipeline.extract(motion.pose.positions, &motion.pose.rotations);
    moma::write_text_file(a.output, moma::export_feature_csv(series));

    if (!a.lab.empty()) {
        const auto& p = motion.pose.positions;
        const std::string name = std::filesystem::path(a.input).stem().string();
        moma::write_text_file(a.lab, moma::write_labels({{p.time_of_index(0), p.time_of_index(p.frames() - 1),
                                                          name.empty() ? "take" : name}}));
    }
    return 0;
}

moma::FeatureMatrix features_of(const std::string& bvh, const std::string& feature_set, double scale) {
    const moma::MotionData motion = moma::load_bvh(bvh, scale);
    const auto defs = moma::parse_feature_set(moma::read_text_file(feature_set), motion.topology);
    if (defs.empty())
        throw moma::ParseError("feature set '" + feature_set + "' defines no features");
    return moma::relational_features(motion.pose.positions, defs);
}

struct TemplateArgs {
    std::vector<std::string> executions;
    std::string feature_set;
    std::string output;
    double tau_lo = 0.1;
    double tau_hi = 0.9;
    double scale = 1.0;

    std::string template_path;
    std::string target;
    double threshold = 0.1;
    std::string name = "match";
    moma::Index merge_gap = 1;
    std::string curve;
};

int cmd_template_build(const TemplateArgs& a) {
    std::vector<moma::FeatureMatrix> runs;
    for (const auto& e : a.executions)
        runs.push_back(features_of(e, a.feature_set, a.scale));
    moma::write_text_file(a.output, moma::write_template(moma::build_template(runs, a.tau_lo, a.tau_hi)));
    return 0;
}

int cmd_template_match(const TemplateArgs& a) {
    const moma::MotionTemplate tmpl = moma::read_template(moma::read_text_file(a.template_path));
    const moma::MotionData motion = moma::load_bvh(a.target, a.scale);
    const auto defs = moma::parse_feature_set(moma::read_text_file(a.feature_set), motion.topology);
    const auto features = moma::relational_features(motion.pose.positions, defs);
    const moma::MatchCurve curve = moma::subsequence_distance(tmpl, features);
    const auto detections = moma::detect(curve, a.threshold, a.merge_gap);
    const auto& p = motion.pose.positions;
    moma::write_text_file(a.output, moma::write_labels(moma::detections_to_labels(
                                        detections, p.frame_rate(), a.name, p.time_of_index(0))));
    if (!a.curve.empty()) {
        Eigen::MatrixXd values = curve.distance.transpose();
        moma::write_text_file(a.curve,
                              moma::export_feature_csv({{"match_distance", {}, moma::Series(values, p.time_model())}}));
    }
    return 0;
}

int cmd_stream(const std::string& config_path) {
    const std::string base = std::filesystem::path(config_path).parent_path().string();
    const moma::StreamConfig config = moma::parse_stream_config(moma::read_text_file(config_path), base);
    std::unique_ptr<moma::StreamServer> server;
    try {
        server = std::make_unique<moma::StreamServer>(config);
    } catch (const moma::InvalidArgument&) {
        throw;
    } catch (const moma::Error& e) {
        std::cerr << "moma stream: " << e.what() << '\n';
        return 1;
    }
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cerr << "moma stream: listening on " << config.listen_host << ':' << server->port() << ", emitting to "
              << config.emit_host << ':' << config.emit_port << '\n';
    server->run(g_stop, [](const moma::StreamStats& s) {
        std::cerr << "frames " << s.processed.load() << " received " << s.received.load() << " dropped "
                  << s.dropped.load() << " rejected " << s.rejected.load() << '\n';
    });
    std::cerr << "moma stream: stopped after " << server->stats().processed.load() << " frames, "
              << server->stats().dropped.load() << " dropped\n";
    return 0;
}

struct ReplayArgs {
    std::string input;
    std::string host = "127.0.0.1";
    std::uint16_t port = 9000;
    double rate = 0.0;
    double scale = 1.0;
};

int cmd_replay(const ReplayArgs& a) {
    const moma::MotionData motion = moma::load_bvh(a.input, a.scale);
    const auto& p = motion.pose.positions;
    const double rate = a.rate > 0.0 ? a.rate : p.frame_rate();
    moma::UdpSocket socket;
    std::signal(SIGINT, on_signal);
    const auto start = std::chrono::steady_clock::now();
    for (moma::Index i = 0; i < p.frames() && !g_stop; ++i) {
        std::this_thread::sleep_until(start + std::chrono::duration<double>(static_cast<double>(i) / rate));
        const auto packet = moma::encode(moma::frame_message(p.time_of_index(i), p.frame(i)));
        if (!socket.send_to(a.host, a.port, packet))
            std::cerr << "moma replay: send failed at frame " << i << '\n';
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Motion-capture feature extraction, template matching and OSC streaming"};
    app.require_subcommand(1);

    ExtractArgs ex;
    auto* extract = app.add_subcommand("extract", "Compute features of a BVH file into CSV");
    extract->add_option("input", ex.input, "BVH file")->required();
    extract->add_option("-f,--features", ex.features, "Comma-separated features, e.g. com,weight_effort:0.5")
        ->required();
    extract->add_option("-o,--output", ex.output, "CSV output")->required();
    extract->add_option("--lab", ex.lab, "Also write a label file spanning the take");
    extract->add_option("--segments", ex.segments, "Segment table for centre of mass and joint weights");
    extract->add_option("--discomfort", ex.discomfort, "Discomfort table (enables postural_load)");
    extract->add_option("--up", ex.up, "Vertical axis of the capture (X, Y or Z)");
    extract->add_option("--scale", ex.scale, "Factor applied to BVH lengths");

    TemplateArgs ta;
    auto* tmpl = app.add_subcommand("template", "Build or match relational-feature motion templates");
    tmpl->require_subcommand(1);
    auto* build = tmpl->add_subcommand("build", "Average executions into a template");
    build->add_option("executions", ta.executions, "Execution BVH files")->required();
    build->add_option("-s,--feature-set", ta.feature_set, "Relational feature definitions")->required();
    build->add_option("-o,--output", ta.output, "Template output")->required();
    build->add_option("--tau-lo", ta.tau_lo, "Lower bound of the uncertainty zone");
    build->add_option("--tau-hi", ta.tau_hi, "Upper bound of the uncertainty zone");
    build->add_option("--scale", ta.scale, "Factor applied to BVH lengths");
    auto* match = tmpl->add_subcommand("match", "Detect template occurrences in a BVH file");
    match->add_option("template", ta.template_path, "Template file")->required();
    match->add_option("target", ta.target, "Target BVH file")->required();
    match->add_option("-s,--feature-set", ta.feature_set, "Relational feature definitions")->required();
    match->add_option("-t,--threshold", ta.threshold, "Detect where the distance is below this");
    match->add_option("-o,--output", ta.output, "Label output")->required();
    match->add_option("--name", ta.name, "Label name of detections");
    match->add_option("--merge-gap", ta.merge_gap, "Merge detections closer than this many frames");
    match->add_option("--curve", ta.curve, "Also write the distance curve as CSV");
    match->add_option("--scale", ta.scale, "Factor applied to BVH lengths");

    std::string config_path;
    auto* stream = app.add_subcommand("stream", "Serve features over OSC until interrupted");
    stream->add_option("config", config_path, "Stream config file")->required();

    ReplayArgs ra;
    auto* replay = app.add_subcommand("replay", "Send a BVH file as OSC frame messages");
    replay->add_option("input", ra.input, "BVH file")->required();
    replay->add_option("--host", ra.host, "Destination host");
    replay->add_option("--port", ra.port, "Destination port");
    replay->add_option("--rate", ra.rate, "Frames per second (default: the file's rate)");
    replay->add_option("--scale", ra.scale, "Factor applied to BVH lengths");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*extract)
            return cmd_extract(ex);
        if (*build)
            return cmd_template_build(ta);
        if (*match)
            return cmd_template_match(ta);
        if (*stream)
            return cmd_stream(config_path);
        if (*replay)
            return cmd_replay(ra);
    } catch (const moma::UnknownFeature& e) {
        std::cerr << "moma: " << e.what() << "\n  known features:";
        for (const auto& n : moma::feature_names())
            std::cerr << ' ' << n;
        std::cerr << '\n';
        return kExitUnknownFeature;
    } catch (const std::exception& e) {
        std::cerr << "moma: " << e.what() << '\n';
        return kExitParse;
    }
    return 0;
}
