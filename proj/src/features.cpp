#include "moma/features.hpp"

#include "moma/effort.hpp"
#include "moma/kinematics.hpp"
#include "moma/periodicity.hpp"
#include "moma/text.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <map>

namespace moma {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<Index> leaves(const SkeletonTopology& topo) {
    std::vector<bool> has_child(static_cast<std::size_t>(topo.node_count()), false);
    for (Index i = 1; i < topo.node_count(); ++i)
        has_child[static_cast<std::size_t>(topo.parent(i))] = true;
    std::vector<Index> out;
    for (Index i = 0; i < topo.node_count(); ++i)
        if (!has_child[static_cast<std::size_t>(i)])
            out.push_back(i);
    return out;
}

std::vector<Index> named_or_leaves(const SkeletonTopology& topo, std::initializer_list<const char*> names) {
    std::vector<Index> out;
    for (const char* n : names)
        if (auto id = topo.find(n))
            out.push_back(*id);
    if (out.size() == names.size())
        return out;
    return leaves(topo);
}

SegmentModel bone_segments(const SkeletonTopology& topo) {
    std::vector<Segment> segs;
    if (topo.node_count() == 1) {
        segs.push_back({topo.name(0), 0, 0, 0.0, 1.0});
        return SegmentModel(std::move(segs));
    }
    const double share = 1.0 / static_cast<double>(topo.node_count() - 1);
    for (Index i = 1; i < topo.node_count(); ++i)
        segs.push_back({topo.name(topo.parent(i)) + "-" + topo.name(i), topo.parent(i), i, 0.5, share});
    return SegmentModel(std::move(segs));
}

double parse_param(const std::string& token, const std::string& param) {
    try {
        const double v = parse_number(param);
        if (!(v > 0.0) || !std::isfinite(v))
            throw InvalidArgument("");
        return v;
    } catch (const Error&) {
        throw InvalidArgument("feature '" + token + "' needs a positive number after ':'");
    }
}

// Scalar or vector feature defined by a per-frame lambda.
class LambdaExtractor : public FeatureExtractor {
public:
    using Fn = std::function<void(FeatureContext&, Index, Eigen::Ref<Eigen::VectorXd>)>;

    LambdaExtractor(std::string name, std::vector<std::string> comps, Index back, Index ahead, Fn fn,
                    bool rotations = false)
        : name_(std::move(name)), comps_(std::move(comps)), back_(back), ahead_(ahead), fn_(std::move(fn)),
          rotations_(rotations) {}

    std::string name() const override { return name_; }
    std::vector<std::string> components() const override { return comps_; }
    Index lookback() const override { return back_; }
    Index lookahead() const override { return ahead_; }
    bool needs_rotations() const override { return rotations_; }
    void evaluate(FeatureContext& ctx, Index i, Eigen::Ref<Eigen::VectorXd> out) override { fn_(ctx, i, out); }

private:
    std::string name_;
    std::vector<std::string> comps_;
    Index back_, ahead_;
    Fn fn_;
    bool rotations_;
};

// Running ground-trace accumulator of a node or of the centre of mass.
template <typename Accumulator>
class TraceExtractor : public FeatureExtractor {
public:
    TraceExtractor(std::string name, std::optional<Index> node) : name_(std::move(name)), node_(node) {}

    std::string name() const override { return name_; }
    bool stateful() const override { return true; }
    void reset() override { acc_ = Accumulator{}; }

    void evaluate(FeatureContext& ctx, Index i, Eigen::Ref<Eigen::VectorXd> out) override {
        const auto& res = ctx.resources();
        const auto frame = ctx.frame(i);
        const Eigen::Vector3d p = node_ ? Eigen::Vector3d(frame.col(*node_))
                                        : global_com(Eigen::Matrix3Xd(frame), res.segments);
        out[0] = acc_.add(project_to_ground(p, res.up));
    }

private:
    std::string name_;
    std::optional<Index> node_;
    Accumulator acc_;
};

double body_energy(FeatureContext& ctx, Index i) {
    const auto& w = ctx.resources().joint_weights;
    const auto& v = ctx.velocities();
    double e = 0.0;
    for (Index k = 0; k < w.size(); ++k)
        if (w[k] != 0.0)
            e += w[k] * v.col(i).segment<3>(3 * k).squaredNorm();
    return e;
}

// Per-joint trailing means of a per-frame magnitude, aggregated with the joint weights.
double weighted_trailing_mean(FeatureContext& ctx, const Eigen::MatrixXd& deriv, Index w, Index i) {
    const auto& weights = ctx.resources().joint_weights;
    const Index s = std::max<Index>(0, i - w + 1);
    Eigen::VectorXd per_joint(weights.size());
    for (Index k = 0; k < weights.size(); ++k) {
        if (weights[k] == 0.0) {
            per_joint[k] = 0.0;
            continue;
        }
        Eigen::RowVectorXd mag = deriv.block(3 * k, s, 3, i - s + 1).colwise().norm();
        per_joint[k] = trailing_mean_at(mag, w, i - s);
    }
    return weighted_sum(per_joint, weights);
}

std::vector<std::string> node_names(const SkeletonTopology& topo, const std::vector<Index>& nodes) {
    std::vector<std::string> out;
    for (Index n : nodes)
        out.push_back(topo.name(n));
    return out;
}

std::optional<Index> trace_node(const std::string& token, const std::string& param, const FeatureResources& res) {
    if (param.empty())
        return res.trace_node;
    if (param == "com")
        return std::nullopt;
    if (auto id = res.topology.find(param))
        return *id;
    throw InvalidArgument("feature '" + token + "' names unknown node '" + param + "'");
}

using Factory = std::function<std::unique_ptr<FeatureExtractor>(const std::string& token, const std::string& param,
                                                                const FeatureResources&, double rate)>;

void no_param(const std::string& token, const std::string& param) {
    if (!param.empty())
        throw InvalidArgument("feature '" + token + "' takes no parameter");
}

Index window_frames(const std::string& token, const std::string& param, double rate, double fallback) {
    const double seconds = param.empty() ? fallback : parse_param(token, param);
    return EffortWindow{seconds}.frames(rate);
}

std::string window_label(const std::string& token, const std::string& param, double fallback) {
    return EffortWindow{param.empty() ? fallback : parse_param(token, param)}.label();
}

const std::map<std::string, Factory>& registry() {
    static const std::map<std::string, Factory> table = {
        {"com",
         [](const std::string& t, const std::string& p, const FeatureResources&, double) {
             no_param(t, p);
             return std::make_unique<LambdaExtractor>(
                 "com", std::vector<std::string>{"x", "y", "z"}, 0, 0,
                 [](FeatureContext& ctx, Index i, Eigen::Ref<Eigen::VectorXd> out) {
                     out = global_com(Eigen::Matrix3Xd(ctx.frame(i)), ctx.resources().segments);
                 });
         }},
        {"balance_binary",
         [](const std::string& t, const std::string& p, const FeatureResources&, double) {
             no_param(t, p);
             return std::make_unique<LambdaExtractor>(
                 "balance_binary", std::vector<std::string>{}, 0, 0,
                 [](FeatureContext& ctx, Index i, Eigen::Ref<Eigen::VectorXd> out) {
                     const auto& r = ctx.resources();
                     out[0] = binary_balance(Eigen::Matrix3Xd(ctx.frame(i)), r.segments, r.support);
                 });
         }},
        {"balance_continuous",
         [](const std::string& t, const std::string& p, const FeatureResources&, double) {
             no_param(t, p);
             return std::make_unique<LambdaExtractor>(
                 "balance_continuous", std::vector<std::string>{}, 0, 0,
                 [](FeatureContext& ctx, Index i, Eigen::Ref<Eigen::VectorXd> out) {
                     const auto& r = ctx.resources();
                     out[0] = continuous_balance(Eigen::Matrix3Xd(ctx.frame(i)), r.segments, r.support)
                                  .value_or(kNaN);
                 });
         }},
        {"sphereness",
         [](const std::string& t, const std::string& p, const FeatureResources& res, double) {
             no_param(t, p);
             if (res.effectors.empty())
                 throw InvalidArgument("sphereness needs at least one end effector");
             return std::make_unique<LambdaExtractor>(
                 "sphereness", std::vector<std::string>{"r", "sigma"}, 0, 0,
                 [](FeatureContext& ctx, Index i, Eigen::Ref<Eigen::VectorXd> out) {
                     const auto& r = ctx.resources();
                     const Eigen::Matrix3Xd f = ctx.frame(i);
                     const auto s = sphereness(f, r.effectors, global_com(f, r.segments));
                     out << s.radius, s.deviation;
                 });
         }},
        {"kinetic_energy",
         [](const std::string& t, const std::string& p, const FeatureResources&, double) {
             no_param(t, p);
             return std::make_unique<LambdaExtractor>(
                 "kinetic_energy", std::vector<std::string>{}, 0, 1,
                 [](FeatureContext& ctx, Index i, Eigen::Ref<Eigen::VectorXd> out) { out[0] = body_energy(ctx, i); });
         }},
        {"weight_effort",
         [](const std::string& t, const std::string& p, const FeatureResources&, double rate) {
             const Index w = window_frames(t, p, rate, 0.5);
             return std::make_unique<LambdaExtractor>(
                 "weight_effort_" + window_label(t, p, 0.5), std::vector<std::string>{}, w - 1, 1,
                 [w](FeatureContext& ctx, Index i, Eigen::Ref<Eigen::VectorXd> out) {
                     const Index s = std::max<Index>(0, i - w + 1);
                     Eigen::RowVectorXd e(i - s + 1);
                     for (Index j = s; j <= i; ++j)
                         e[j - s] = body_energy(ctx, j);
                     out[0] = trailing_max_at(e, w, i - s);
                 });
         }},
        {"time_effort",
         [](const std::string& t, const std::string& p, const FeatureResources&, double rate) {
             const Index w = window_frames(t, p, rate, 0.5);
             return std::make_unique<LambdaExtractor>(
                 "time_effort_" + window_label(t, p, 0.5), std::vector<std::string>{}, w - 1, 1,
                 [w](FeatureContext& ctx, Index i, Eigen::Ref<Eigen::VectorXd> out) {
                     out[0] = weighted_trailing_mean(ctx, ctx.accelerations(), w, i);
                 });
         }},
        {"flow_effort",
         [](const std::string& t, const std::string& p, const FeatureResources&, double rate) {
             const Index w = window_frames(t, p, rate, 0.5);
             return std::make_unique<LambdaExtractor>(
                 "flow_effort_" + window_label(t, p, 0.5), std::vector<std::string>{}, w - 1, 2,
                 [w](FeatureContext& ctx, Index i, Eigen::Ref<Eigen::VectorXd> out) {
                     out[0] = weighted_trailing_mean(ctx, ctx.jerks(), w, i);
                 });
         }},
        {"space_effort",
         [](const std::string& t, const std::string& p, const FeatureResources&, double rate) {
             const Index w = window_frames(t, p, rate, 0.5);
             if (w < 2)
                 throw InvalidArgument("space effort window must span at least 2 frames");
             return std::make_unique<LambdaExtractor>(
                 "space_effort_" + window_label(t, p, 0.5), std::vector<std::string>{}, w - 1, 0,
                 [w](FeatureContext& ctx, Index i, Eigen::Ref<Eigen::VectorXd> out) {
                     const auto& weights = ctx.resources().joint_weights;
                     const Index s = std::max<Index>(0, i - w + 1);
                     Eigen::VectorXd per_joint = Eigen::VectorXd::Zero(weights.size());
                     for (Index k = 0; k < weights.size(); ++k)
                         if (weights[k] != 0.0)
                             per_joint[k] = directness_at(ctx.x().block(3 * k, s, 3, i - s + 1), w, i - s);
                     out[0] = weighted_sum(per_joint, weights);
                 });
         }},
        {"covered_distance",
         [](const std::string& t, const std::string& p, const FeatureResources& res, double) {
             return std::make_unique<TraceExtractor<CoveredDistance>>("covered_distance", trace_node(t, p, res));
         }},
        {"covered_area",
         [](const std::string& t, const std::string& p, const FeatureResources& res, double) {
             return std::make_unique<TraceExtractor<CoveredArea>>("covered_area", trace_node(t, p, res));
         }},
        {"wei",
         [](const std::string& t, const std::string& p, const FeatureResources&, double) {
             no_param(t, p);
             return std::make_unique<LambdaExtractor>(
                 "wei", std::vector<std::string>{}, 0, 1,
                 [](FeatureContext& ctx, Index i, Eigen::Ref<Eigen::VectorXd> out) { out[0] = wei(ctx.rig(), i); });
         }},
        {"fluidity",
         [](const std::string& t, const std::string& p, const FeatureResources& res, double) {
             no_param(t, p);
             return std::make_unique<LambdaExtractor>(
                 "fluidity", node_names(res.topology, res.rig_joints), 0, 2,
                 [](FeatureContext& ctx, Index i, Eigen::Ref<Eigen::VectorXd> out) {
                     for (Index k = 0; k < out.size(); ++k)
                         out[k] = fluidity_index(ctx.rig(), k, i);
                 });
         }},
        {"impulsivity",
         [](const std::string& t, const std::string& p, const FeatureResources& res, double rate) {
             no_param(t, p);
             const Index lag = res.accel.lag > 0 ? res.accel.lag
                                                 : std::max<Index>(1, static_cast<Index>(std::llround(0.5 * rate)));
             return std::make_unique<LambdaExtractor>(
                 "impulsivity", node_names(res.topology, res.rig_joints), lag, 2,
                 [](FeatureContext& ctx, Index i, Eigen::Ref<Eigen::VectorXd> out) {
                     const auto& rig = ctx.rig();
                     for (Index k = 0; k < out.size(); ++k)
                         out[k] = i < rig.lag() ? kNaN : impulsivity_index(rig, k, i).value_or(kNaN);
                 });
         }},
        {"postural_load",
         [](const std::string& t, const std::string& p, const FeatureResources& res, double) {
             no_param(t, p);
             if (!res.discomfort || res.discomfort->empty())
                 throw InvalidArgument("postural_load needs a discomfort table");
             return std::make_unique<LambdaExtractor>(
                 "postural_load", std::vector<std::string>{}, 0, 0,
                 [](FeatureContext& ctx, Index i, Eigen::Ref<Eigen::VectorXd> out) {
                     const auto q = unpack_rotations(ctx.rotations()->frame(i));
                     out[0] = postural_load(q, *ctx.resources().discomfort);
                 },
                 true);
         }},
        {"period",
         [](const std::string& t, const std::string& p, const FeatureResources&, double rate) {
             const Index n = window_frames(t, p, rate, 2.56);
             if (n < 8)
                 throw InvalidArgument("period window must span at least 8 frames");
             return std::make_unique<LambdaExtractor>(
                 "period_" + window_label(t, p, 2.56), std::vector<std::string>{}, n - 1, 0,
                 [n](FeatureContext& ctx, Index i, Eigen::Ref<Eigen::VectorXd> out) {
                     out[0] = kNaN;
                     if (i < n - 1)
                         return;
                     const auto& r = ctx.resources();
                     const Index row = 3 * r.period_node + static_cast<Index>(r.up);
                     AnalysisGrid grid;
                     grid.window = n;
                     CorrelogramArray a;
                     a.grid = grid;
                     a.frame_rate = ctx.frame_rate();
                     a.values = frame_autocorrelation(ctx.x().row(row).segment(i - n + 1, n).transpose(), grid);
                     const auto search = default_peak_search(a);
                     if (search.min_lag > search.max_lag)
                         return;
                     if (auto period = period_from_peak(a, search).front())
                         out[0] = *period;
                 });
         }},
    };
    return table;
}

} // namespace

FeatureResources make_resources(const SkeletonTopology& topology, Axis up,
                                const std::optional<std::string>& segment_text) {
    if (topology.node_count() < 1)
        throw InvalidArgument("feature resources need a non-empty skeleton");
    FeatureResources r;
    r.topology = topology;
    r.up = up;
    r.support.up = up;
    if (segment_text) {
        r.segments = SegmentModel::parse(*segment_text, topology);
    } else {
        try {
            r.segments = SegmentModel::parse(humanoid_segment_table(), topology);
        } catch (const Error&) {
            r.segments = bone_segments(topology);
        }
    }
    r.joint_weights = r.segments.node_weights(topology.node_count());
    r.effectors = named_or_leaves(topology, {"Head", "LeftHand", "RightHand", "LeftFoot", "RightFoot"});
    r.rig_joints = named_or_leaves(topology, {"LeftHand", "RightHand", "LeftFoot", "RightFoot"});
    r.period_node = topology.find("Head").value_or(0);
    r.trace_node = 0;
    return r;
}

FeatureContext::FeatureContext(const FeatureResources& resources, const Series& positions, const Series* rotations)
    : res_(resources), positions_(positions), rotations_(rotations), x_(positions.matrix()),
      rate_(positions.frame_rate()) {
    if (x_.rows() != 3 * res_.topology.node_count())
        throw DimensionError("position track has " + std::to_string(x_.rows()) + " rows, skeleton needs " +
                             std::to_string(3 * res_.topology.node_count()));
    if (rotations_ && rotations_->frames() != positions_.frames())
        throw DimensionError("rotation and position tracks differ in length");
}

const Eigen::MatrixXd& FeatureContext::velocities() {
    if (!vel_) {
        if (frames() < 3)
            throw InvalidArgument("velocity needs at least 3 frames");
        vel_ = first_difference(x_, 1.0 / rate_);
    }
    return *vel_;
}

const Eigen::MatrixXd& FeatureContext::accelerations() {
    if (!acc_) {
        if (frames() < 3)
            throw InvalidArgument("acceleration needs at least 3 frames");
        acc_ = second_difference(x_, 1.0 / rate_);
    }
    return *acc_;
}

const Eigen::MatrixXd& FeatureContext::jerks() {
    if (!jerk_) {
        if (frames() < 5)
            throw InvalidArgument("jerk needs at least 5 frames");
        jerk_ = third_difference(x_, 1.0 / rate_);
    }
    return *jerk_;
}

const AccelRig& FeatureContext::rig() {
    if (!rig_) {
        const auto& joints = res_.rig_joints;
        const Eigen::MatrixXd& v = velocities();
        const Eigen::MatrixXd& j = jerks();
        Eigen::MatrixXd rv(3 * static_cast<Index>(joints.size()), frames()), rj(rv.rows(), frames());
        for (std::size_t k = 0; k < joints.size(); ++k) {
            rv.middleRows(3 * static_cast<Index>(k), 3) = v.middleRows(3 * joints[k], 3);
            rj.middleRows(3 * static_cast<Index>(k), 3) = j.middleRows(3 * joints[k], 3);
        }
        rig_.emplace(std::move(rv), std::move(rj), rate_, res_.accel, positions_.time_of_index(0));
    }
    return *rig_;
}

std::unique_ptr<FeatureExtractor> make_extractor(const std::string& token, const FeatureResources& resources,
                                                 double frame_rate) {
    const auto colon = token.find(':');
    const std::string name = token.substr(0, colon);
    const std::string param = colon == std::string::npos ? "" : token.substr(colon + 1);
    const auto it = registry().find(name);
    if (it == registry().end())
        throw UnknownFeature("unknown feature '" + name + "'");
    if (colon != std::string::npos && param.empty())
        throw InvalidArgument("feature '" + token + "' has an empty parameter");
    if (!(frame_rate > 0.0))
        throw InvalidArgument("frame rate must be positive");
    return it->second(token, param, resources, frame_rate);
}

std::vector<std::string> feature_names() {
    std::vector<std::string> out;
    for (const auto& [name, factory] : registry())
        out.push_back(name);
    return out;
}

std::vector<std::string> split_feature_list(const std::string& list) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= list.size()) {
        const auto comma = std::min(list.find(',', pos), list.size());
        std::string item = list.substr(pos, comma - pos);
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (!item.empty())
            out.push_back(std::move(item));
        pos = comma + 1;
    }
    return out;
}

FeaturePipeline::FeaturePipeline(FeatureResources resources, const std::vector<std::string>& tokens,
                                 double frame_rate)
    : res_(std::move(resources)), rate_(frame_rate) {
    for (const auto& t : tokens)
        extractors_.push_back(make_extractor(t, res_, rate_));
}

Index FeaturePipeline::lookback() const {
    Index m = 0;
    for (const auto& e : extractors_)
        m = std::max(m, e->lookback());
    return m;
}

Index FeaturePipeline::lookahead() const {
    Index m = 0;
    for (const auto& e : extractors_)
        m = std::max(m, e->lookahead());
    return m;
}

bool FeaturePipeline::needs_rotations() const {
    return std::any_of(extractors_.begin(), extractors_.end(), [](const auto& e) { return e->needs_rotations(); });
}

void FeaturePipeline::reset() {
    for (auto& e : extractors_)
        e->reset();
}

void FeaturePipeline::evaluate(FeatureContext& ctx, Index i, std::vector<Eigen::VectorXd>& out) {
    out.resize(extractors_.size());
    for (std::size_t k = 0; k < extractors_.size(); ++k) {
        out[k].resize(extractors_[k]->dims());
        extractors_[k]->evaluate(ctx, i, out[k]);
    }
}

std::vector<FeatureSeries> FeaturePipeline::extract(const Series& positions, const Series* rotations) {
    if (needs_rotations() && !rotations)
        throw InvalidArgument("a selected feature needs joint rotations");
    if (positions.frame_rate() != rate_)
        throw InvalidArgument("track frame rate differs from the pipeline's");
    reset();
    FeatureContext ctx(res_, positions, rotations);
    std::vector<Eigen::MatrixXd> values;
    for (const auto& e : extractors_)
        values.emplace_back(e->dims(), positions.frames());
    std::vector<Eigen::VectorXd> frame;
    for (Index i = 0; i < positions.frames(); ++i) {
        evaluate(ctx, i, frame);
        for (std::size_t k = 0; k < frame.size(); ++k)
            values[k].col(i) = frame[k];
    }
    std::vector<FeatureSeries> out;
    for (std::size_t k = 0; k < extractors_.size(); ++k)
        out.push_back({extractors_[k]->name(), extractors_[k]->components(),
                       Series(std::move(values[k]), positions.time_model())});
    return out;
}

} // namespace moma
