#include "moma/recognition.hpp"

#include "moma/kinematics.hpp"
#include "moma/text.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace moma {

std::string_view to_string(RelationKind kind) {
    switch (kind) {
    case RelationKind::PlaneSide: return "plane_side";
    case RelationKind::DistanceBelow: return "distance_below";
    case RelationKind::AngleBelow: return "angle_below";
    case RelationKind::SpeedAbove: return "speed_above";
    }
    return "?";
}

Index relation_arity(RelationKind kind) {
    switch (kind) {
    case RelationKind::PlaneSide: return 4;
    case RelationKind::DistanceBelow: return 2;
    case RelationKind::AngleBelow: return 4;
    case RelationKind::SpeedAbove: return 1;
    }
    return 0;
}

namespace {

bool above_kind(RelationKind k) { return k == RelationKind::PlaneSide || k == RelationKind::SpeedAbove; }

void validate(const RelationalFeatureDef& def) {
    if (static_cast<Index>(def.nodes.size()) != relation_arity(def.kind))
        throw InvalidArgument(std::string(to_string(def.kind)) + " takes " +
                              std::to_string(relation_arity(def.kind)) + " nodes");
    if (above_kind(def.kind) ? def.off > def.on : def.off < def.on)
        throw InvalidArgument(std::string(to_string(def.kind)) + " hysteresis band is inverted");
}

} // namespace

std::vector<RelationalFeatureDef> parse_feature_set(std::string_view text, const SkeletonTopology& topology) {
    std::vector<RelationalFeatureDef> defs;
    int line_no = 0;
    for (auto line : split_lines(text)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        const auto w = split_whitespace(line);
        if (w.empty())
            continue;
        RelationalFeatureDef def;
        if (w[0] == "plane_side")
            def.kind = RelationKind::PlaneSide;
        else if (w[0] == "distance_below")
            def.kind = RelationKind::DistanceBelow;
        else if (w[0] == "angle_below")
            def.kind = RelationKind::AngleBelow;
        else if (w[0] == "speed_above")
            def.kind = RelationKind::SpeedAbove;
        else
            throw ParseError("unknown relational feature kind '" + std::string(w[0]) + "'", line_no);

        const auto arity = static_cast<std::size_t>(relation_arity(def.kind));
        if (w.size() != 1 + arity + 1 && w.size() != 1 + arity + 2)
            throw ParseError(std::string(w[0]) + " expects " + std::to_string(arity) + " nodes and 1 or 2 thresholds",
                             line_no);
        for (std::size_t i = 0; i < arity; ++i) {
            const auto node = topology.find(w[1 + i]);
            if (!node)
                throw ParseError("unknown node '" + std::string(w[1 + i]) + "'", line_no);
            def.nodes.push_back(*node);
        }
        def.on = parse_number(w[1 + arity], line_no);
        def.off = w.size() == 3 + arity ? parse_number(w[2 + arity], line_no) : def.on;
        try {
            validate(def);
        } catch (const Error& e) {
            throw ParseError(e.what(), line_no);
        }
        defs.push_back(std::move(def));
    }
    return defs;
}

double relation_value(const RelationalFeatureDef& def, const Eigen::Matrix3Xd& frame,
                      const Eigen::Matrix3Xd& velocity) {
    for (Index n : def.nodes)
        if (n < 0 || n >= frame.cols())
            throw RangeError("relational feature references unknown node " + std::to_string(n));
    const auto p = [&](std::size_t i) { return frame.col(def.nodes[i]); };
    switch (def.kind) {
    case RelationKind::PlaneSide: {
        const Eigen::Vector3d normal = (p(1) - p(0)).cross(p(2) - p(0));
        const double len = normal.norm();
        if (len == 0.0)
            return 0.0;
        return normal.dot(p(3) - p(0)) / len;
    }
    case RelationKind::DistanceBelow:
        return (p(1) - p(0)).norm();
    case RelationKind::AngleBelow: {
        const Eigen::Vector3d u = p(1) - p(0);
        const Eigen::Vector3d v = p(3) - p(2);
        const double denom = u.norm() * v.norm();
        if (denom == 0.0)
            return 0.0;
        return std::acos(std::clamp(u.dot(v) / denom, -1.0, 1.0)) * 180.0 / M_PI;
    }
    case RelationKind::SpeedAbove:
        if (def.nodes[0] >= velocity.cols())
            throw InvalidArgument("speed feature evaluated without velocities");
        return velocity.col(def.nodes[0]).norm();
    }
    return 0.0;
}

FeatureMatrix relational_features(const Series& positions, const std::vector<RelationalFeatureDef>& defs) {
    for (const auto& d : defs)
        validate(d);
    const Index frames = positions.frames();
    const Index nodes = positions.dims() / 3;
    const bool needs_speed = std::any_of(defs.begin(), defs.end(),
                                         [](const auto& d) { return d.kind == RelationKind::SpeedAbove; });
    Eigen::MatrixXd vel;
    if (needs_speed)
        vel = velocities(positions).values.matrix();

    FeatureMatrix out(static_cast<Index>(defs.size()), frames);
    std::vector<std::uint8_t> state(defs.size(), 0);
    const Eigen::MatrixXd x = positions.matrix();
    Eigen::Matrix3Xd v_frame(3, needs_speed ? nodes : 0);
    for (Index f = 0; f < frames; ++f) {
        const Eigen::Matrix3Xd frame = Eigen::Map<const Eigen::Matrix3Xd>(x.col(f).data(), 3, nodes);
        if (needs_speed)
            v_frame = Eigen::Map<const Eigen::Matrix3Xd>(vel.col(f).data(), 3, nodes);
        for (std::size_t d = 0; d < defs.size(); ++d) {
            const auto& def = defs[d];
            const double v = relation_value(def, frame, v_frame);
            if (above_kind(def.kind)) {
                if (v > def.on)
                    state[d] = 1;
                else if (v <= def.off)
                    state[d] = 0;
            } else {
                if (v < def.on)
                    state[d] = 1;
                else if (v >= def.off)
                    state[d] = 0;
            }
            out(static_cast<Index>(d), f) = state[d];
        }
    }
    return out;
}

std::vector<std::vector<Run>> segment_encode(const FeatureMatrix& m) {
    std::vector<std::vector<Run>> rows(static_cast<std::size_t>(m.rows()));
    for (Index r = 0; r < m.rows(); ++r) {
        auto& runs = rows[static_cast<std::size_t>(r)];
        for (Index f = 0; f < m.cols(); ++f) {
            if (!runs.empty() && runs.back().value == m(r, f))
                ++runs.back().length;
            else
                runs.push_back({m(r, f), f, 1});
        }
    }
    return rows;
}

FeatureMatrix segment_decode(const std::vector<std::vector<Run>>& runs) {
    Index frames = 0;
    if (!runs.empty())
        for (const auto& r : runs.front())
            frames += r.length;
    FeatureMatrix m(static_cast<Index>(runs.size()), frames);
    for (std::size_t r = 0; r < runs.size(); ++r) {
        Index f = 0;
        for (const auto& run : runs[r]) {
            if (run.start != f || f + run.length > frames)
                throw InvalidArgument("run-length rows are not contiguous or differ in length");
            m.row(static_cast<Index>(r)).segment(f, run.length).setConstant(run.value);
            f += run.length;
        }
        if (f != frames)
            throw InvalidArgument("run-length rows differ in length");
    }
    return m;
}

std::string write_template(const MotionTemplate& t) {
    std::string out = std::to_string(t.features()) + " " + std::to_string(t.frames()) + " " +
                      format_number(t.tau_lo) + " " + format_number(t.tau_hi) + "\n";
    for (Index r = 0; r < t.features(); ++r) {
        for (Index c = 0; c < t.frames(); ++c) {
            if (c > 0)
                out += ' ';
            out += format_number(t.values(r, c));
        }
        out += '\n';
    }
    return out;
}

MotionTemplate read_template(std::string_view text) {
    const auto lines = split_lines(text);
    std::size_t i = 0;
    auto next = [&]() {
        while (i < lines.size()) {
            auto w = split_whitespace(lines[i++]);
            if (!w.empty())
                return w;
        }
        throw ParseError("truncated template", static_cast<int>(i));
    };
    const auto header = next();
    if (header.size() != 4)
        throw ParseError("template header must be 'F K tau_lo tau_hi'", static_cast<int>(i));
    const double f = parse_number(header[0], static_cast<int>(i));
    const double k = parse_number(header[1], static_cast<int>(i));
    if (f < 1 || k < 1 || f != std::floor(f) || k != std::floor(k))
        throw ParseError("template dimensions must be positive integers", static_cast<int>(i));
    MotionTemplate t;
    t.tau_lo = parse_number(header[2], static_cast<int>(i));
    t.tau_hi = parse_number(header[3], static_cast<int>(i));
    t.values.resize(static_cast<Index>(f), static_cast<Index>(k));
    for (Index r = 0; r < t.values.rows(); ++r) {
        const auto row = next();
        if (static_cast<Index>(row.size()) != t.values.cols())
            throw ParseError("template row has the wrong number of values", static_cast<int>(i));
        for (Index c = 0; c < t.values.cols(); ++c) {
            const double v = parse_number(row[static_cast<std::size_t>(c)], static_cast<int>(i));
            if (!(v >= 0.0 && v <= 1.0))
                throw ParseError("template values must lie in [0, 1]", static_cast<int>(i));
            t.values(r, c) = v;
        }
    }
    return t;
}

double column_distance(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b) {
    return (a - b).cwiseAbs().mean();
}

std::vector<std::pair<Index, Index>> dtw_path(const Eigen::MatrixXd& ref, const Eigen::MatrixXd& other) {
    if (ref.rows() != other.rows())
        throw DimensionError("DTW sequences differ in feature count");
    const Index n = ref.cols(), m = other.cols();
    if (n == 0 || m == 0)
        throw InvalidArgument("DTW needs non-empty sequences");
    const double inf = std::numeric_limits<double>::infinity();
    Eigen::MatrixXd acc = Eigen::MatrixXd::Constant(n, m, inf);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < m; ++j) {
            const double c = column_distance(ref.col(i), other.col(j));
            if (i == 0 && j == 0) {
                acc(i, j) = c;
                continue;
            }
            double best = inf;
            if (i > 0 && j > 0)
                best = acc(i - 1, j - 1);
            if (i > 0)
                best = std::min(best, acc(i - 1, j));
            if (j > 0)
                best = std::min(best, acc(i, j - 1));
            acc(i, j) = c + best;
        }

    std::vector<std::pair<Index, Index>> path{{n - 1, m - 1}};
    Index i = n - 1, j = m - 1;
    while (i > 0 || j > 0) {
        if (i == 0) {
            --j;
        } else if (j == 0) {
            --i;
        } else {
            const double diag = acc(i - 1, j - 1), up = acc(i - 1, j), left = acc(i, j - 1);
            if (diag <= up && diag <= left) {
                --i;
                --j;
            } else if (up <= left) {
                --i;
            } else {
                --j;
            }
        }
        path.emplace_back(i, j);
    }
    std::reverse(path.begin(), path.end());
    return path;
}

MotionTemplate build_template(const std::vector<FeatureMatrix>& executions, double tau_lo, double tau_hi) {
    if (executions.empty())
        throw InvalidArgument("a template needs at least one execution");
    if (!(0.0 <= tau_lo && tau_lo <= tau_hi && tau_hi <= 1.0))
        throw InvalidArgument("uncertainty bounds must satisfy 0 <= tau_lo <= tau_hi <= 1");
    const Eigen::MatrixXd ref = executions.front().cast<double>();
    if (ref.cols() == 0)
        throw InvalidArgument("reference execution is empty");
    Eigen::MatrixXd sum = ref;
    for (std::size_t e = 1; e < executions.size(); ++e) {
        if (executions[e].rows() != ref.rows())
            throw DimensionError("execution " + std::to_string(e) + " has " + std::to_string(executions[e].rows()) +
                                 " features, expected " + std::to_string(ref.rows()));
        const Eigen::MatrixXd other = executions[e].cast<double>();
        Eigen::MatrixXd aligned = Eigen::MatrixXd::Zero(ref.rows(), ref.cols());
        Eigen::VectorXd hits = Eigen::VectorXd::Zero(ref.cols());
        for (const auto& [i, j] : dtw_path(ref, other)) {
            aligned.col(i) += other.col(j);
            hits[i] += 1.0;
        }
        for (Index i = 0; i < ref.cols(); ++i)
            sum.col(i) += aligned.col(i) / hits[i];
    }
    MotionTemplate t;
    t.values = sum / static_cast<double>(executions.size());
    t.tau_lo = tau_lo;
    t.tau_hi = tau_hi;
    return t;
}

MatchCurve subsequence_distance(const MotionTemplate& tmpl, const Eigen::MatrixXd& motion) {
    const Index k_len = tmpl.frames(), l_len = motion.cols(), feats = tmpl.features();
    if (motion.rows() != feats)
        throw DimensionError("motion has " + std::to_string(motion.rows()) + " features, template has " +
                             std::to_string(feats));
    if (l_len < 1 || k_len < 1)
        throw InvalidArgument("template and motion must be non-empty");

    // certain rows of each template column
    std::vector<std::vector<Index>> rows(static_cast<std::size_t>(k_len));
    for (Index k = 0; k < k_len; ++k) {
        for (Index f = 0; f < feats; ++f)
            if (!tmpl.uncertain(f, k))
                rows[static_cast<std::size_t>(k)].push_back(f);
        if (rows[static_cast<std::size_t>(k)].empty())
            throw InvalidArgument("template column " + std::to_string(k) + " has every row masked as uncertain");
    }
    auto cost = [&](Index k, Index l) {
        const auto& r = rows[static_cast<std::size_t>(k)];
        double s = 0.0;
        for (Index f : r)
            s += std::abs(tmpl.values(f, k) - motion(f, l));
        return s / static_cast<double>(r.size());
    };

    // rolling DP over template frames: accumulated cost, path length, start frame
    Eigen::VectorXd acc(l_len), len(l_len), prev_acc(l_len), prev_len(l_len);
    std::vector<Index> start(static_cast<std::size_t>(l_len)), prev_start(start);
    for (Index l = 0; l < l_len; ++l) {
        acc[l] = cost(0, l);
        len[l] = 1;
        start[static_cast<std::size_t>(l)] = l;
    }
    for (Index k = 1; k < k_len; ++k) {
        std::swap(acc, prev_acc);
        std::swap(len, prev_len);
        std::swap(start, prev_start);
        for (Index l = 0; l < l_len; ++l) {
            const auto ul = static_cast<std::size_t>(l);
            // candidates in tie order: diagonal, vertical, horizontal
            double best = prev_acc[l];
            double best_len = prev_len[l];
            Index best_start = prev_start[ul];
            if (l > 0) {
                if (prev_acc[l - 1] <= best) {
                    best = prev_acc[l - 1];
                    best_len = prev_len[l - 1];
                    best_start = prev_start[ul - 1];
                }
                if (acc[l - 1] < best) {
                    best = acc[l - 1];
                    best_len = len[l - 1];
                    best_start = start[ul - 1];
                }
            }
            acc[l] = cost(k, l) + best;
            len[l] = best_len + 1;
            start[ul] = best_start;
        }
    }

    MatchCurve curve;
    curve.distance = acc.cwiseQuotient(len);
    curve.start = std::move(start);
    return curve;
}

std::vector<Detection> detect(const MatchCurve& curve, double threshold, Index merge_gap) {
    const Index n = curve.distance.size();
    const bool has_start = static_cast<Index>(curve.start.size()) == n;
    std::vector<Detection> found;
    for (Index i = 0; i < n;) {
        if (!(curve.distance[i] < threshold)) {
            ++i;
            continue;
        }
        Index j = i, best = i;
        while (j < n && curve.distance[j] < threshold) {
            if (curve.distance[j] < curve.distance[best])
                best = j;
            ++j;
        }
        Index first = i;
        if (has_start)
            first = std::min(first, curve.start[static_cast<std::size_t>(best)]);
        found.push_back({first, j - 1});
        i = j;
    }

    std::vector<Detection> merged;
    for (const auto& d : found) {
        if (!merged.empty() && d.first - merged.back().last - 1 < merge_gap)
            merged.back().last = std::max(merged.back().last, d.last);
        else
            merged.push_back(d);
    }
    return merged;
}

std::vector<Label> detections_to_labels(const std::vector<Detection>& detections, double frame_rate,
                                        const std::string& name, double start_time) {
    std::vector<Label> labels;
    for (const auto& d : detections)
        labels.push_back({start_time + static_cast<double>(d.first) / frame_rate,
                          start_time + static_cast<double>(d.last) / frame_rate, name});
    return labels;
}

} // namespace moma
