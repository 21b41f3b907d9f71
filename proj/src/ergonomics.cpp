#include "moma/ergonomics.hpp"

#include "moma/text.hpp"

#include <algorithm>
#include <cmath>

namespace moma {

NaturalCubicSpline::NaturalCubicSpline(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    if (x_.empty())
        throw InvalidArgument("spline needs at least one knot");
    if (x_.size() != y_.size())
        throw DimensionError("spline knot angles and scores differ in count");
    for (std::size_t i = 1; i < x_.size(); ++i)
        if (!(x_[i] > x_[i - 1]))
            throw InvalidArgument("spline knot angles must be strictly increasing");

    const std::size_t n = x_.size();
    m_.assign(n, 0.0);
    if (n < 3)
        return;

    // Thomas algorithm on the interior second-derivative system.
    const std::size_t k = n - 2;
    std::vector<double> diag(k), upper(k), rhs(k);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double h0 = x_[i] - x_[i - 1];
        const double h1 = x_[i + 1] - x_[i];
        diag[i - 1] = 2.0 * (h0 + h1);
        upper[i - 1] = h1;
        rhs[i - 1] = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
    }
    for (std::size_t i = 1; i < k; ++i) {
        const double lower = x_[i + 1] - x_[i]; // h_{i}, sub-diagonal of row i
        const double w = lower / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    m_[k] = rhs[k - 1] / diag[k - 1];
    for (std::size_t i = k - 1; i-- > 0;)
        m_[i + 1] = (rhs[i] - upper[i] * m_[i + 2]) / diag[i];
}

double NaturalCubicSpline::operator()(double x) const {
    if (x <= x_.front())
        return y_.front();
    if (x >= x_.back())
        return y_.back();
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
    const double h = x_[i + 1] - x_[i];
    const double t = x - x_[i];
    const double b = (y_[i + 1] - y_[i]) / h - h * (2.0 * m_[i] + m_[i + 1]) / 6.0;
    const double c = m_[i] / 2.0;
    const double d = (m_[i + 1] - m_[i]) / (6.0 * h);
    return y_[i] + t * (b + t * (c + t * d));
}

DiscomfortTable DiscomfortTable::parse(std::string_view text, const SkeletonTopology& topology) {
    std::vector<JointDiscomfort> joints;
    std::vector<double> xs, ys;
    bool in_dof = false;
    Axis dof_axis = Axis::X;
    int line_no = 0;

    auto close_dof = [&](int line) {
        if (!in_dof)
            return;
        if (xs.empty())
            throw ParseError("dof without knots", line);
        try {
            joints.back().dofs.push_back({dof_axis, NaturalCubicSpline(std::move(xs), std::move(ys))});
        } catch (const Error& e) {
            throw ParseError(e.what(), line);
        }
        xs.clear();
        ys.clear();
        in_dof = false;
    };

    for (auto line : split_lines(text)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        const auto w = split_whitespace(line);
        if (w.empty())
            continue;
        if (w[0] == "joint") {
            close_dof(line_no);
            if (w.size() != 3)
                throw ParseError("expected 'joint <name> <euler-order>'", line_no);
            const auto node = topology.find(w[1]);
            if (!node)
                throw ParseError("unknown joint '" + std::string(w[1]) + "'", line_no);
            JointDiscomfort j;
            j.joint = std::string(w[1]);
            j.node = *node;
            try {
                j.order = AxisOrder::parse(w[2]);
            } catch (const Error& e) {
                throw ParseError(e.what(), line_no);
            }
            joints.push_back(std::move(j));
        } else if (w[0] == "dof") {
            close_dof(line_no);
            if (joints.empty())
                throw ParseError("dof before any joint", line_no);
            if (w.size() != 2 || w[1].size() != 1 || (w[1][0] < 'X' || w[1][0] > 'Z'))
                throw ParseError("expected 'dof <X|Y|Z>'", line_no);
            dof_axis = static_cast<Axis>(w[1][0] - 'X');
            in_dof = true;
        } else {
            if (!in_dof)
                throw ParseError("knot outside a dof block", line_no);
            if (w.size() != 2)
                throw ParseError("knot line needs 'angle score'", line_no);
            const double score = parse_number(w[1], line_no);
            if (score < 0.0)
                throw ParseError("discomfort scores must be non-negative", line_no);
            xs.push_back(parse_number(w[0], line_no));
            ys.push_back(score);
        }
    }
    close_dof(line_no);
    for (const auto& j : joints)
        if (j.dofs.empty())
            throw ParseError("joint '" + j.joint + "' has no dof blocks");
    return DiscomfortTable(std::move(joints));
}

const JointDiscomfort& DiscomfortTable::joint(std::string_view name) const {
    for (const auto& j : joints_)
        if (j.joint == name)
            return j;
    throw InvalidArgument("joint '" + std::string(name) + "' missing from discomfort table");
}

double dof_angle(const Eigen::Quaterniond& q, const AxisOrder& order, Axis axis) {
    const Eigen::Vector3d angles = quaternion_to_euler(q, order);
    for (int i = 0; i < 3; ++i)
        if (order.axes[static_cast<std::size_t>(i)] == axis)
            return angles[i];
    throw InvalidArgument("axis not part of the Euler order");
}

double joint_stress(std::span<const Eigen::Quaterniond> local_rotations, const JointDiscomfort& joint) {
    if (joint.node < 0 || joint.node >= static_cast<Index>(local_rotations.size()))
        throw RangeError("joint '" + joint.joint + "' outside the rotation frame");
    const Eigen::Quaterniond q = checked_unit(local_rotations[static_cast<std::size_t>(joint.node)]);
    double total = 0.0;
    for (const auto& dof : joint.dofs)
        total += dof_discomfort(dof_angle(q, joint.order, dof.axis), dof.curve);
    return total;
}

double joint_stress(std::span<const Eigen::Quaterniond> local_rotations, std::string_view joint,
                    const DiscomfortTable& table) {
    return joint_stress(local_rotations, table.joint(joint));
}

double postural_load(std::span<const Eigen::Quaterniond> local_rotations, const DiscomfortTable& table) {
    if (table.empty())
        throw InvalidArgument("empty discomfort table");
    double total = 0.0;
    for (const auto& j : table.joints())
        total += joint_stress(local_rotations, j);
    return total;
}

SpherenessSample sphereness(const Eigen::Matrix3Xd& frame, std::span<const Index> end_effectors,
                            const Eigen::Vector3d& com) {
    if (end_effectors.empty())
        throw InvalidArgument("sphereness needs at least one end effector");
    const double count = static_cast<double>(end_effectors.size());
    std::vector<double> d;
    d.reserve(end_effectors.size());
    for (Index node : end_effectors) {
        if (node < 0 || node >= frame.cols())
            throw RangeError("end effector " + std::to_string(node) + " is not a node");
        d.push_back((frame.col(node) - com).norm());
    }
    SpherenessSample s;
    for (double v : d)
        s.radius += v;
    s.radius /= count;
    double var = 0.0;
    for (double v : d)
        var += (v - s.radius) * (v - s.radius);
    s.deviation = std::sqrt(var / count);
    return s;
}

} // namespace moma
