#include "moma/periodicity.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>

namespace moma {

namespace {

void check_grid(const AnalysisGrid& grid) {
    if (grid.window < 2)
        throw InvalidArgument("analysis window must span at least 2 frames");
    if (grid.hop < 1)
        throw InvalidArgument("analysis hop must be at least 1 frame");
}

Eigen::VectorXd weighted_frame(const Eigen::Ref<const Eigen::VectorXd>& frame, const AnalysisGrid& grid) {
    check_grid(grid);
    if (frame.size() != grid.window)
        throw DimensionError("frame length differs from the analysis window");
    Eigen::VectorXd x = frame;
    if (grid.remove_mean) {
        // a flat frame carries no periodicity; avoid rounding residue from the mean
        if (x.maxCoeff() == x.minCoeff())
            return Eigen::VectorXd::Zero(x.size());
        x.array() -= x.mean();
    }
    return x.cwiseProduct(analysis_window(grid.window_fn, grid.window));
}

std::vector<std::complex<double>> dft(const Eigen::VectorXd& x, Index points) {
    std::vector<std::complex<double>> in(static_cast<std::size_t>(points), 0.0), out;
    for (Index i = 0; i < x.size(); ++i)
        in[static_cast<std::size_t>(i)] = x[i];
    Eigen::FFT<double> fft;
    fft.fwd(out, in);
    return out;
}

template <typename FrameFn>
CorrelogramArray windowed(const Eigen::Ref<const Eigen::VectorXd>& signal, double frame_rate,
                          const AnalysisGrid& grid, CorrelogramKind kind, Index rows, FrameFn&& fn) {
    check_grid(grid);
    if (!(frame_rate > 0.0))
        throw InvalidArgument("frame rate must be positive");
    const Index length = signal.size();
    if (length < grid.window)
        throw InvalidArgument("signal of " + std::to_string(length) + " frames is shorter than the " +
                              std::to_string(grid.window) + "-frame analysis window");
    const Index cols = (length - grid.window) / grid.hop + 1;
    CorrelogramArray out;
    out.kind = kind;
    out.grid = grid;
    out.frame_rate = frame_rate;
    out.values.resize(rows, cols);
    for (Index h = 0; h < cols; ++h)
        out.values.col(h) = fn(signal.segment(h * grid.hop, grid.window), grid);
    return out;
}

Eigen::VectorXd series_row(const Series& s, Index row) {
    if (row < 0 || row >= s.dims())
        throw RangeError("signal row " + std::to_string(row) + " outside series");
    return s.matrix().row(row).transpose();
}

} // namespace

Eigen::VectorXd analysis_window(WindowFunction fn, Index n) {
    if (fn == WindowFunction::Rectangular)
        return Eigen::VectorXd::Ones(n);
    Eigen::VectorXd w(n);
    for (Index i = 0; i < n; ++i)
        w[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(i) / static_cast<double>(n));
    return w;
}

Eigen::MatrixXd CorrelogramArray::normalized() const {
    Eigen::MatrixXd out = values;
    for (Index c = 0; c < out.cols(); ++c) {
        const double scale = kind == CorrelogramKind::Autocorrelation ? values(0, c) : values.col(c).maxCoeff();
        if (scale > 0.0)
            out.col(c) /= scale;
        else
            out.col(c).setZero();
    }
    return out;
}

Eigen::VectorXd frame_autocorrelation(const Eigen::Ref<const Eigen::VectorXd>& frame, const AnalysisGrid& grid) {
    const Eigen::VectorXd x = weighted_frame(frame, grid);
    const Index n = grid.window;
    auto spectrum = dft(x, 2 * n);
    for (auto& c : spectrum)
        c = std::norm(c);
    std::vector<std::complex<double>> lags;
    Eigen::FFT<double> fft;
    fft.inv(lags, spectrum);
    Eigen::VectorXd r(n + 1);
    for (Index m = 0; m <= n; ++m)
        r[m] = lags[static_cast<std::size_t>(m)].real();
    return r;
}

Eigen::VectorXd frame_power_spectrum(const Eigen::Ref<const Eigen::VectorXd>& frame, const AnalysisGrid& grid) {
    const Eigen::VectorXd x = weighted_frame(frame, grid);
    const Index n = grid.window;
    const auto spectrum = dft(x, n);
    Eigen::VectorXd s(n / 2 + 1);
    for (Index k = 0; k <= n / 2; ++k)
        s[k] = std::norm(spectrum[static_cast<std::size_t>(k)]);
    return s;
}

CorrelogramArray windowed_autocorrelation(const Eigen::Ref<const Eigen::VectorXd>& signal, double frame_rate,
                                          const AnalysisGrid& grid) {
    return windowed(signal, frame_rate, grid, CorrelogramKind::Autocorrelation, grid.window + 1,
                    frame_autocorrelation);
}

CorrelogramArray windowed_psd(const Eigen::Ref<const Eigen::VectorXd>& signal, double frame_rate,
                              const AnalysisGrid& grid) {
    return windowed(signal, frame_rate, grid, CorrelogramKind::PowerSpectrum, grid.window / 2 + 1,
                    frame_power_spectrum);
}

CorrelogramArray windowed_autocorrelation(const Series& signal, const AnalysisGrid& grid, Index row) {
    return windowed_autocorrelation(series_row(signal, row), signal.frame_rate(), grid);
}

CorrelogramArray windowed_psd(const Series& signal, const AnalysisGrid& grid, Index row) {
    return windowed_psd(series_row(signal, row), signal.frame_rate(), grid);
}

PeakSearch default_peak_search(const CorrelogramArray& array, Index neighbors, double threshold) {
    PeakSearch s;
    s.neighbors = neighbors;
    s.threshold = threshold;
    const Index last = array.rows() - neighbors - 1;
    if (array.kind == CorrelogramKind::Autocorrelation) {
        s.min_lag = static_cast<Index>(std::ceil(0.2 * array.frame_rate));
        s.max_lag = static_cast<Index>(std::floor(5.0 * array.frame_rate));
    } else {
        // bin k has period N / (k * rate)
        const double n = static_cast<double>(array.grid.window);
        s.min_lag = static_cast<Index>(std::ceil(n / (5.0 * array.frame_rate)));
        s.max_lag = static_cast<Index>(std::floor(n / (0.2 * array.frame_rate)));
    }
    s.min_lag = std::max({s.min_lag, neighbors, Index{1}});
    s.max_lag = std::min(s.max_lag, last);
    return s;
}

std::optional<Index> find_peak(const Eigen::Ref<const Eigen::VectorXd>& col, const PeakSearch& s) {
    std::optional<Index> best;
    for (Index m = s.min_lag; m <= s.max_lag; ++m) {
        const double v = col[m];
        if (!(v > s.threshold))
            continue;
        bool peak = true;
        for (Index d = 1; d <= s.neighbors && peak; ++d)
            peak = v > col[m - d] && v > col[m + d];
        if (peak && (!best || v > col[*best]))
            best = m;
    }
    return best;
}

std::vector<std::optional<double>> period_from_peak(const CorrelogramArray& array, const PeakSearch& s) {
    if (s.neighbors < 1)
        throw InvalidArgument("peak search needs at least one neighbour per side");
    if (s.min_lag < s.neighbors || s.max_lag > array.rows() - s.neighbors - 1 || s.min_lag > s.max_lag)
        throw InvalidArgument("invalid lag range [" + std::to_string(s.min_lag) + ", " + std::to_string(s.max_lag) +
                              "] for " + std::to_string(array.rows()) + " rows and " + std::to_string(s.neighbors) +
                              " neighbours");
    if (array.kind == CorrelogramKind::PowerSpectrum && s.min_lag < 1)
        throw InvalidArgument("spectral peak search cannot include bin 0");

    const Eigen::MatrixXd norm = array.normalized();
    std::vector<std::optional<double>> periods;
    periods.reserve(static_cast<std::size_t>(array.columns()));
    for (Index c = 0; c < array.columns(); ++c) {
        const auto peak = find_peak(norm.col(c), s);
        if (!peak) {
            periods.emplace_back();
        } else if (array.kind == CorrelogramKind::Autocorrelation) {
            periods.emplace_back(static_cast<double>(*peak) / array.frame_rate);
        } else {
            periods.emplace_back(static_cast<double>(array.grid.window) /
                                 (static_cast<double>(*peak) * array.frame_rate));
        }
    }
    return periods;
}

} // namespace moma
