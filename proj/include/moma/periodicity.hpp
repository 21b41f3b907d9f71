#pragma once

#include "moma/timed_series.hpp"

#include <optional>
#include <vector>

namespace moma {

enum class WindowFunction { Hann, Rectangular };

/// Analysis windows of `window` frames advanced by `hop` frames.
struct AnalysisGrid {
    Index window = 256;
    Index hop = 1;
    WindowFunction window_fn = WindowFunction::Hann;
    bool remove_mean = true;
};

/// Periodic raised-cosine (Hann) or flat weights of length n.
Eigen::VectorXd analysis_window(WindowFunction fn, Index n);

enum class CorrelogramKind { Autocorrelation, PowerSpectrum };

/**
 * One column per analysis window h = 0 .. (L - N) / H. Autocorrelation
 * columns hold lags 0..N, spectrum columns hold bins 0..N/2.
 */
struct CorrelogramArray {
    CorrelogramKind kind = CorrelogramKind::Autocorrelation;
    AnalysisGrid grid;
    double frame_rate = 1.0;
    Eigen::MatrixXd values;

    Index columns() const { return values.cols(); }
    Index rows() const { return values.rows(); }

    /// Autocorrelation columns divided by their lag-0 value, spectra by their maximum; all-zero columns stay zero.
    Eigen::MatrixXd normalized() const;
};

/// Autocorrelation of one weighted frame via a 2N-point DFT; returns lags 0..N.
Eigen::VectorXd frame_autocorrelation(const Eigen::Ref<const Eigen::VectorXd>& frame, const AnalysisGrid& grid);

/// |DFT|^2 of one weighted frame over N points; returns bins 0..N/2.
Eigen::VectorXd frame_power_spectrum(const Eigen::Ref<const Eigen::VectorXd>& frame, const AnalysisGrid& grid);

CorrelogramArray windowed_autocorrelation(const Eigen::Ref<const Eigen::VectorXd>& signal, double frame_rate,
                                          const AnalysisGrid& grid);
CorrelogramArray windowed_psd(const Eigen::Ref<const Eigen::VectorXd>& signal, double frame_rate,
                              const AnalysisGrid& grid);

/// Uses row `row` of a fixed-rate series as the signal.
CorrelogramArray windowed_autocorrelation(const Series& signal, const AnalysisGrid& grid, Index row = 0);
CorrelogramArray windowed_psd(const Series& signal, const AnalysisGrid& grid, Index row = 0);

/// Peak search region and criteria for period_from_peak.
struct PeakSearch {
    Index min_lag = 1;
    Index max_lag = 1;
    /// A peak must exceed its `neighbors` values on each side.
    Index neighbors = 2;
    /// Minimum normalized height, in [0, 1].
    double threshold = 0.0;
};

/// Lag range covering periods of 0.2 s to 5 s, clipped to what the array can hold.
PeakSearch default_peak_search(const CorrelogramArray& array, Index neighbors = 2, double threshold = 0.1);

/// Row of the highest qualifying peak in a column (ties: smallest row), or nullopt.
std::optional<Index> find_peak(const Eigen::Ref<const Eigen::VectorXd>& normalized_column, const PeakSearch& search);

/// Period in seconds for each column, nullopt where no peak qualifies.
std::vector<std::optional<double>> period_from_peak(const CorrelogramArray& array, const PeakSearch& search);

} // namespace moma
