#pragma once

#include "moma/timed_series.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace moma {

/**
 * Output of a feature extractor: a named scalar or vector time series.
 * Undefined values ("no period", airborne balance, singular space effort)
 * are stored as NaN.
 */
struct FeatureSeries {
    std::string name;
    /// Component suffixes; empty for a scalar feature.
    std::vector<std::string> components;
    Series values;

    Index frames() const { return values.frames(); }

    /// CSV/OSC column names: `name` for scalars, `name_<component>` otherwise.
    std::vector<std::string> column_names() const;
};

/// Header `time,<columns>`, one row per frame, shortest round-trip numbers, LF endings.
std::string export_feature_csv(const std::vector<FeatureSeries>& series);

struct CsvTable {
    std::vector<std::string> columns; ///< excludes the leading time column
    std::vector<double> times;
    Eigen::MatrixXd values; ///< columns x rows
};

CsvTable parse_feature_csv(std::string_view text);

} // namespace moma
