#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace moma {

/// An annotated time interval, as stored in .lab files.
struct Label {
    double start = 0.0;
    double end = 0.0;
    std::string name;

    bool operator==(const Label&) const = default;
};

/// Parses `start end name` lines; blank lines are skipped. Result is sorted by start.
std::vector<Label> read_labels(std::string_view text);

/// Canonical form: one `start end name` line per label, shortest round-trip numbers, LF endings.
std::string write_labels(const std::vector<Label>& labels);

} // namespace moma
