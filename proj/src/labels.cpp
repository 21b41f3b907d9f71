#include "moma/labels.hpp"

#include "moma/error.hpp"
#include "moma/text.hpp"

#include <algorithm>

namespace moma {

std::vector<Label> read_labels(std::string_view text) {
    std::vector<Label> labels;
    int line_no = 0;
    for (auto line : split_lines(text)) {
        ++line_no;
        const auto words = split_whitespace(line);
        if (words.empty())
            continue;
        if (words.size() != 3)
            throw ParseError("label line needs 'start end name'", line_no);
        Label l{parse_number(words[0], line_no), parse_number(words[1], line_no), std::string(words[2])};
        if (!std::isfinite(l.start) || !std::isfinite(l.end))
            throw ParseError("label times must be finite", line_no);
        if (l.start < 0.0)
            throw ParseError("label starts before 0", line_no);
        if (l.end < l.start)
            throw ParseError("label ends before it starts", line_no);
        labels.push_back(std::move(l));
    }
    std::stable_sort(labels.begin(), labels.end(),
                     [](const Label& a, const Label& b) { return a.start < b.start; });
    return labels;
}

std::string write_labels(const std::vector<Label>& labels) {
    std::string out;
    for (const auto& l : labels) {
        if (l.name.empty() || l.name.find_first_of(" \t\r\n") != std::string::npos)
            throw InvalidArgument("label name must be a non-empty token without whitespace");
        if (l.start < 0.0 || l.end < l.start)
            throw InvalidArgument("label interval must satisfy 0 <= start <= end");
        out += format_number(l.start);
        out += ' ';
        out += format_number(l.end);
        out += ' ';
        out += l.name;
        out += '\n';
    }
    return out;
}

} // namespace moma
