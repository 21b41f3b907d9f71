#include "moma/feature_series.hpp"

#include "moma/text.hpp"

namespace moma {

std::vector<std::string> FeatureSeries::column_names() const {
    if (components.empty())
        return {name};
    std::vector<std::string> out;
    out.reserve(components.size());
    for (const auto& c : components)
        out.push_back(name + "_" + c);
    return out;
}

std::string export_feature_csv(const std::vector<FeatureSeries>& series) {
    if (series.empty())
        throw InvalidArgument("no feature series to export");
    const Series& ref = series.front().values;
    for (const auto& s : series) {
        if (s.frames() != ref.frames())
            throw DimensionError("feature '" + s.name + "' has " + std::to_string(s.frames()) +
                                 " frames, expected " + std::to_string(ref.frames()));
        for (Index f = 0; f < s.frames(); ++f)
            if (s.values.time_of_index(f) != ref.time_of_index(f))
                throw TimeOrderError("feature '" + s.name + "' is sampled at different times");
        const Index expected = s.components.empty() ? 1 : static_cast<Index>(s.components.size());
        if (s.values.dims() != expected)
            throw DimensionError("feature '" + s.name + "' column names disagree with its dimension");
    }

    std::string out = "time";
    for (const auto& s : series)
        for (const auto& c : s.column_names()) {
            out += ',';
            out += c;
        }
    out += '\n';

    for (Index f = 0; f < ref.frames(); ++f) {
        out += format_number(ref.time_of_index(f));
        for (const auto& s : series)
            for (Index d = 0; d < s.values.dims(); ++d) {
                out += ',';
                out += format_number(s.values(d, f));
            }
        out += '\n';
    }
    return out;
}

CsvTable parse_feature_csv(std::string_view text) {
    const auto lines = split_lines(text);
    if (lines.empty())
        throw ParseError("empty CSV");

    auto split_fields = [](std::string_view line) {
        std::vector<std::string_view> fields;
        std::size_t start = 0;
        while (true) {
            const auto comma = line.find(',', start);
            fields.push_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
            if (comma == std::string_view::npos)
                break;
            start = comma + 1;
        }
        return fields;
    };

    const auto header = split_fields(lines[0]);
    if (header.empty() || header[0] != "time")
        throw ParseError("CSV header must start with 'time'", 1);

    CsvTable table;
    for (std::size_t i = 1; i < header.size(); ++i)
        table.columns.emplace_back(header[i]);

    std::vector<std::vector<double>> rows;
    for (std::size_t l = 1; l < lines.size(); ++l) {
        if (lines[l].empty())
            continue;
        const int line_no = static_cast<int>(l + 1);
        const auto fields = split_fields(lines[l]);
        if (fields.size() != header.size())
            throw ParseError("row width differs from header", line_no);
        table.times.push_back(parse_number(fields[0], line_no));
        std::vector<double> row;
        for (std::size_t i = 1; i < fields.size(); ++i)
            row.push_back(parse_number(fields[i], line_no));
        rows.push_back(std::move(row));
    }

    table.values.resize(static_cast<Index>(table.columns.size()), static_cast<Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            table.values(static_cast<Index>(c), static_cast<Index>(r)) = rows[r][c];
    return table;
}

} // namespace moma
