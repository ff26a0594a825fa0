#include "embedcast/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "embedcast/error.hpp"

namespace embedcast {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) out.push_back(trim(field));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::size_t parse_index(const std::string& s, const std::string& whole) {
    std::size_t v = 0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || ptr != end || s.empty())
        throw ValidationError("bad row range '" + whole + "'");
    return v;
}

}  // namespace

std::vector<TimeIndex> parse_row_ranges(const std::string& text) {
    std::vector<TimeIndex> out;
    std::istringstream in(text);
    std::string part;
    while (std::getline(in, part, ',')) {
        part = trim(part);
        if (part.empty()) continue;
        const auto dash = part.find('-');
        const std::size_t lo = parse_index(trim(part.substr(0, dash)), text);
        const std::size_t hi = dash == std::string::npos ? lo : parse_index(trim(part.substr(dash + 1)), text);
        if (hi < lo) throw ValidationError("descending row range '" + part + "'");
        for (std::size_t t = lo; t <= hi; ++t) out.push_back(t);
    }
    std::sort(out.begin(), out.end());
    if (std::adjacent_find(out.begin(), out.end()) != out.end())
        throw ValidationError("overlapping row ranges '" + text + "'");
    return out;
}

std::string format_row_ranges(const std::vector<TimeIndex>& rows) {
    std::string out;
    for (std::size_t i = 0; i < rows.size();) {
        std::size_t j = i;
        while (j + 1 < rows.size() && rows[j + 1] == rows[j] + 1) ++j;
        if (!out.empty()) out += ',';
        out += rows[i] == rows[j] ? std::to_string(rows[i]) : fmt::format("{}-{}", rows[i], rows[j]);
        i = j + 1;
    }
    return out;
}

std::vector<std::string> flood_columns() {
    return {"Q", "US1", "US2", "US3", "RG1", "RG2", "RG3", "RG4", "RG5"};
}

TimeSeriesSet ingest_csv(const std::filesystem::path& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) fail(ErrorKind::ParseError, path.string() + ": missing header row");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

    TimeSeriesSet out;
    out.names = split_fields(line);
    for (std::size_t c = 0; c < out.names.size(); ++c)
        if (out.names[c].empty())
            fail(ErrorKind::ParseError, fmt::format("{}: empty column name at (row 1, col {})", path.string(), c + 1));
    out.values.assign(out.names.size(), {});
    out.sample_period = schema.sample_period;

    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != out.names.size())
            fail(ErrorKind::ParseError, fmt::format("{}: row {} has {} fields, header has {}", path.string(), row,
                                                    fields.size(), out.names.size()));
        for (std::size_t c = 0; c < fields.size(); ++c) {
            const auto& f = fields[c];
            double v = 0.0;
            const auto* end = f.data() + f.size();
            auto [ptr, ec] = std::from_chars(f.data(), end, v);
            if (f.empty() || ec != std::errc{} || ptr != end || !std::isfinite(v))
                fail(ErrorKind::ParseError,
                     fmt::format("{}: non-numeric cell '{}' at (row {}, col {})", path.string(), f, row, c + 1));
            out.values[c].push_back(v);
        }
    }

    auto require = [&](const std::string& name) {
        if (!out.index_of(name)) fail(ErrorKind::MissingColumn, "column '" + name + "' not found in " + path.string());
    };
    for (const auto& name : schema.required) require(name);
    require(schema.target);
    out.target = *out.index_of(schema.target);
    return out;
}

void write_series_csv(const std::filesystem::path& path, const TimeSeriesSet& series) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
    for (std::size_t v = 0; v < series.variables(); ++v) out << (v ? "," : "") << series.names[v];
    out << '\n';
    for (std::size_t t = 0; t < series.length(); ++t) {
        for (std::size_t v = 0; v < series.variables(); ++v)
            out << (v ? "," : "") << fmt::format("{:.17g}", series.values[v][t]);
        out << '\n';
    }
    if (!out) fail(ErrorKind::Io, "write failed for " + path.string());
}

}  // namespace embedcast
