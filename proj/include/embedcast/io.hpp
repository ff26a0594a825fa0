#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "embedcast/core.hpp"

namespace embedcast {

// "0-486,974-1459" -> every index in the inclusive ranges, ascending.
// A single number is a one-row range.
std::vector<TimeIndex> parse_row_ranges(const std::string& text);
std::string format_row_ranges(const std::vector<TimeIndex>& rows);

struct CsvSchema {
    std::string target;
    std::vector<std::string> required;  // columns that must be present besides the target
    double sample_period = 1.0;
};

// Canonical series file: header of variable names, then one numeric row
// per sample. Throws ParseError naming row/column (1-based, header is row 1)
// and MissingColumn. train/test are left empty for the caller to fill.
TimeSeriesSet ingest_csv(const std::filesystem::path& path, const CsvSchema& schema);

// Columns a flood-schema file is expected to carry.
std::vector<std::string> flood_columns();

// Writes the canonical format with round-trip precision.
void write_series_csv(const std::filesystem::path& path, const TimeSeriesSet& series);

}  // namespace embedcast
