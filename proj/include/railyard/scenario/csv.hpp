#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "railyard/scenario/scenario.hpp"

namespace railyard::scenario {

// Comma-separated table with a mandatory header row.
struct CsvTable {
    std::string source;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // Throws InputError naming the file when the column is absent.
    std::size_t column(std::string_view name) const;
    double number(std::size_t row, std::size_t col) const;
};

CsvTable parse_csv(std::istream& in, std::string source);
CsvTable read_csv(const std::filesystem::path& path);

// Coarser input is held piecewise constant, finer input is block averaged.
std::vector<double> resample_series(const std::vector<double>& values, std::size_t steps,
                                    std::string_view source);

// Reads one value column aligned to the grid. Without `resample` the row
// count must equal the number of steps. Negative entries are rejected
// unless `allow_negative`.
std::vector<double> load_series_csv(const std::filesystem::path& path, std::string_view column,
                                    const TimeGrid& grid, bool resample, bool allow_negative = false);

// `departure_hhmm` column, minutes after midnight.
std::vector<double> load_bus_schedule_csv(const std::filesystem::path& path);

}  // namespace railyard::scenario
