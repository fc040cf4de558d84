#include "railyard/scenario/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "railyard/scenario/sessions.hpp"

namespace railyard::scenario {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> cells;
    std::string_view rest(line);
    while (true) {
        const auto comma = rest.find(',');
        cells.push_back(trim(rest.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
    }
    return cells;
}

}  // namespace

std::size_t CsvTable::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw InputError(fmt::format("{}: missing column '{}'", source, name));
}

double CsvTable::number(std::size_t row, std::size_t col) const {
    const std::string& cell = rows.at(row).at(col);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
        throw InputError(fmt::format("{}: row {}: '{}' is not a number", source, row, cell));
    }
    return v;
}

CsvTable parse_csv(std::istream& in, std::string source) {
    CsvTable t;
    t.source = std::move(source);
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto cells = split(line);
        if (!have_header) {
            t.header = std::move(cells);
            have_header = true;
            continue;
        }
        if (cells.size() != t.header.size()) {
            throw InputError(fmt::format("{}: row {} has {} fields, header has {}", t.source, t.rows.size(),
                                         cells.size(), t.header.size()));
        }
        t.rows.push_back(std::move(cells));
    }
    if (!have_header) throw InputError(fmt::format("{}: empty file, header row required", t.source));
    return t;
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError(fmt::format("{}: cannot open file", path.string()));
    return parse_csv(in, path.string());
}

std::vector<double> resample_series(const std::vector<double>& values, std::size_t steps,
                                    std::string_view source) {
    const std::size_t rows = values.size();
    if (rows == steps) return values;
    if (rows == 0) throw InputError(fmt::format("{}: no data rows", source));
    std::vector<double> out(steps, 0.0);
    if (steps % rows == 0) {
        const std::size_t k = steps / rows;
        for (std::size_t t = 0; t < steps; ++t) out[t] = values[t / k];
        return out;
    }
    if (rows % steps == 0) {
        const std::size_t k = rows / steps;
        for (std::size_t t = 0; t < steps; ++t) {
            double sum = 0.0;
            for (std::size_t i = 0; i < k; ++i) sum += values[t * k + i];
            out[t] = sum / static_cast<double>(k);
        }
        return out;
    }
    throw InputError(fmt::format("{}: {} rows cannot be resampled onto {} steps", source, rows, steps));
}

std::vector<double> load_series_csv(const std::filesystem::path& path, std::string_view column,
                                    const TimeGrid& grid, bool resample, bool allow_negative) {
    const CsvTable t = read_csv(path);
    const std::size_t col = t.column(column);
    std::vector<double> values(t.rows.size());
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        values[r] = t.number(r, col);
        if (!allow_negative && values[r] < 0.0) {
            throw InputError(fmt::format("{}: row {}: negative value {} in column '{}'", t.source, r,
                                         values[r], column));
        }
    }
    if (values.size() != grid.steps() && !resample) {
        throw InputError(fmt::format("{}: {} rows, expected {} (enable resampling to convert)", t.source,
                                     values.size(), grid.steps()));
    }
    return resample_series(values, grid.steps(), t.source);
}

std::vector<double> load_bus_schedule_csv(const std::filesystem::path& path) {
    const CsvTable t = read_csv(path);
    const std::size_t col = t.column("departure_hhmm");
    std::vector<double> out;
    out.reserve(t.rows.size());
    for (const auto& row : t.rows) out.push_back(parse_hhmm(row[col]));
    return out;
}

}  // namespace railyard::scenario
