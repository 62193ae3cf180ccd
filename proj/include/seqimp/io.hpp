#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace seqimp {

/// Comma-separated table with a one-line header. Cells are kept as text;
/// numbers are written with %.17g so that reading them back is exact.
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const;
    double number(std::size_t row, const std::string& name) const;
};

std::string format_double(double v);

void write_csv(const std::filesystem::path& path, const CsvTable& table);

CsvTable read_csv(const std::filesystem::path& path);

}  // namespace seqimp
