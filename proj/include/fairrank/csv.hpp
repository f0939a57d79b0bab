#ifndef FAIRRANK_CSV_HPP
#define FAIRRANK_CSV_HPP

#include <filesystem>
#include <string>
#include <vector>

namespace fairrank {

// Minimal RFC-4180-style CSV table. All on-disk interchange formats in this
// project are header-first CSV files.
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    int column_index(const std::string& name) const; // -1 if absent
    int require_column(const std::string& name) const; // throws if absent
};

CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(const std::string& text, const std::string& origin = "<string>");

void write_csv(const std::filesystem::path& path, const CsvTable& table);
std::string csv_escape(const std::string& field);

// Fixed-format double used by every CSV writer so reruns are byte-identical.
std::string format_double(double v);

} // namespace fairrank

#endif
