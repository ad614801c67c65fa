#pragma once

#include <string>
#include <vector>

namespace metadsp::harness {

using CsvRow = std::vector<std::string>;

// Shortest round-trip decimal; "inf", "-inf" and "nan" for non-finite values.
std::string format_double(double v);
double parse_double(const std::string& s);

std::string csv_line(const CsvRow& fields);
std::vector<CsvRow> parse_csv(const std::string& text);
void write_csv(const std::string& path, const CsvRow& header, const std::vector<CsvRow>& rows);
// First row is the header.
std::vector<CsvRow> read_csv(const std::string& path);

}  // namespace metadsp::harness
