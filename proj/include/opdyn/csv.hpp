#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace opdyn {

/// Shortest round-trip decimal text for a double (via std::to_chars), so that
/// identical runs emit byte-identical files.
std::string format_double(double value);

std::string format_u64(std::uint64_t value);

/// Minimal CSV writer: comma-separated, '\n' line endings, header first.
/// Fields are written verbatim; the formats used here never need quoting.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);

    void row(const std::vector<std::string>& fields);

private:
    std::ofstream out_;
    std::size_t columns_;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const;  // -1 when absent
};

/// Reads a comma-separated file with a header row. No quoting/escaping rules;
/// values must be plain tokens.
CsvTable read_csv(const std::string& path);

double parse_double(const std::string& token);
std::uint64_t parse_u64(const std::string& token);

}  // namespace opdyn
