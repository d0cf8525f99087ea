#pragma once

// CSV helpers shared by the exporters and the CLI.

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace vpamp {

/// Shortest round-trip-safe text for a double: 17 significant digits.
std::string format_double(double x);

/// RFC-4180 quoting: only fields containing ',', '"' or a line break are quoted.
std::string csv_escape(std::string_view field);

/// Writes an RFC-4180 file with CRLF-free '\n' rows.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, std::initializer_list<std::string_view> header);
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

    CsvWriter& field(std::string_view s);
    CsvWriter& field(double x);
    CsvWriter& field(long long x);
    CsvWriter& field(int x) { return field(static_cast<long long>(x)); }
    CsvWriter& field(long x) { return field(static_cast<long long>(x)); }
    CsvWriter& field(unsigned long long x);
    CsvWriter& field(unsigned long x) { return field(static_cast<unsigned long long>(x)); }
    void end_row();

    std::size_t rows_written() const noexcept { return rows_; }

private:
    std::ofstream out_;
    std::filesystem::path path_;
    bool first_ = true;
    std::size_t rows_ = 0;
};

} // namespace vpamp
