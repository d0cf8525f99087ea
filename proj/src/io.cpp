#include "vpamp/io.hpp"

#include "vpamp/core.hpp"

#include <cmath>
#include <cstdio>

namespace vpamp {

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string csv_escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::initializer_list<std::string_view> header)
    : out_(path, std::ios::binary), path_(path) {
    if (!out_) throw Error("cannot write " + path.string());
    for (auto h : header) field(h);
    end_row();
    rows_ = 0;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary), path_(path) {
    if (!out_) throw Error("cannot write " + path.string());
    for (const auto& h : header) field(h);
    end_row();
    rows_ = 0;
}

CsvWriter& CsvWriter::field(std::string_view s) {
    if (!first_) out_ << ',';
    out_ << csv_escape(s);
    first_ = false;
    return *this;
}

CsvWriter& CsvWriter::field(double x) { return field(std::string_view(format_double(x))); }

CsvWriter& CsvWriter::field(long long x) { return field(std::string_view(std::to_string(x))); }

CsvWriter& CsvWriter::field(unsigned long long x) { return field(std::string_view(std::to_string(x))); }

void CsvWriter::end_row() {
    out_ << '\n';
    first_ = true;
    ++rows_;
    if (!out_) throw Error("write failed: " + path_.string());
}

} // namespace vpamp
