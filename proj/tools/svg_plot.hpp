#pragma once

// Minimal SVG line/scatter plots rendered from CSV files written by the CLI.

#include <filesystem>
#include <string>
#include <vector>

namespace vpamp::plot {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column index by name; throws when absent.
    std::size_t column(const std::string& name) const;
};

/// RFC-4180 reader (quoted fields, doubled quotes).
CsvTable read_csv(const std::filesystem::path& path);

struct Series {
    std::string y;          // column plotted on the y axis
    std::string error;      // optional +- column, drawn as bars
    bool line = true;       // polyline, otherwise markers
};

struct PlotSpec {
    std::string title;
    std::string x;
    std::vector<Series> series;
    /// Rows are split into one curve per distinct tuple of these columns.
    std::vector<std::string> group;
    bool log_x = false;
    bool log_y = false;
};

/// Renders `spec` from the CSV at `csv` into an SVG file.
void render(const std::filesystem::path& csv, const PlotSpec& spec, const std::filesystem::path& svg);

} // namespace vpamp::plot
