#include "svg_plot.hpp"

#include "vpamp/core.hpp"
#include "vpamp/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace vpamp::plot {

namespace {

constexpr double kWidth = 720, kHeight = 420, kLeft = 70, kRight = 220, kTop = 40, kBottom = 50;
constexpr int kLegendLimit = 14;
const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::vector<std::string> split_record(std::istream& in, bool& ok) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false, any = false;
    char c;
    while (in.get(c)) {
        any = true;
        if (quoted) {
            if (c == '"') {
                if (in.peek() == '"') {
                    field += '"';
                    in.get();
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c == '\n') {
            break;
        } else if (c != '\r') {
            field += c;
        }
    }
    ok = any;
    if (any) fields.push_back(std::move(field));
    return fields;
}

std::string esc(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else if (c == '&') out += "&amp;";
        else out += c;
    }
    return out;
}

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

struct Axis {
    double lo = 0, hi = 1;
    bool log = false;
    double map(double v, double a, double b) const {
        const double t = log ? (std::log10(v) - lo) / (hi - lo) : (v - lo) / (hi - lo);
        return a + t * (b - a);
    }
};

Axis make_axis(std::vector<double> vals, bool log) {
    Axis ax;
    ax.log = log;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double v : vals) {
        if (!std::isfinite(v) || (log && v <= 0)) continue;
        const double w = log ? std::log10(v) : v;
        lo = std::min(lo, w);
        hi = std::max(hi, w);
    }
    if (!std::isfinite(lo)) lo = 0, hi = 1;
    if (hi - lo < 1e-12) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double pad = 0.05 * (hi - lo);
    ax.lo = lo - pad;
    ax.hi = hi + pad;
    return ax;
}

double parse(const std::string& s) {
    if (s.empty()) return std::nan("");
    try {
        return std::stod(s);
    } catch (...) {
        return std::nan("");
    }
}

} // namespace

std::size_t CsvTable::column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error("CSV has no column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    CsvTable t;
    bool ok = false;
    t.header = split_record(in, ok);
    for (;;) {
        auto rec = split_record(in, ok);
        if (!ok) break;
        if (rec.size() == 1 && rec[0].empty()) continue;
        t.rows.push_back(std::move(rec));
    }
    return t;
}

void render(const std::filesystem::path& csv, const PlotSpec& spec, const std::filesystem::path& svg) {
    const CsvTable t = read_csv(csv);
    const std::size_t xc = t.column(spec.x);
    std::map<std::string, std::vector<const std::vector<std::string>*>> groups;
    for (const auto& r : t.rows) {
        std::string key;
        for (const auto& g : spec.group) key += (key.empty() ? "" : " ") + r[t.column(g)];
        groups[key].push_back(&r);
    }

    std::vector<double> xs, ys;
    for (const auto& r : t.rows) {
        xs.push_back(parse(r[xc]));
        for (const auto& s : spec.series) {
            const double y = parse(r[t.column(s.y)]);
            const double e = s.error.empty() ? 0.0 : parse(r[t.column(s.error)]);
            ys.push_back(y);
            if (std::isfinite(e)) {
                ys.push_back(y - e);
                ys.push_back(y + e);
            }
        }
    }
    const Axis ax = make_axis(xs, spec.log_x), ay = make_axis(ys, spec.log_y);
    const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << num(kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << esc(spec.title)
      << "</text>\n"
      << "<rect x=\"" << num(x0) << "\" y=\"" << num(y1) << "\" width=\"" << num(x1 - x0) << "\" height=\""
      << num(y0 - y1) << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double fx = ax.lo + (ax.hi - ax.lo) * i / 4.0, fy = ay.lo + (ay.hi - ay.lo) * i / 4.0;
        const double px = x0 + (x1 - x0) * i / 4.0, py = y0 + (y1 - y0) * i / 4.0;
        o << "<text x=\"" << num(px) << "\" y=\"" << num(y0 + 16) << "\" text-anchor=\"middle\">"
          << tick_label(ax.log ? std::pow(10.0, fx) : fx) << "</text>\n";
        o << "<text x=\"" << num(x0 - 6) << "\" y=\"" << num(py + 4) << "\" text-anchor=\"end\">"
          << tick_label(ay.log ? std::pow(10.0, fy) : fy) << "</text>\n";
    }
    o << "<text x=\"" << num((x0 + x1) / 2) << "\" y=\"" << num(kHeight - 12) << "\" text-anchor=\"middle\">"
      << esc(spec.x) << "</text>\n";

    int color = 0, legend_entries = 0;
    double legend_y = y1 + 10;
    for (const auto& [name, rows] : groups) {
        for (const auto& s : spec.series) {
            const char* col = kColors[color++ % 8];
            const std::size_t yc = t.column(s.y);
            const std::size_t ec = s.error.empty() ? 0 : t.column(s.error);
            std::vector<std::pair<double, double>> pts;
            for (const auto* r : rows) {
                const double x = parse((*r)[xc]), y = parse((*r)[yc]);
                if (!std::isfinite(x) || !std::isfinite(y) || (ax.log && x <= 0) || (ay.log && y <= 0)) continue;
                pts.emplace_back(x, y);
                const double px = ax.map(x, x0, x1), py = ay.map(y, y0, y1);
                if (!s.line) o << "<circle cx=\"" << num(px) << "\" cy=\"" << num(py) << "\" r=\"3\" fill=\"" << col << "\"/>\n";
                if (!s.error.empty()) {
                    const double e = parse((*r)[ec]);
                    if (std::isfinite(e) && (!ay.log || y - e > 0))
                        o << "<line x1=\"" << num(px) << "\" x2=\"" << num(px) << "\" y1=\"" << num(ay.map(y - e, y0, y1))
                          << "\" y2=\"" << num(ay.map(y + e, y0, y1)) << "\" stroke=\"" << col << "\"/>\n";
                }
            }
            if (s.line && !pts.empty()) {
                std::sort(pts.begin(), pts.end());
                o << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
                for (const auto& [x, y] : pts) o << num(ax.map(x, x0, x1)) << "," << num(ay.map(y, y0, y1)) << " ";
                o << "\"/>\n";
            }
            if (++legend_entries > kLegendLimit) continue;
            const std::string label = legend_entries == kLegendLimit ? "..." : name.empty() ? s.y : name + " " + s.y;
            o << "<rect x=\"" << num(x1 + 10) << "\" y=\"" << num(legend_y - 8) << "\" width=\"10\" height=\"10\" fill=\""
              << col << "\"/>\n<text x=\"" << num(x1 + 24) << "\" y=\"" << num(legend_y + 1) << "\">" << esc(label)
              << "</text>\n";
            legend_y += 16;
        }
    }
    o << "</svg>\n";
    std::ofstream out(svg, std::ios::binary);
    if (!out) throw Error("cannot write " + svg.string());
    out << o.str();
}

} // namespace vpamp::plot
