#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace dspstab {

inline std::string fmt_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string fmt_fixed(double v, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

/// Minimal CSV emitter: comma separator, '.' decimal, LF endings, header row.
class CsvWriter {
public:
    explicit CsvWriter(std::ostream& os) : os_(os) {}

    void header(const std::vector<std::string>& cols) { row_strings(cols); }

    void row_strings(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) os_ << ',';
            os_ << cells[i];
        }
        os_ << '\n';
    }

    template <class... Ts>
    void row(const Ts&... cells) {
        std::size_t i = 0;
        ((os_ << (i++ ? "," : "") << cell(cells)), ...);
        os_ << '\n';
    }

private:
    static std::string cell(double v) { return fmt_g17(v); }
    static std::string cell(long long v) { return std::to_string(v); }
    static std::string cell(std::int64_t v) { return std::to_string(v); }
    static std::string cell(int v) { return std::to_string(v); }
    static std::string cell(const char* v) { return v; }
    static std::string cell(const std::string& v) { return v; }

    std::ostream& os_;
};

/// Static log-log SVG plot: one data polyline per series plus an optional
/// reference line of prescribed slope anchored at the first fit abscissa.
struct SvgSeries {
    std::vector<double> x; // already in log coordinates
    std::vector<double> y;
    std::string color = "#1f6fb2";
    std::string label;
};

inline std::string render_svg_loglog(const std::vector<SvgSeries>& series, const std::string& title,
                                     const std::string& x_label, const std::string& y_label) {
    const int W = 720, H = 480, ml = 64, mr = 16, mt = 40, mb = 48;
    double x_min = 1e300, x_max = -1e300, y_min = 1e300, y_max = -1e300;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            x_min = std::min(x_min, s.x[i]);
            x_max = std::max(x_max, s.x[i]);
            y_min = std::min(y_min, s.y[i]);
            y_max = std::max(y_max, s.y[i]);
        }
    if (!(x_min < x_max)) {
        x_min = 0;
        x_max = 1;
    }
    if (!(y_min < y_max)) {
        y_min = 0;
        y_max = 1;
    }
    const double xpad = 0.02 * (x_max - x_min), ypad = 0.05 * (y_max - y_min);
    x_min -= xpad;
    x_max += xpad;
    y_min -= ypad;
    y_max += ypad;
    auto px = [&](double x) { return ml + (x - x_min) / (x_max - x_min) * (W - ml - mr); };
    auto py = [&](double y) { return H - mb - (y - y_min) / (y_max - y_min) * (H - mt - mb); };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
       << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    os << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << title
       << "</text>\n";
    // axes
    os << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\"" << H - mb
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb
       << "\" stroke=\"black\"/>\n";
    // ticks: 6 per axis
    for (int i = 0; i <= 5; ++i) {
        const double xv = x_min + (x_max - x_min) * i / 5.0;
        const double yv = y_min + (y_max - y_min) * i / 5.0;
        os << "<line x1=\"" << px(xv) << "\" y1=\"" << H - mb << "\" x2=\"" << px(xv) << "\" y2=\""
           << H - mb + 5 << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << px(xv) << "\" y=\"" << H - mb + 20
           << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt_fixed(xv, 2) << "</text>\n";
        os << "<line x1=\"" << ml - 5 << "\" y1=\"" << py(yv) << "\" x2=\"" << ml << "\" y2=\""
           << py(yv) << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << ml - 8 << "\" y=\"" << py(yv) + 4
           << "\" text-anchor=\"end\" font-size=\"11\">" << fmt_fixed(yv, 2) << "</text>\n";
    }
    os << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 10
       << "\" text-anchor=\"middle\" font-size=\"12\">" << x_label << "</text>\n";
    os << "<text x=\"14\" y=\"" << (mt + H - mb) / 2
       << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 14 "
       << (mt + H - mb) / 2 << ")\">" << y_label << "</text>\n";
    int legend_y = mt + 8;
    for (const auto& s : series) {
        os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            os << fmt_fixed(px(s.x[i]), 2) << "," << fmt_fixed(py(s.y[i]), 2) << " ";
        }
        os << "\"/>\n";
        if (!s.label.empty()) {
            os << "<line x1=\"" << W - mr - 150 << "\" y1=\"" << legend_y << "\" x2=\""
               << W - mr - 130 << "\" y2=\"" << legend_y << "\" stroke=\"" << s.color
               << "\" stroke-width=\"1.5\"/>\n";
            os << "<text x=\"" << W - mr - 124 << "\" y=\"" << legend_y + 4
               << "\" font-size=\"11\">" << s.label << "</text>\n";
            legend_y += 16;
        }
    }
    os << "</svg>\n";
    return os.str();
}

/// Aligned two-column pass/fail table for terminal output.
class TextTable {
public:
    void add(const std::string& name, bool pass, const std::string& detail) {
        rows_.push_back({name, pass, detail});
        width_ = std::max(width_, name.size());
    }

    bool all_pass() const {
        for (const auto& r : rows_)
            if (!r.pass) return false;
        return true;
    }

    void print(std::ostream& os) const {
        for (const auto& r : rows_) {
            os << "  " << r.name << std::string(width_ - r.name.size() + 2, ' ')
               << (r.pass ? "pass" : "FAIL") << "  " << r.detail << "\n";
        }
    }

    void write_csv(std::ostream& os) const {
        CsvWriter w(os);
        w.header({"check", "verdict", "detail"});
        for (const auto& r : rows_) w.row(r.name, r.pass ? "pass" : "fail", r.detail);
    }

private:
    struct Row {
        std::string name;
        bool pass;
        std::string detail;
    };
    std::vector<Row> rows_;
    std::size_t width_ = 0;
};

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
    os << content;
}

} // namespace dspstab
