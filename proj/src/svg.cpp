#include "odegen/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace odegen::svg {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void include(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void finalize() {
        if (!(lo <= hi)) {
            lo = 0.0;
            hi = 1.0;
        }
        if (lo == hi) {
            lo -= 0.5;
            hi += 0.5;
        }
        const double pad = 0.05 * (hi - lo);
        lo -= pad;
        hi += pad;
    }
    double to_unit(double v) const { return (v - lo) / (hi - lo); }
};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

}  // namespace

std::string render(const std::vector<Series>& series, PlotKind kind,
                   const std::string& title, const std::string& x_label,
                   const std::string& y_label, int width, int height) {
    const double ml = 70.0;
    const double mr = 20.0;
    const double mt = 40.0;
    const double mb = 50.0;
    const double pw = width - ml - mr;
    const double ph = height - mt - mb;

    Range rx;
    Range ry;
    for (const Series& s : series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) {
                rx.include(s.x[i]);
                ry.include(s.y[i]);
            }
        }
    }
    rx.finalize();
    ry.finalize();

    auto px = [&](double v) { return ml + rx.to_unit(v) * pw; };
    auto py = [&](double v) { return mt + (1.0 - ry.to_unit(v)) * ph; };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
       << "\" height=\"" << height << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" "
          "font-family=\"sans-serif\" font-size=\"15\">" << title << "</text>\n";

    // axes
    os << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw
       << "\" y2=\"" << mt + ph << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
       << mt + ph << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double fx = rx.lo + (rx.hi - rx.lo) * i / 4.0;
        const double fy = ry.lo + (ry.hi - ry.lo) * i / 4.0;
        os << "<text x=\"" << px(fx) << "\" y=\"" << mt + ph + 18
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">"
           << fmt(fx) << "</text>\n";
        os << "<text x=\"" << ml - 6 << "\" y=\"" << py(fy) + 3
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">"
           << fmt(fy) << "</text>\n";
    }
    os << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 10
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
       << x_label << "</text>\n";
    os << "<text x=\"16\" y=\"" << mt + ph / 2
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
          "transform=\"rotate(-90 16 " << mt + ph / 2 << ")\">" << y_label
       << "</text>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const Series& s = series[si];
        const char* color = kPalette[si % (sizeof(kPalette) / sizeof(kPalette[0]))];
        if (kind == PlotKind::line) {
            os << "<polyline fill=\"none\" stroke=\"" << color << "\" points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
                os << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
            }
            os << "\"/>\n";
        }
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            os << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i])
               << "\" r=\"3\" fill=\"" << color << "\" fill-opacity=\"0.7\"/>\n";
        }
        if (!s.label.empty()) {
            os << "<text x=\"" << ml + pw - 6 << "\" y=\"" << mt + 14 + 14 * si
               << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" "
                  "fill=\"" << color << "\">" << s.label << "</text>\n";
        }
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace odegen::svg
