// svg.hpp
// Minimal self-contained SVG line chart for cumulative return series.

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "regime_taa/csv.hpp"

namespace regime_taa {

struct SvgSeries {
    std::string name;
    std::vector<double> values;
};

inline std::string svg_line_chart(const std::string& title, const std::vector<std::string>& x_labels,
                                  const std::vector<SvgSeries>& series, int width = 900, int height = 500) {
    static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    const double left = 60, right = 180, top = 40, bottom = 50;
    const double pw = width - left - right, ph = height - top - bottom;

    double lo = 0.0, hi = 0.0;
    std::size_t n = 0;
    for (const auto& s : series) {
        n = std::max(n, s.values.size());
        for (double v : s.values)
            if (std::isfinite(v)) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
    }
    if (hi == lo) hi = lo + 1.0;
    auto xpos = [&](std::size_t i) { return left + (n > 1 ? pw * static_cast<double>(i) / static_cast<double>(n - 1) : 0.0); };
    auto ypos = [&](double v) { return top + ph * (hi - v) / (hi - lo); };
    auto num = [](double v) { return csv::format_fixed(v, 2); };
    auto esc = [](const std::string& s) {
        std::string o;
        for (char c : s) {
            if (c == '<') o += "&lt;";
            else if (c == '>') o += "&gt;";
            else if (c == '&') o += "&amp;";
            else o += c;
        }
        return o;
    };

    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) + "\" height=\"" +
                      std::to_string(height) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out += "<text x=\"" + num(left) + "\" y=\"20\" font-size=\"14\">" + esc(title) + "</text>\n";
    out += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
           "\" fill=\"none\" stroke=\"#999\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double v = lo + (hi - lo) * k / 4.0;
        out += "<text x=\"" + num(left - 5) + "\" y=\"" + num(ypos(v) + 4) + "\" text-anchor=\"end\">" +
               csv::format_fixed(v, 2) + "</text>\n";
    }
    if (lo < 0.0 && hi > 0.0)
        out += "<line x1=\"" + num(left) + "\" x2=\"" + num(left + pw) + "\" y1=\"" + num(ypos(0)) + "\" y2=\"" +
               num(ypos(0)) + "\" stroke=\"#ccc\"/>\n";
    if (!x_labels.empty()) {
        const std::size_t step = std::max<std::size_t>(1, x_labels.size() / 6);
        for (std::size_t i = 0; i < x_labels.size(); i += step)
            out += "<text x=\"" + num(xpos(i)) + "\" y=\"" + num(top + ph + 18) + "\" text-anchor=\"middle\">" +
                   esc(x_labels[i]) + "</text>\n";
    }
    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = palette[s % 10];
        std::string pts;
        for (std::size_t i = 0; i < series[s].values.size(); ++i) {
            if (!std::isfinite(series[s].values[i])) continue;
            if (!pts.empty()) pts += ' ';
            pts += num(xpos(i)) + "," + num(ypos(series[s].values[i]));
        }
        out += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.2\" points=\"" + pts +
               "\"/>\n";
        const double ly = top + 14.0 * static_cast<double>(s) + 8;
        out += "<line x1=\"" + num(left + pw + 10) + "\" x2=\"" + num(left + pw + 30) + "\" y1=\"" + num(ly) +
               "\" y2=\"" + num(ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
        out += "<text x=\"" + num(left + pw + 35) + "\" y=\"" + num(ly + 4) + "\">" + esc(series[s].name) + "</text>\n";
    }
    out += "</svg>\n";
    return out;
}

}  // namespace regime_taa
