/*
   Copyright 2026 The atomchip Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#include "atomchip/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "atomchip/errors.hpp"

namespace atomchip {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 110.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

std::string escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

// Viridis, sampled at nine points.
std::string colour(double f)
{
    static constexpr std::array<std::array<double, 3>, 9> stops{{{68, 1, 84},
                                                                 {71, 44, 122},
                                                                 {59, 81, 139},
                                                                 {44, 113, 142},
                                                                 {33, 144, 141},
                                                                 {39, 173, 129},
                                                                 {92, 200, 99},
                                                                 {170, 220, 50},
                                                                 {253, 231, 37}}};
    f = std::clamp(std::isfinite(f) ? f : 0.0, 0.0, 1.0) * 8.0;
    const int k = std::min(static_cast<int>(f), 7);
    const double w = f - k;
    char buf[16];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x",
                  static_cast<int>(std::lround(stops[k][0] + w * (stops[k + 1][0] - stops[k][0]))),
                  static_cast<int>(std::lround(stops[k][1] + w * (stops[k + 1][1] - stops[k][1]))),
                  static_cast<int>(std::lround(stops[k][2] + w * (stops[k + 1][2] - stops[k][2]))));
    return buf;
}

void header(std::ostream& out, const std::string& title)
{
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << escape(title)
        << "</text>\n";
}

void axis_labels(std::ostream& out, const std::string& xl, const std::string& yl)
{
    out << "<text x=\"" << kLeft + (kWidth - kLeft - kRight) / 2 << "\" y=\"" << kHeight - 15
        << "\" text-anchor=\"middle\">" << escape(xl) << "</text>\n";
    const double cy = kTop + (kHeight - kTop - kBottom) / 2;
    out << "<text x=\"18\" y=\"" << cy << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " << cy << ")\">"
        << escape(yl) << "</text>\n";
}

std::vector<double> ticks(double lo, double hi)
{
    std::vector<double> t;
    if (!(hi > lo)) return {lo};
    const double raw = (hi - lo) / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        if (raw <= m * mag) {
            step = m * mag;
            break;
        }
    }
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) t.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
    return t;
}

}  // namespace

void write_heatmap_svg(std::ostream& out, const Heatmap& map)
{
    if (map.nx < 1 || map.ny < 1 || map.values.size() != static_cast<std::size_t>(map.nx) * map.ny) {
        throw ConfigError("heat map dimensions do not match its data");
    }
    auto tr = [&](double v) { return map.log_scale ? std::log10(std::max(v, 1e-300)) : v; };
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (double v : map.values) {
        if (!std::isfinite(v)) continue;
        lo = std::min(lo, tr(v));
        hi = std::max(hi, tr(v));
    }
    if (!(hi > lo)) hi = lo + 1.0;

    header(out, map.title);
    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    const double cw = pw / map.nx;
    const double ch = ph / map.ny;
    for (int j = 0; j < map.ny; ++j) {
        for (int i = 0; i < map.nx; ++i) {
            const double v = tr(map.values[static_cast<std::size_t>(j) * map.nx + i]);
            out << "<rect x=\"" << num(kLeft + i * cw) << "\" y=\"" << num(kTop + (map.ny - 1 - j) * ch)
                << "\" width=\"" << num(cw + 0.3) << "\" height=\"" << num(ch + 0.3) << "\" fill=\""
                << colour((v - lo) / (hi - lo)) << "\"/>\n";
        }
    }
    out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double t : ticks(map.x_min, map.x_max)) {
        const double x = kLeft + (t - map.x_min) / (map.x_max - map.x_min) * pw;
        out << "<line x1=\"" << num(x) << "\" y1=\"" << kTop + ph << "\" x2=\"" << num(x) << "\" y2=\"" << kTop + ph + 5
            << "\" stroke=\"black\"/><text x=\"" << num(x) << "\" y=\"" << kTop + ph + 18
            << "\" text-anchor=\"middle\">" << num(t) << "</text>\n";
    }
    for (double t : ticks(map.y_min, map.y_max)) {
        const double y = kTop + ph - (t - map.y_min) / (map.y_max - map.y_min) * ph;
        out << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << num(y) << "\" x2=\"" << kLeft << "\" y2=\"" << num(y)
            << "\" stroke=\"black\"/><text x=\"" << kLeft - 8 << "\" y=\"" << num(y + 4)
            << "\" text-anchor=\"end\">" << num(t) << "</text>\n";
    }
    // Colour bar.
    const double bx = kWidth - kRight + 20;
    for (int k = 0; k < 64; ++k) {
        out << "<rect x=\"" << bx << "\" y=\"" << num(kTop + ph - (k + 1) * ph / 64) << "\" width=\"16\" height=\""
            << num(ph / 64 + 0.3) << "\" fill=\"" << colour((k + 0.5) / 64) << "\"/>\n";
    }
    out << "<text x=\"" << bx + 20 << "\" y=\"" << kTop + 10 << "\">" << num(hi) << "</text>\n";
    out << "<text x=\"" << bx + 20 << "\" y=\"" << kTop + ph << "\">" << num(lo) << "</text>\n";
    out << "<text x=\"" << bx << "\" y=\"" << kTop - 8 << "\">"
        << escape(map.log_scale ? "log10 " + map.value_label : map.value_label) << "</text>\n";
    axis_labels(out, map.x_label, map.y_label);
    out << "</svg>\n";
}

void write_line_plot_svg(std::ostream& out, const std::vector<PlotSeries>& series, const PlotAxes& axes)
{
    static constexpr std::array<const char*, 6> palette{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                                        "#8c564b"};
    auto ty = [&](double v) { return axes.log_y ? std::log10(v) : v; };
    double x0 = std::numeric_limits<double>::infinity();
    double x1 = -x0;
    double y0 = x0;
    double y1 = -x0;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (axes.log_y && !(s.y[i] > 0.0)) continue;
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, ty(s.y[i]));
            y1 = std::max(y1, ty(s.y[i]));
        }
    }
    if (!std::isfinite(x0)) {
        x0 = 0.0;
        x1 = 1.0;
        y0 = 0.0;
        y1 = 1.0;
    }
    if (!(x1 > x0)) x1 = x0 + 1.0;
    if (!(y1 > y0)) {
        y0 -= 0.5;
        y1 += 0.5;
    }
    if (axes.log_y) {
        y0 = std::floor(y0);
        y1 = std::ceil(y1);
        if (y1 == y0) y1 += 1.0;
    }

    header(out, axes.title);
    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
    auto py = [&](double y) { return kTop + ph - (ty(y) - y0) / (y1 - y0) * ph; };
    out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double t : ticks(x0, x1)) {
        out << "<line x1=\"" << num(px(t)) << "\" y1=\"" << kTop + ph << "\" x2=\"" << num(px(t)) << "\" y2=\""
            << kTop + ph + 5 << "\" stroke=\"black\"/><text x=\"" << num(px(t)) << "\" y=\"" << kTop + ph + 18
            << "\" text-anchor=\"middle\">" << num(t) << "</text>\n";
    }
    if (axes.log_y) {
        for (double e = y0; e <= y1; e += 1.0) {
            const double y = kTop + ph - (e - y0) / (y1 - y0) * ph;
            out << "<line x1=\"" << kLeft << "\" y1=\"" << num(y) << "\" x2=\"" << kLeft + pw << "\" y2=\"" << num(y)
                << "\" stroke=\"#dddddd\"/><text x=\"" << kLeft - 8 << "\" y=\"" << num(y + 4)
                << "\" text-anchor=\"end\">1e" << static_cast<int>(e) << "</text>\n";
        }
    } else {
        for (double t : ticks(y0, y1)) {
            const double y = kTop + ph - (t - y0) / (y1 - y0) * ph;
            out << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << num(y) << "\" x2=\"" << kLeft << "\" y2=\"" << num(y)
                << "\" stroke=\"black\"/><text x=\"" << kLeft - 8 << "\" y=\"" << num(y + 4)
                << "\" text-anchor=\"end\">" << num(t) << "</text>\n";
        }
    }
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* c = palette[k % palette.size()];
        std::string path;
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (axes.log_y && !(s.y[i] > 0.0)) continue;
            path += (path.empty() ? "M" : " L") + num(px(s.x[i])) + "," + num(py(s.y[i]));
            if (s.markers) {
                out << "<circle cx=\"" << num(px(s.x[i])) << "\" cy=\"" << num(py(s.y[i])) << "\" r=\"2.5\" fill=\""
                    << c << "\"/>\n";
            }
        }
        if (!path.empty()) out << "<path d=\"" << path << "\" fill=\"none\" stroke=\"" << c << "\"/>\n";
        out << "<text x=\"" << kWidth - kRight + 8 << "\" y=\"" << kTop + 14 + 16 * k << "\" fill=\"" << c << "\">"
            << escape(s.label) << "</text>\n";
    }
    axis_labels(out, axes.x_label, axes.y_label);
    out << "</svg>\n";
}

}  // namespace atomchip
