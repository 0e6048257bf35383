#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gmotv/signal.hpp"

namespace gmotv {

/// Minimal standalone SVG writers for waveform overlays and ISNR charts.
/// Output is deterministic text so identical inputs give identical files.

namespace plot_detail {

constexpr double kWidth = 960.0;
constexpr double kHeight = 320.0;
constexpr double kMarginLeft = 56.0;
constexpr double kMarginRight = 16.0;
constexpr double kMarginTop = 32.0;
constexpr double kMarginBottom = 36.0;

inline const char* series_color(std::size_t i) {
    static const char* colors[] = {"#444444", "#d62728", "#1f77b4", "#2ca02c",
                                   "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};
    return colors[i % 8];
}

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

inline std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Frame {
    double xmin, xmax, ymin, ymax;

    double px(double x) const {
        const double t = (x - xmin) / (xmax > xmin ? xmax - xmin : 1.0);
        return kMarginLeft + t * (kWidth - kMarginLeft - kMarginRight);
    }
    double py(double y) const {
        const double t = (y - ymin) / (ymax > ymin ? ymax - ymin : 1.0);
        return kHeight - kMarginBottom - t * (kHeight - kMarginTop - kMarginBottom);
    }
};

inline void begin_svg(std::ofstream& out, const std::string& title) {
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << kMarginLeft << "\" y=\"20\" font-family=\"sans-serif\" "
        << "font-size=\"14\">" << escape_xml(title) << "</text>\n";
}

inline void draw_frame(std::ofstream& out, const Frame& f) {
    out << "<rect x=\"" << fmt(kMarginLeft) << "\" y=\"" << fmt(kMarginTop) << "\" width=\""
        << fmt(kWidth - kMarginLeft - kMarginRight) << "\" height=\""
        << fmt(kHeight - kMarginTop - kMarginBottom)
        << "\" fill=\"none\" stroke=\"#999999\" stroke-width=\"1\"/>\n";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4g", f.ymax);
    out << "<text x=\"4\" y=\"" << fmt(kMarginTop + 4) << "\" font-family=\"sans-serif\" "
        << "font-size=\"11\">" << buf << "</text>\n";
    std::snprintf(buf, sizeof(buf), "%.4g", f.ymin);
    out << "<text x=\"4\" y=\"" << fmt(kHeight - kMarginBottom) << "\" "
        << "font-family=\"sans-serif\" font-size=\"11\">" << buf << "</text>\n";
}

inline void draw_polyline(std::ofstream& out, const Frame& f, const std::vector<double>& xs,
                          const std::vector<double>& ys, const char* color) {
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1\" points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out << " ";
        out << fmt(f.px(xs[i])) << "," << fmt(f.py(ys[i]));
    }
    out << "\"/>\n";
}

inline void draw_legend(std::ofstream& out, const std::vector<std::string>& names) {
    double x = kMarginLeft + 8.0;
    for (std::size_t i = 0; i < names.size(); ++i) {
        out << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(kMarginTop + 6) << "\" width=\"12\""
            << " height=\"3\" fill=\"" << series_color(i) << "\"/>\n"
            << "<text x=\"" << fmt(x + 16) << "\" y=\"" << fmt(kMarginTop + 12)
            << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape_xml(names[i])
            << "</text>\n";
        x += 24.0 + 7.0 * static_cast<double>(names[i].size());
    }
}

}  // namespace plot_detail

/// One polyline per named signal, common scale.
inline void write_overlay_svg(const std::string& path, const std::string& title,
                              const std::vector<std::pair<std::string, const Signal*>>& series) {
    if (series.empty()) throw std::invalid_argument("write_overlay_svg: no series");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_overlay_svg: cannot open '" + path + "'");

    double ymin = 0.0, ymax = 0.0;
    bool first = true;
    std::size_t n = 0;
    for (const auto& [name, sig] : series) {
        n = std::max(n, sig->size());
        for (std::size_t i = 0; i < sig->size(); ++i) {
            if (first) {
                ymin = ymax = (*sig)[i];
                first = false;
            }
            ymin = std::min(ymin, (*sig)[i]);
            ymax = std::max(ymax, (*sig)[i]);
        }
    }
    if (ymax == ymin) ymax = ymin + 1.0;
    plot_detail::Frame frame{0.0, static_cast<double>(n > 1 ? n - 1 : 1), ymin, ymax};

    plot_detail::begin_svg(out, title);
    plot_detail::draw_frame(out, frame);
    std::vector<std::string> names;
    for (std::size_t s = 0; s < series.size(); ++s) {
        const Signal& sig = *series[s].second;
        std::vector<double> xs(sig.size()), ys(sig.size());
        for (std::size_t i = 0; i < sig.size(); ++i) {
            xs[i] = static_cast<double>(i);
            ys[i] = sig[i];
        }
        plot_detail::draw_polyline(out, frame, xs, ys, plot_detail::series_color(s));
        names.push_back(series[s].first);
    }
    plot_detail::draw_legend(out, names);
    out << "</svg>\n";
    if (!out) throw std::runtime_error("write_overlay_svg: write failed for '" + path + "'");
}

/// Line chart with markers: one series per name over shared x values.
inline void write_line_chart_svg(const std::string& path, const std::string& title,
                                 const std::vector<double>& xs,
                                 const std::vector<std::pair<std::string, std::vector<double>>>&
                                     series) {
    if (xs.empty() || series.empty())
        throw std::invalid_argument("write_line_chart_svg: empty chart");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_line_chart_svg: cannot open '" + path + "'");

    double xmin = xs.front(), xmax = xs.front();
    for (double x : xs) {
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
    }
    double ymin = 0.0, ymax = 0.0;
    bool first = true;
    for (const auto& [name, ys] : series)
        for (double y : ys) {
            if (!std::isfinite(y)) continue;
            if (first) {
                ymin = ymax = y;
                first = false;
            }
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    if (ymax == ymin) ymax = ymin + 1.0;
    if (xmax == xmin) xmax = xmin + 1.0;
    plot_detail::Frame frame{xmin, xmax, ymin, ymax};

    plot_detail::begin_svg(out, title);
    plot_detail::draw_frame(out, frame);
    std::vector<std::string> names;
    for (std::size_t s = 0; s < series.size(); ++s) {
        plot_detail::draw_polyline(out, frame, xs, series[s].second,
                                   plot_detail::series_color(s));
        for (std::size_t i = 0; i < xs.size(); ++i)
            out << "<circle cx=\"" << plot_detail::fmt(frame.px(xs[i])) << "\" cy=\""
                << plot_detail::fmt(frame.py(series[s].second[i])) << "\" r=\"2.5\" fill=\""
                << plot_detail::series_color(s) << "\"/>\n";
        names.push_back(series[s].first);
    }
    plot_detail::draw_legend(out, names);
    out << "</svg>\n";
    if (!out) throw std::runtime_error("write_line_chart_svg: write failed for '" + path + "'");
}

}  // namespace gmotv
