#pragma once
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "vec.hpp"

namespace lzsweep {

// Minimal line-plot SVG writer: linear or log axes, decade ticks, legend.
// Enough to reproduce the pulse / probability panels without an external
// plotting dependency.
struct PlotSeries {
    std::string label;
    std::vector<double> x, y;
    std::string color = "#1f77b4";
};

struct LinePlot {
    std::string title, xlabel, ylabel;
    bool logx = false, logy = false;
    std::vector<PlotSeries> series;
    int width = 760, height = 520;

    void add(const std::string& label, const std::vector<double>& x,
             const std::vector<double>& y, const std::string& color) {
        series.push_back({label, x, y, color});
    }
};

namespace detail {
inline std::string fmt_tick(double v) {
    std::ostringstream s;
    if (v != 0 && (std::abs(v) < 1e-3 || std::abs(v) >= 1e4))
        s << std::scientific << std::setprecision(0) << v;
    else
        s << std::defaultfloat << std::setprecision(4) << v;
    return s.str();
}
}  // namespace detail

inline void write_svg_plot(const LinePlot& plot, const std::string& path) {
    const double ml = 70, mr = 20, mt = 36, mb = 52;
    double pw = plot.width - ml - mr, ph = plot.height - mt - mb;

    auto tx = [&](double v) { return plot.logx ? std::log10(v) : v; };
    auto ty = [&](double v) { return plot.logy ? std::log10(v) : v; };
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : plot.series)
        for (size_t i = 0; i < s.x.size(); ++i) {
            if (plot.logx && s.x[i] <= 0) continue;
            if (plot.logy && s.y[i] <= 0) continue;
            xmin = std::min(xmin, tx(s.x[i]));
            xmax = std::max(xmax, tx(s.x[i]));
            ymin = std::min(ymin, ty(s.y[i]));
            ymax = std::max(ymax, ty(s.y[i]));
        }
    if (xmin > xmax) {
        xmin = 0;
        xmax = 1;
    }
    if (ymin > ymax) {
        ymin = 0;
        ymax = 1;
    }
    if (xmax - xmin < 1e-12) {
        xmin -= 0.5;
        xmax += 0.5;
    }
    if (ymax - ymin < 1e-12) {
        ymin -= 0.5;
        ymax += 0.5;
    }
    double xpad = 0.03 * (xmax - xmin), ypad = 0.05 * (ymax - ymin);
    xmin -= xpad;
    xmax += xpad;
    ymin -= ypad;
    ymax += ypad;

    auto px = [&](double v) { return ml + (tx(v) - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double v) {
        return mt + ph - (ty(v) - ymin) / (ymax - ymin) * ph;
    };

    std::ofstream f(path);
    if (!f) throw input_error("cannot open for writing: " + path);
    f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << plot.width
      << "\" height=\"" << plot.height << "\">\n";
    f << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    f << "<text x=\"" << plot.width / 2 << "\" y=\"20\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"15\">"
      << plot.title << "</text>\n";

    // frame
    f << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw
      << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"black\"/>\n";

    auto ticks = [&](double lo, double hi, bool logscale) {
        std::vector<double> out;
        if (logscale) {
            for (int d = static_cast<int>(std::floor(lo));
                 d <= static_cast<int>(std::ceil(hi)); ++d)
                if (d >= lo - 1e-9 && d <= hi + 1e-9)
                    out.push_back(std::pow(10.0, d));
        } else {
            double span = hi - lo;
            double step = std::pow(10.0, std::floor(std::log10(span / 4)));
            if (span / step > 8) step *= 2;
            if (span / step > 8) step *= 2.5;
            for (double v = std::ceil(lo / step) * step; v <= hi + 1e-12 * span;
                 v += step)
                out.push_back(v);
        }
        return out;
    };
    for (double v : ticks(xmin, xmax, plot.logx)) {
        double X = plot.logx ? px(v) : ml + (v - xmin) / (xmax - xmin) * pw;
        f << "<line x1=\"" << X << "\" y1=\"" << mt + ph << "\" x2=\"" << X
          << "\" y2=\"" << mt + ph + 5 << "\" stroke=\"black\"/>\n";
        f << "<text x=\"" << X << "\" y=\"" << mt + ph + 20
          << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
             "font-size=\"11\">"
          << detail::fmt_tick(v) << "</text>\n";
    }
    for (double v : ticks(ymin, ymax, plot.logy)) {
        double Y = plot.logy ? py(v) : mt + ph - (v - ymin) / (ymax - ymin) * ph;
        f << "<line x1=\"" << ml - 5 << "\" y1=\"" << Y << "\" x2=\"" << ml
          << "\" y2=\"" << Y << "\" stroke=\"black\"/>\n";
        f << "<text x=\"" << ml - 8 << "\" y=\"" << Y + 4
          << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
             "font-size=\"11\">"
          << detail::fmt_tick(v) << "</text>\n";
    }
    f << "<text x=\"" << ml + pw / 2 << "\" y=\"" << plot.height - 10
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
      << plot.xlabel << "</text>\n";
    f << "<text x=\"16\" y=\"" << mt + ph / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
         "transform=\"rotate(-90 16 "
      << mt + ph / 2 << ")\">" << plot.ylabel << "</text>\n";

    for (const auto& s : plot.series) {
        f << "<polyline fill=\"none\" stroke=\"" << s.color
          << "\" stroke-width=\"1.4\" points=\"";
        size_t step = std::max<size_t>(1, s.x.size() / 4000);
        for (size_t i = 0; i < s.x.size(); i += step) {
            if (plot.logx && s.x[i] <= 0) continue;
            if (plot.logy && s.y[i] <= 0) continue;
            f << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
        }
        f << "\"/>\n";
    }
    double ly = mt + 14;
    for (const auto& s : plot.series) {
        f << "<line x1=\"" << ml + pw - 150 << "\" y1=\"" << ly << "\" x2=\""
          << ml + pw - 125 << "\" y2=\"" << ly << "\" stroke=\"" << s.color
          << "\" stroke-width=\"2\"/>\n";
        f << "<text x=\"" << ml + pw - 118 << "\" y=\"" << ly + 4
          << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.label
          << "</text>\n";
        ly += 18;
    }
    f << "</svg>\n";
}

}  // namespace lzsweep
