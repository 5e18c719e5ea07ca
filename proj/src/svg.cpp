#include "spikelock/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace spikelock::svg {

namespace {

constexpr double width = 800.0;
constexpr double height = 400.0;
constexpr double margin_left = 60.0;
constexpr double margin_right = 20.0;
constexpr double margin_top = 36.0;
constexpr double margin_bottom = 46.0;

const char* const palette[] = {"#1f6fb2", "#d9541e", "#3a8f3a", "#8a4fb0",
                               "#b0813a", "#47a0a8", "#c14f6e", "#6b6b6b"};
constexpr std::size_t palette_size = sizeof(palette) / sizeof(palette[0]);

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

struct Mapper {
    double lo, hi, px_lo, px_hi;
    double operator()(double v) const {
        return px_lo + (v - lo) / (hi - lo) * (px_hi - px_lo);
    }
};

Mapper make_mapper(double lo, double hi, double px_lo, double px_hi) {
    if (!(hi > lo)) { // degenerate range: pad so the data sits mid-plot
        lo -= 1.0;
        hi += 1.0;
    }
    return Mapper{lo, hi, px_lo, px_hi};
}

void open_svg(std::ostream& out, const std::string& title) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' ' << height
        << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"15\">"
        << title << "</text>\n";
}

void draw_frame(std::ostream& out, const Mapper& mx, const Mapper& my,
                const std::string& x_label, const std::string& y_label) {
    out << "<rect x=\"" << margin_left << "\" y=\"" << margin_top << "\" width=\""
        << width - margin_left - margin_right << "\" height=\""
        << height - margin_top - margin_bottom
        << "\" fill=\"none\" stroke=\"#444\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << (margin_left + width - margin_right) / 2 << "\" y=\""
        << height - 10
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
        << x_label << "</text>\n";
    out << "<text x=\"16\" y=\"" << (margin_top + height - margin_bottom) / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
           "transform=\"rotate(-90 16 "
        << (margin_top + height - margin_bottom) / 2 << ")\">" << y_label
        << "</text>\n";
    // endpoint ticks only; this is a sketch, not a publication axis
    out << "<text x=\"" << margin_left << "\" y=\"" << height - margin_bottom + 16
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << tick(mx.lo) << "</text>\n";
    out << "<text x=\"" << width - margin_right << "\" y=\""
        << height - margin_bottom + 16
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << tick(mx.hi) << "</text>\n";
    out << "<text x=\"" << margin_left - 6 << "\" y=\"" << height - margin_bottom + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << tick(my.lo) << "</text>\n";
    out << "<text x=\"" << margin_left - 6 << "\" y=\"" << margin_top + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << tick(my.hi) << "</text>\n";
}

} // namespace

void write_lines(std::ostream& out, const std::vector<Series>& series,
                 const std::string& title, const std::string& x_label,
                 const std::string& y_label) {
    double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
    double y_lo = x_lo, y_hi = -x_lo;
    for (const Series& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            x_lo = std::min(x_lo, s.x[i]);
            x_hi = std::max(x_hi, s.x[i]);
            y_lo = std::min(y_lo, s.y[i]);
            y_hi = std::max(y_hi, s.y[i]);
        }
    if (!std::isfinite(x_lo)) { // nothing to draw
        x_lo = y_lo = 0.0;
        x_hi = y_hi = 1.0;
    }

    const Mapper mx = make_mapper(x_lo, x_hi, margin_left, width - margin_right);
    const Mapper my = make_mapper(y_lo, y_hi, height - margin_bottom, margin_top);

    open_svg(out, title);
    draw_frame(out, mx, my, x_label, y_label);
    for (std::size_t k = 0; k < series.size(); ++k) {
        const Series& s = series[k];
        if (s.x.empty())
            continue;
        out << "<polyline fill=\"none\" stroke=\"" << palette[k % palette_size]
            << "\" stroke-width=\"1.2\" points=\"";
        // thin long traces so file size stays sane (at most ~4000 points)
        const std::size_t stride = std::max<std::size_t>(1, s.x.size() / 4000);
        for (std::size_t i = 0; i < s.x.size(); i += stride)
            out << num(mx(s.x[i])) << ',' << num(my(s.y[i])) << ' ';
        out << num(mx(s.x.back())) << ',' << num(my(s.y.back()));
        out << "\"/>\n";
    }
    out << "</svg>\n";
}

void write_raster(std::ostream& out, const std::vector<std::pair<int, double>>& rows,
                  int n_trials, double t_end, const std::string& title) {
    const Mapper mx = make_mapper(0.0, t_end, margin_left, width - margin_right);
    const Mapper my = make_mapper(-0.5, n_trials - 0.5, height - margin_bottom, margin_top);

    open_svg(out, title);
    draw_frame(out, mx, my, "time (ms)", "trial");
    const double half = (my(0.0) - my(1.0)) * 0.35;
    for (const auto& [trial, time] : rows) {
        const double x = mx(time);
        const double y = my(static_cast<double>(trial));
        out << "<line x1=\"" << num(x) << "\" y1=\"" << num(y - half) << "\" x2=\""
            << num(x) << "\" y2=\"" << num(y + half)
            << "\" stroke=\"#1f3a5f\" stroke-width=\"1\"/>\n";
    }
    out << "</svg>\n";
}

} // namespace spikelock::svg
