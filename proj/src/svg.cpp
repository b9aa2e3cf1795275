#include "sweepdyn/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "io_util.hpp"
#include "sweepdyn/errors.hpp"

namespace sweepdyn {

namespace {

constexpr double k_margin_left = 70.0;
constexpr double k_margin_right = 24.0;
constexpr double k_margin_top = 46.0;
constexpr double k_margin_bottom = 56.0;

constexpr const char* k_palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c",
                                     "#d62728", "#9467bd", "#8c564b"};
constexpr std::size_t k_palette_size = std::size(k_palette);

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void include(double v) {
        if (!std::isfinite(v)) {
            return;
        }
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }

    /// Widens degenerate or empty ranges so the mapping stays well defined.
    void regularize(double pad_fraction) {
        if (!(lo <= hi)) {
            lo = 0.0;
            hi = 1.0;
        }
        if (lo == hi) {
            lo -= 1.0;
            hi += 1.0;
        }
        const double pad = (hi - lo) * pad_fraction;
        lo -= pad;
        hi += pad;
    }

    [[nodiscard]] double span() const { return hi - lo; }
};

/// Largest 1/2/5 x 10^k step that produces at most `max_ticks` intervals.
double nice_step(double span, int max_ticks) {
    const double raw = span / max_ticks;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (const double m : {1.0, 2.0, 5.0}) {
        if (m * mag >= raw) {
            return m * mag;
        }
    }
    return 10.0 * mag;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

std::string fmt_coord(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string xml_escape(const std::string& text) {
    std::string out;
    for (const char ch : text) {
        switch (ch) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += ch; break;
        }
    }
    return out;
}

std::vector<std::string> component_labels(const Trajectory& traj) {
    if (traj.dim == 3 &&
        (!traj.model || traj.model->kind == ModelKind::turchin_korotayev)) {
        return {"N", "S", "W"};
    }
    if (traj.dim == 2 && (!traj.model || traj.model->kind == ModelKind::lotka_volterra)) {
        return {"R", "C"};
    }
    std::vector<std::string> labels;
    for (std::size_t c = 1; c <= traj.dim; ++c) {
        labels.push_back("y" + std::to_string(c));
    }
    return labels;
}

} // namespace

std::string line_plot_svg(const std::vector<PlotSeries>& series,
                          const PlotOptions& options) {
    if (series.empty()) {
        raise(Errc::invalid_config, "plot needs at least one series");
    }
    Range xr;
    Range yr;
    for (const auto& s : series) {
        if (s.x.size() != s.y.size()) {
            raise(Errc::invalid_config, "plot series \"" + s.label +
                                            "\" has mismatched x/y lengths");
        }
        if (s.x.empty()) {
            raise(Errc::invalid_config, "plot series \"" + s.label + "\" is empty");
        }
        for (const double v : s.x) {
            xr.include(v);
        }
        for (const double v : s.y) {
            yr.include(v);
        }
    }
    xr.regularize(0.0);
    yr.regularize(0.05);

    const double width = options.width;
    const double height = options.height;
    const double plot_w = width - k_margin_left - k_margin_right;
    const double plot_h = height - k_margin_top - k_margin_bottom;
    const auto map_x = [&](double v) {
        return k_margin_left + (v - xr.lo) / xr.span() * plot_w;
    };
    const auto map_y = [&](double v) {
        return k_margin_top + plot_h - (v - yr.lo) / yr.span() * plot_h;
    };

    std::string svg;
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(width) +
           "\" height=\"" + fmt(height) + "\" viewBox=\"0 0 " + fmt(width) + " " +
           fmt(height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // Grid and ticks.
    const double x_step = nice_step(xr.span(), 8);
    const double y_step = nice_step(yr.span(), 6);
    svg += "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"#333\">\n";
    for (double v = std::ceil(xr.lo / x_step) * x_step; v <= xr.hi + 1e-9 * xr.span();
         v += x_step) {
        const std::string px = fmt_coord(map_x(v));
        svg += "<line x1=\"" + px + "\" y1=\"" + fmt_coord(k_margin_top) + "\" x2=\"" +
               px + "\" y2=\"" + fmt_coord(k_margin_top + plot_h) +
               "\" stroke=\"#e5e5e5\"/>\n";
        svg += "<text x=\"" + px + "\" y=\"" + fmt_coord(k_margin_top + plot_h + 18) +
               "\" text-anchor=\"middle\">" + fmt(v) + "</text>\n";
    }
    for (double v = std::ceil(yr.lo / y_step) * y_step; v <= yr.hi + 1e-9 * yr.span();
         v += y_step) {
        const std::string py = fmt_coord(map_y(v));
        svg += "<line x1=\"" + fmt_coord(k_margin_left) + "\" y1=\"" + py + "\" x2=\"" +
               fmt_coord(k_margin_left + plot_w) + "\" y2=\"" + py +
               "\" stroke=\"#e5e5e5\"/>\n";
        svg += "<text x=\"" + fmt_coord(k_margin_left - 8) + "\" y=\"" + py +
               "\" text-anchor=\"end\" dominant-baseline=\"middle\">" + fmt(v) +
               "</text>\n";
    }
    svg += "</g>\n";

    // Frame.
    svg += "<rect x=\"" + fmt_coord(k_margin_left) + "\" y=\"" + fmt_coord(k_margin_top) +
           "\" width=\"" + fmt_coord(plot_w) + "\" height=\"" + fmt_coord(plot_h) +
           "\" fill=\"none\" stroke=\"#333\"/>\n";

    // Curves; non-finite samples break a curve into separate polylines.
    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const char* color = k_palette[si % k_palette_size];
        std::string points;
        const auto flush = [&]() {
            if (!points.empty()) {
                svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
                       "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
                points.clear();
            }
        };
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
                flush();
                continue;
            }
            if (!points.empty()) {
                points += ' ';
            }
            points += fmt_coord(map_x(s.x[i])) + "," + fmt_coord(map_y(s.y[i]));
        }
        flush();
    }

    // Legend (skipped when every label is empty).
    const bool any_label = std::any_of(series.begin(), series.end(),
                                       [](const PlotSeries& s) { return !s.label.empty(); });
    if (any_label) {
        const double lx = k_margin_left + plot_w - 110.0;
        double ly = k_margin_top + 14.0;
        svg += "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"#333\">\n";
        for (std::size_t si = 0; si < series.size(); ++si) {
            const char* color = k_palette[si % k_palette_size];
            svg += "<line x1=\"" + fmt_coord(lx) + "\" y1=\"" + fmt_coord(ly - 4) +
                   "\" x2=\"" + fmt_coord(lx + 24) + "\" y2=\"" + fmt_coord(ly - 4) +
                   "\" stroke=\"" + std::string(color) + "\" stroke-width=\"2\"/>\n";
            svg += "<text x=\"" + fmt_coord(lx + 30) + "\" y=\"" + fmt_coord(ly) + "\">" +
                   xml_escape(series[si].label) + "</text>\n";
            ly += 18.0;
        }
        svg += "</g>\n";
    }

    // Titles.
    svg += "<g font-family=\"sans-serif\" fill=\"#111\">\n";
    if (!options.title.empty()) {
        svg += "<text x=\"" + fmt_coord(width / 2) +
               "\" y=\"24\" font-size=\"16\" text-anchor=\"middle\">" +
               xml_escape(options.title) + "</text>\n";
    }
    if (!options.x_label.empty()) {
        svg += "<text x=\"" + fmt_coord(k_margin_left + plot_w / 2) + "\" y=\"" +
               fmt_coord(height - 14) + "\" font-size=\"13\" text-anchor=\"middle\">" +
               xml_escape(options.x_label) + "</text>\n";
    }
    if (!options.y_label.empty()) {
        svg += "<text x=\"18\" y=\"" + fmt_coord(k_margin_top + plot_h / 2) +
               "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
               fmt_coord(k_margin_top + plot_h / 2) + ")\">" +
               xml_escape(options.y_label) + "</text>\n";
    }
    svg += "</g>\n</svg>\n";
    return svg;
}

void write_line_svg(const std::filesystem::path& path,
                    const std::vector<PlotSeries>& series, const PlotOptions& options) {
    detail::atomic_write_file(path, line_plot_svg(series, options));
}

std::string trajectory_plot_svg(const Trajectory& traj, PlotOptions options) {
    if (traj.dim == 0 || traj.size() == 0) {
        raise(Errc::invalid_config, "cannot plot an empty trajectory");
    }
    const auto labels = component_labels(traj);
    std::vector<PlotSeries> series;
    for (std::size_t c = 0; c < traj.dim; ++c) {
        series.push_back({labels[c], traj.times, traj.column(c)});
    }
    if (options.x_label.empty()) {
        options.x_label = "t";
    }
    return line_plot_svg(series, options);
}

std::string phase_plot_svg(const Trajectory& traj, std::size_t x_component,
                           std::size_t y_component, PlotOptions options) {
    if (x_component >= traj.dim || y_component >= traj.dim) {
        raise(Errc::invalid_config, "phase plot component out of range");
    }
    const auto labels = component_labels(traj);
    if (options.x_label.empty()) {
        options.x_label = labels[x_component];
    }
    if (options.y_label.empty()) {
        options.y_label = labels[y_component];
    }
    std::vector<PlotSeries> series;
    series.push_back({"", traj.column(x_component), traj.column(y_component)});
    return line_plot_svg(series, options);
}

void write_trajectory_svg(const std::filesystem::path& path, const Trajectory& traj,
                          PlotOptions options) {
    detail::atomic_write_file(path, trajectory_plot_svg(traj, std::move(options)));
}

void write_phase_svg(const std::filesystem::path& path, const Trajectory& traj,
                     std::size_t x_component, std::size_t y_component,
                     PlotOptions options) {
    detail::atomic_write_file(
        path, phase_plot_svg(traj, x_component, y_component, std::move(options)));
}

} // namespace sweepdyn
