#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sweepdyn/integrator.hpp"

namespace sweepdyn {

/// One labeled curve; x and y must have equal length.
struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct PlotOptions {
    int width = 960;
    int height = 560;
    std::string title;
    std::string x_label;
    std::string y_label;
};

/// Renders labeled curves as a self-contained SVG document: framed plot area,
/// tick marks and grid, one polyline per series, and a legend. Non-finite
/// samples split a curve rather than corrupting it.
/// Throws invalid_config on empty or ragged input.
[[nodiscard]] std::string line_plot_svg(const std::vector<PlotSeries>& series,
                                        const PlotOptions& options = {});

void write_line_svg(const std::filesystem::path& path,
                    const std::vector<PlotSeries>& series,
                    const PlotOptions& options = {});

/// Time-series plot of every trajectory component against time. Component
/// labels follow the model ("N","S","W" / "R","C"), falling back to "y1"...
[[nodiscard]] std::string trajectory_plot_svg(const Trajectory& traj,
                                              PlotOptions options = {});

/// Phase-plane plot of one component against another.
[[nodiscard]] std::string phase_plot_svg(const Trajectory& traj,
                                         std::size_t x_component,
                                         std::size_t y_component,
                                         PlotOptions options = {});

/// Atomic file variants (temp file + rename).
void write_trajectory_svg(const std::filesystem::path& path, const Trajectory& traj,
                          PlotOptions options = {});
void write_phase_svg(const std::filesystem::path& path, const Trajectory& traj,
                     std::size_t x_component, std::size_t y_component,
                     PlotOptions options = {});

} // namespace sweepdyn
