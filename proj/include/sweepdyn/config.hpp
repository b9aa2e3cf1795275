#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sweepdyn/integrator.hpp"
#include "sweepdyn/model.hpp"

namespace sweepdyn {

/// Which artifacts a run should emit.
struct OutputRequests {
    bool trajectory_csv = true;
    bool analysis_json = false;
    bool plot_svg = false;
};

/// A fully described run: model, initial state, time span, solver settings,
/// parameter schedule, sampling grid, and requested outputs. This is the
/// in-memory form of the JSON config documents the command line consumes.
struct RunConfig {
    ModelSpec model;
    std::vector<double> y0;
    TimeSpan span;
    std::size_t grid_points = 0; ///< 0 = emit raw accepted steps
    SolverConfig solver;
    ParamSchedule schedule;
    OutputRequests outputs;
    std::string output_dir = ".";

    /// Cross-field validation (model/y0/schedule agreement, span coverage,
    /// grid sanity). Throws invalid_config naming the offending field.
    void validate() const;
};

/// Names of the shipped scenario presets, in canonical order.
[[nodiscard]] const std::vector<std::string>& preset_names();

[[nodiscard]] bool is_preset(std::string_view name);

/// Fully materialized config for a named preset.
/// Throws invalid_config on an unknown name.
[[nodiscard]] RunConfig preset(std::string_view name);

/// Canonical JSON serialization: two-space indent, alphabetically ordered
/// keys, LF line endings, shortest round-tripping number format, trailing
/// newline. Byte-stable for golden-file comparison.
[[nodiscard]] std::string to_json_text(const RunConfig& cfg);

/// Strict JSON parse: every object is checked against its schema's key set
/// and unknown keys are rejected with a message naming the key and its
/// location. Omitted optional fields take their documented defaults.
/// A document containing a "preset" key starts from that preset's
/// materialized config; any further keys are applied on top as a JSON
/// merge-patch (objects merge recursively, arrays and scalars replace), and
/// the merged document is re-validated strictly.
[[nodiscard]] RunConfig config_from_json_text(const std::string& text);

/// Reads and parses a config file (see config_from_json_text).
[[nodiscard]] RunConfig load_config(const std::filesystem::path& path);

/// Writes the canonical JSON form atomically (temp file + rename).
void save_config(const std::filesystem::path& path, const RunConfig& cfg);

} // namespace sweepdyn
