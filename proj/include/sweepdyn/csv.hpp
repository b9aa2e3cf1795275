#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sweepdyn/integrator.hpp"
#include "sweepdyn/sweep.hpp"

namespace sweepdyn {

/// Serializes a trajectory as comma-delimited text: a header row named after
/// the model ("t,N,S,W" for the demographic model, "t,R,C" for predator-prey,
/// "t,y1,..." otherwise), one row per sample, 17-significant-digit numbers,
/// "." decimal separator, LF line endings.
[[nodiscard]] std::string trajectory_csv_text(const Trajectory& traj);

/// Atomic file variant of trajectory_csv_text.
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);

/// Parses text produced by trajectory_csv_text. The column count determines
/// the dimension; a "t,N,S,W" or "t,R,C" header restores the model tag.
/// Values round-trip exactly (17 significant digits suffice for doubles).
/// Throws invalid_config on malformed input.
[[nodiscard]] Trajectory trajectory_from_csv_text(const std::string& text);

[[nodiscard]] Trajectory read_trajectory_csv(const std::filesystem::path& path);

/// Serializes scan results, one row per subset in the given (ranked) order.
/// Fixed columns rank, index, subset, size, max_ratio, any_detected, failed,
/// error are followed by per-breakpoint event columns (time, pre/post
/// envelope max, ratio, window, detected); failed rows leave event cells
/// empty. Fields containing delimiters are quoted.
[[nodiscard]] std::string scan_csv_text(const std::vector<ScanResult>& results);

void write_scan_csv(const std::filesystem::path& path,
                    const std::vector<ScanResult>& results);

} // namespace sweepdyn
