#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sweepdyn/analysis.hpp"
#include "sweepdyn/integrator.hpp"
#include "sweepdyn/sweep.hpp"

namespace sweepdyn {

/// Canonical JSON text for a stability report (two-space indent, LF line
/// endings, trailing newline). Top-level keys: critical_point {N, S, W},
/// jacobian (3x3 nested arrays, row-major), eigenvalues (list of {re, im}),
/// classification (string), validity {condition10, condition11}, char_poly
/// (4 coefficients, descending degree), solver_stats {steps_accepted,
/// steps_rejected, rhs_evaluations}.
[[nodiscard]] std::string stability_report_json(const StabilityReport& report,
                                                const SolverStats& stats = {});

/// Canonical JSON text for ranked scan results: a list of rows, each with
/// rank, index, subset, max_ratio, any_detected, failed, error, and the
/// per-breakpoint events.
[[nodiscard]] std::string scan_report_json(const std::vector<ScanResult>& results);

/// Atomic file variants (temp file + rename).
void write_stability_report(const std::filesystem::path& path,
                            const StabilityReport& report,
                            const SolverStats& stats = {});
void write_scan_report(const std::filesystem::path& path,
                       const std::vector<ScanResult>& results);

} // namespace sweepdyn
