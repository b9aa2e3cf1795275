#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sweepdyn/integrator.hpp"
#include "sweepdyn/model.hpp"

namespace sweepdyn {

/// Outcome of the sweep test at one schedule breakpoint.
struct SweepEvent {
    double breakpoint_time = 0.0;
    double pre_envelope_max = 0.0;  ///< max of the component over (bp - w, bp]
    double post_envelope_max = 0.0; ///< max of the component over (bp, bp + w]
    double ratio = 0.0;             ///< post / pre
    bool detected = false;          ///< ratio >= threshold
    double window = 0.0;            ///< window w actually used
};

/// Detector tuning. When `window` is unset it is estimated per breakpoint as
/// the mean spacing of envelope maxima over (previous breakpoint or start,
/// bp], i.e. one full pre-breakpoint oscillation period, falling back to
/// `fallback_window` when fewer than two maxima exist there.
struct SweepConfig {
    double threshold = 1.5;
    std::optional<double> window;
    double fallback_window = 500.0;

    /// Throws invalid_config unless threshold > 1 and windows are positive.
    void validate() const;
};

/// Strict local maxima of the sampled component as (t, value) pairs; plateau
/// ties resolve to the earliest sample, series endpoints are never maxima.
/// Throws invalid_config with fewer than 3 samples or a bad component index.
[[nodiscard]] std::vector<std::pair<double, double>>
envelope_maxima(const Trajectory& traj, std::size_t component);

/// Windowed max-ratio sweep test at each breakpoint. Throws
/// window_out_of_range when a breakpoint's window does not fit inside the
/// trajectory's time span.
[[nodiscard]] std::vector<SweepEvent>
detect_sweeps(const Trajectory& traj, std::span<const double> breakpoints,
              const SweepConfig& cfg = {}, std::size_t component = 0);

/// Multiplicative factors applied to a base parameter for phases 2 and 3.
struct PhaseFactors {
    double phase2 = 1.0;
    double phase3 = 1.0;
};

struct ScanFactor {
    const char* name;
    PhaseFactors factors;
};

/// The nine scanned parameters in canonical order
/// (a, b, c, kmax, r0, alpha, beta, delta, rho0) with their phase factors.
[[nodiscard]] const std::array<ScanFactor, 9>& scan_factor_table();

/// Returns `base` with the phase factor applied to one parameter by
/// canonical index.
[[nodiscard]] TkParams apply_scan_factor(TkParams base, std::size_t param_index,
                                         double factor);

/// Scan run geometry and tuning. Defaults mirror the three-phase experiment:
/// phases switch at t = 1000 and t = 2000 over the span [1, 4000].
struct ScanOptions {
    std::size_t max_subset_size = 4;
    unsigned threads = 0; ///< 0 = hardware concurrency
    SolverConfig solver;  ///< nonnegative mask is forced on all components
    SweepConfig sweep;
    double t0 = 1.0;
    double t1 = 4000.0;
    std::array<double, 2> breakpoints{1000.0, 2000.0};
    std::size_t grid_points = 4000;
    std::array<double, 3> y0{1.0, 0.0, 1.0};

    void validate() const;
};

/// One subset's scan outcome. `index` is the canonical enumeration position
/// (sizes ascending, lexicographic combinations within a size).
struct ScanResult {
    std::size_t index = 0;
    std::vector<std::string> subset;
    std::vector<SweepEvent> events;
    double max_ratio = 0.0;
    bool any_detected = false;
    bool failed = false;
    std::string error;
};

/// Runs every subset of the nine parameters with size 1..max_subset_size
/// (255 subsets at the default 4) through the three-phase schedule and the
/// sweep detector. Per-subset integration failures are recorded in the row,
/// never thrown. Results are ranked by max_ratio descending with canonical
/// index as the tie-break; the ranking is deterministic and independent of
/// the thread count.
[[nodiscard]] std::vector<ScanResult> scan_subsets(const TkParams& base,
                                                   const ScanOptions& opts = {});

} // namespace sweepdyn
