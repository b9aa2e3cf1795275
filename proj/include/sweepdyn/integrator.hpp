#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sweepdyn/model.hpp"

namespace sweepdyn {

/// Tolerances and step policy for the adaptive embedded Runge-Kutta solver.
struct SolverConfig {
    double rel_tol = 1e-6;
    double abs_tol = 1e-10;
    double h_init = 0.0;  ///< initial step size; 0 selects one automatically
    double h_min = 1e-10; ///< below this an unmet tolerance is an error
    double h_max = 0.0;   ///< upper step bound; 0 means uncapped
    std::uint64_t max_steps = 5'000'000; ///< attempted-step budget per run
    std::vector<bool> nonnegative; ///< per-component projection mask (empty = none)

    /// Throws invalid_config on non-positive tolerances, inverted step bounds,
    /// a zero budget, or a mask whose length is neither 0 nor dim.
    void validate(std::size_t dim) const;
};

struct SolverStats {
    std::uint64_t steps_accepted = 0;
    std::uint64_t steps_rejected = 0;
    std::uint64_t rhs_evaluations = 0;
};

struct TimeSpan {
    double t0 = 0.0;
    double t1 = 0.0;
};

/// Sampled solution: `values` stores one row of `dim` components per time.
struct Trajectory {
    std::size_t dim = 0;
    std::vector<double> times;
    std::vector<double> values;
    std::optional<ModelSpec> model;
    std::string schedule_id;
    SolverStats stats;

    [[nodiscard]] std::size_t size() const { return times.size(); }
    [[nodiscard]] double value(std::size_t i, std::size_t comp) const {
        return values[i * dim + comp];
    }
    /// One component as a contiguous series (copy).
    [[nodiscard]] std::vector<double> column(std::size_t comp) const;
};

/// Outcome of a single embedded-pair step attempt.
struct StepResult {
    std::vector<double> y_next;  ///< fifth-order solution at t + h
    std::vector<double> error;   ///< componentwise embedded error estimate
    double error_norm = 0.0;     ///< max_i |error_i| / (abs_tol + rel_tol*|y_i|)
    double h_suggest = 0.0;      ///< safety-factored next step, growth in [0.2, 5]
};

/// One Dormand-Prince 5(4) step from (t, y) with step h > 0. Pure; the caller
/// decides acceptance (error_norm <= 1).
[[nodiscard]] StepResult step(const RhsFn& rhs, double t, std::span<const double> y,
                              double h, const SolverConfig& cfg);

/// Integrates an arbitrary vector field over span, restarting (fresh step-size
/// estimation) at each interior breakpoint so parameter discontinuities are
/// never stepped across. Samples onto output_grid (strictly increasing, inside
/// the span) via cubic Hermite interpolation of accepted steps, or returns the
/// accepted steps themselves when the grid is empty. Components flagged in
/// cfg.nonnegative are projected to max(value, 0) after every accepted step.
[[nodiscard]] Trajectory integrate_rhs(const RhsFn& rhs, std::size_t dim,
                                       std::span<const double> y0, TimeSpan span,
                                       const SolverConfig& cfg,
                                       std::span<const double> breakpoints = {},
                                       std::span<const double> output_grid = {});

/// Schedule-driven integration of a model: segments are cut at every schedule
/// breakpoint inside the span; each segment runs with its constant parameters.
/// The schedule must cover [span.t0, span.t1].
[[nodiscard]] Trajectory integrate(const ModelSpec& model,
                                   const ParamSchedule& schedule,
                                   std::span<const double> y0, TimeSpan span,
                                   const SolverConfig& cfg,
                                   std::span<const double> output_grid = {});

/// n evenly spaced sample times from t0 to t1 inclusive (n >= 2).
[[nodiscard]] std::vector<double> uniform_grid(double t0, double t1, std::size_t n);

} // namespace sweepdyn
