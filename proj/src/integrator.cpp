#include "sweepdyn/integrator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace sweepdyn {

namespace {

// Dormand-Prince 5(4) tableau. The pair is first-same-as-last: the seventh
// stage coefficients equal the fifth-order weights, so the stage-7 state *is*
// y_next and its derivative seeds the following step.
constexpr std::array<double, 7> kc = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr std::array<std::array<double, 6>, 7> ka = {{
    {0.0, 0.0, 0.0, 0.0, 0.0, 0.0},
    {1.0 / 5, 0.0, 0.0, 0.0, 0.0, 0.0},
    {3.0 / 40, 9.0 / 40, 0.0, 0.0, 0.0, 0.0},
    {44.0 / 45, -56.0 / 15, 32.0 / 9, 0.0, 0.0, 0.0},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729, 0.0, 0.0},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656, 0.0},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
}};
constexpr std::array<double, 7> kb5 = {35.0 / 384,      0.0,        500.0 / 1113,
                                       125.0 / 192,     -2187.0 / 6784,
                                       11.0 / 84,       0.0};
constexpr std::array<double, 7> kb4 = {5179.0 / 57600,  0.0,        7571.0 / 16695,
                                       393.0 / 640,     -92097.0 / 339200,
                                       187.0 / 2100,    1.0 / 40};

constexpr double k_safety = 0.9;
constexpr double k_shrink_limit = 0.2;
constexpr double k_growth_limit = 5.0;
// Elementary controller exponent: the embedded estimate is fourth order.
constexpr double k_error_exponent = -1.0 / 5.0;

void check_finite(std::span<const double> v, Errc code, const char* what) {
    for (double x : v) {
        if (!std::isfinite(x)) {
            raise(code, std::string(what) + " contains a non-finite value");
        }
    }
}

double controller_factor(double error_norm) {
    if (!(error_norm > 0.0)) {
        return k_growth_limit;
    }
    return std::clamp(k_safety * std::pow(error_norm, k_error_exponent),
                      k_shrink_limit, k_growth_limit);
}

/// Reusable stage workspace for one integration run.
class Stepper {
public:
    Stepper(const RhsFn& rhs, std::size_t dim, const SolverConfig& cfg,
            SolverStats& stats)
        : rhs_(rhs), cfg_(cfg), stats_(stats), dim_(dim) {
        for (auto& stage : k_) {
            stage.assign(dim, 0.0);
        }
        work_.assign(dim, 0.0);
        y_next_.assign(dim, 0.0);
        error_.assign(dim, 0.0);
    }

    void eval(double t, std::span<const double> y, std::span<double> out) {
        rhs_(t, y, out);
        ++stats_.rhs_evaluations;
        check_finite(out, Errc::non_finite_state, "vector field output");
    }

    /// Runs stages 2..7 assuming k[0] already holds f(t, y). Fills y_next,
    /// error, and returns the scaled max-norm of the error estimate.
    double attempt(double t, std::span<const double> y, double h) {
        for (std::size_t i = 1; i < 7; ++i) {
            for (std::size_t d = 0; d < dim_; ++d) {
                double acc = 0.0;
                for (std::size_t j = 0; j < i; ++j) {
                    acc += ka[i][j] * k_[j][d];
                }
                work_[d] = y[d] + h * acc;
            }
            if (i == 6) {
                y_next_ = work_; // FSAL: stage-7 state equals the 5th-order solution
            }
            eval(t + kc[i] * h, work_, k_[i]);
        }
        double norm = 0.0;
        for (std::size_t d = 0; d < dim_; ++d) {
            double acc = 0.0;
            for (std::size_t j = 0; j < 7; ++j) {
                acc += (kb5[j] - kb4[j]) * k_[j][d];
            }
            error_[d] = h * acc;
            const double scale =
                cfg_.abs_tol +
                cfg_.rel_tol * std::max(std::abs(y[d]), std::abs(y_next_[d]));
            norm = std::max(norm, std::abs(error_[d]) / scale);
        }
        return norm;
    }

    [[nodiscard]] std::vector<double>& stage(std::size_t i) { return k_[i]; }
    [[nodiscard]] const std::vector<double>& y_next() const { return y_next_; }
    [[nodiscard]] const std::vector<double>& error() const { return error_; }

private:
    const RhsFn& rhs_;
    const SolverConfig& cfg_;
    SolverStats& stats_;
    std::size_t dim_;
    std::array<std::vector<double>, 7> k_;
    std::vector<double> work_;
    std::vector<double> y_next_;
    std::vector<double> error_;
};

/// Accepted nodes of one schedule segment: times, states, derivatives.
struct SegmentNodes {
    double t0 = 0.0;
    double t1 = 0.0;
    std::vector<double> ts;
    std::vector<double> ys;
    std::vector<double> fs;
};

double initial_step(std::span<const double> y, std::span<const double> f,
                    double span_length, const SolverConfig& cfg) {
    if (cfg.h_init > 0.0) {
        return std::min(cfg.h_init, span_length);
    }
    double d0 = 0.0;
    double d1 = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double scale = cfg.abs_tol + cfg.rel_tol * std::abs(y[i]);
        d0 += (y[i] / scale) * (y[i] / scale);
        d1 += (f[i] / scale) * (f[i] / scale);
    }
    d0 = std::sqrt(d0 / static_cast<double>(y.size()));
    d1 = std::sqrt(d1 / static_cast<double>(y.size()));
    double h = (d0 > 1e-12 && d1 > 1e-12) ? 0.01 * d0 / d1 : 0.01 * span_length;
    h = std::min(h, span_length);
    if (cfg.h_max > 0.0) {
        h = std::min(h, cfg.h_max);
    }
    return h;
}

/// Adaptive loop over one segment with constant right-hand side. `y` holds the
/// segment's initial state on entry and its final state on exit.
void integrate_segment(const RhsFn& rhs, double t0, double t1,
                       std::vector<double>& y, const SolverConfig& cfg,
                       SolverStats& stats, std::uint64_t& attempts,
                       SegmentNodes& nodes) {
    const std::size_t dim = y.size();
    Stepper stepper(rhs, dim, cfg, stats);

    nodes.t0 = t0;
    nodes.t1 = t1;
    auto push_node = [&](double t, const std::vector<double>& state,
                         const std::vector<double>& deriv) {
        nodes.ts.push_back(t);
        nodes.ys.insert(nodes.ys.end(), state.begin(), state.end());
        nodes.fs.insert(nodes.fs.end(), deriv.begin(), deriv.end());
    };

    stepper.eval(t0, y, stepper.stage(0));
    push_node(t0, y, stepper.stage(0));

    double t = t0;
    double h = initial_step(y, stepper.stage(0), t1 - t0, cfg);

    while (t < t1) {
        const double remaining = t1 - t;
        const bool final_step = h >= remaining;
        if (final_step) {
            h = remaining;
        }
        if (attempts >= cfg.max_steps) {
            raise(Errc::step_budget_exceeded,
                  "step budget of " + std::to_string(cfg.max_steps) +
                      " attempted steps exhausted at t = " + std::to_string(t));
        }
        ++attempts;

        const double norm = stepper.attempt(t, y, h);
        const double factor = controller_factor(norm);

        if (norm <= 1.0) {
            ++stats.steps_accepted;
            t = final_step ? t1 : t + h;
            bool projected = false;
            y = stepper.y_next();
            if (!cfg.nonnegative.empty()) {
                for (std::size_t d = 0; d < dim; ++d) {
                    if (cfg.nonnegative[d] && y[d] < 0.0) {
                        y[d] = 0.0;
                        projected = true;
                    }
                }
            }
            if (projected) {
                // The projected state invalidates the FSAL derivative.
                stepper.eval(t, y, stepper.stage(0));
            } else {
                stepper.stage(0) = stepper.stage(6);
            }
            push_node(t, y, stepper.stage(0));
        } else {
            ++stats.steps_rejected;
        }

        h *= factor;
        if (cfg.h_max > 0.0) {
            h = std::min(h, cfg.h_max);
        }
        if (t < t1) {
            if (norm > 1.0 && h < cfg.h_min) {
                raise(Errc::step_underflow,
                      "step size " + std::to_string(h) + " fell below h_min = " +
                          std::to_string(cfg.h_min) + " at t = " + std::to_string(t));
            }
            if (t + h == t) {
                raise(Errc::step_underflow,
                      "step size underflowed to zero at t = " + std::to_string(t));
            }
        }
    }
}

void hermite_eval(const SegmentNodes& nodes, std::size_t dim, double tq,
                  std::span<double> out) {
    const auto& ts = nodes.ts;
    auto it = std::upper_bound(ts.begin(), ts.end(), tq);
    std::size_t hi = static_cast<std::size_t>(it - ts.begin());
    hi = std::clamp<std::size_t>(hi, 1, ts.size() - 1);
    const std::size_t lo = hi - 1;

    const double h = ts[hi] - ts[lo];
    const double u = (tq - ts[lo]) / h;
    const double h00 = (2 * u - 3) * u * u + 1;
    const double h10 = ((u - 2) * u + 1) * u;
    const double h01 = (3 - 2 * u) * u * u;
    const double h11 = (u - 1) * u * u;
    for (std::size_t d = 0; d < dim; ++d) {
        const double y0 = nodes.ys[lo * dim + d];
        const double y1 = nodes.ys[hi * dim + d];
        const double f0 = nodes.fs[lo * dim + d];
        const double f1 = nodes.fs[hi * dim + d];
        out[d] = h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1;
    }
}

void validate_grid(std::span<const double> grid, TimeSpan span) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!std::isfinite(grid[i])) {
            raise(Errc::invalid_config, "output grid contains a non-finite time");
        }
        if (i > 0 && !(grid[i] > grid[i - 1])) {
            raise(Errc::invalid_config, "output grid must be strictly increasing");
        }
    }
    if (!grid.empty() && (grid.front() < span.t0 || grid.back() > span.t1)) {
        raise(Errc::invalid_config, "output grid extends outside the time span");
    }
}

Trajectory run_cut_segments(const std::vector<double>& cuts,
                            const std::vector<RhsFn>& segment_rhs,
                            std::size_t dim, std::span<const double> y0,
                            const SolverConfig& cfg,
                            std::span<const double> output_grid) {
    Trajectory traj;
    traj.dim = dim;

    std::vector<double> y(y0.begin(), y0.end());
    std::uint64_t attempts = 0;
    std::vector<SegmentNodes> segments(cuts.size() - 1);
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
        integrate_segment(segment_rhs[s], cuts[s], cuts[s + 1], y, cfg,
                          traj.stats, attempts, segments[s]);
    }

    auto project = [&](std::span<double> state) {
        if (cfg.nonnegative.empty()) {
            return;
        }
        for (std::size_t d = 0; d < dim; ++d) {
            if (cfg.nonnegative[d] && state[d] < 0.0) {
                state[d] = 0.0;
            }
        }
    };

    if (output_grid.empty()) {
        // Accepted nodes; segment starts after the first duplicate the
        // previous segment's end and are skipped.
        for (std::size_t s = 0; s < segments.size(); ++s) {
            const auto& nodes = segments[s];
            const std::size_t first = s == 0 ? 0 : 1;
            for (std::size_t i = first; i < nodes.ts.size(); ++i) {
                traj.times.push_back(nodes.ts[i]);
                traj.values.insert(traj.values.end(),
                                   nodes.ys.begin() + static_cast<std::ptrdiff_t>(i * dim),
                                   nodes.ys.begin() + static_cast<std::ptrdiff_t>((i + 1) * dim));
            }
        }
        return traj;
    }

    traj.times.assign(output_grid.begin(), output_grid.end());
    traj.values.assign(output_grid.size() * dim, 0.0);
    std::size_t s = 0;
    for (std::size_t i = 0; i < output_grid.size(); ++i) {
        const double tq = output_grid[i];
        while (s + 1 < segments.size() && tq > segments[s].t1) {
            ++s;
        }
        std::span<double> out(traj.values.data() + i * dim, dim);
        hermite_eval(segments[s], dim, tq, out);
        project(out);
    }
    return traj;
}

} // namespace

void SolverConfig::validate(std::size_t dim) const {
    if (!(rel_tol > 0.0)) {
        raise(Errc::invalid_config, "rel_tol must be strictly positive");
    }
    if (!(abs_tol > 0.0)) {
        raise(Errc::invalid_config, "abs_tol must be strictly positive");
    }
    if (h_init < 0.0 || !(h_min > 0.0) || h_max < 0.0 ||
        (h_max > 0.0 && h_max < h_min)) {
        raise(Errc::invalid_config, "step-size bounds are inconsistent");
    }
    if (max_steps == 0) {
        raise(Errc::invalid_config, "max_steps must be positive");
    }
    if (!nonnegative.empty() && nonnegative.size() != dim) {
        raise(Errc::invalid_config,
              "nonnegative mask length must match the state dimension");
    }
}

std::vector<double> Trajectory::column(std::size_t comp) const {
    std::vector<double> out(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        out[i] = value(i, comp);
    }
    return out;
}

StepResult step(const RhsFn& rhs, double t, std::span<const double> y, double h,
                const SolverConfig& cfg) {
    cfg.validate(y.size());
    if (!(h > 0.0) || !std::isfinite(h) || !std::isfinite(t)) {
        raise(Errc::invalid_config, "step requires finite t and h > 0");
    }
    check_finite(y, Errc::non_finite_state, "state");

    SolverStats scratch;
    Stepper stepper(rhs, y.size(), cfg, scratch);
    stepper.eval(t, y, stepper.stage(0));
    const double norm = stepper.attempt(t, y, h);

    StepResult result;
    result.y_next = stepper.y_next();
    result.error = stepper.error();
    result.error_norm = norm;
    result.h_suggest = h * controller_factor(norm);
    return result;
}

Trajectory integrate_rhs(const RhsFn& rhs, std::size_t dim,
                         std::span<const double> y0, TimeSpan span,
                         const SolverConfig& cfg,
                         std::span<const double> breakpoints,
                         std::span<const double> output_grid) {
    cfg.validate(dim);
    if (dim == 0 || y0.size() != dim) {
        raise(Errc::invalid_config, "initial state size must equal dim > 0");
    }
    if (!(span.t0 < span.t1)) {
        raise(Errc::invalid_config, "time span must satisfy t0 < t1");
    }
    check_finite(y0, Errc::non_finite_state, "initial state");
    if (!cfg.nonnegative.empty()) {
        for (std::size_t d = 0; d < dim; ++d) {
            if (cfg.nonnegative[d] && y0[d] < 0.0) {
                raise(Errc::invalid_config,
                      "initial state violates the nonnegativity mask");
            }
        }
    }
    validate_grid(output_grid, span);

    std::vector<double> cuts{span.t0};
    for (double bp : breakpoints) {
        if (bp > span.t0 && bp < span.t1) {
            cuts.push_back(bp);
        }
    }
    cuts.push_back(span.t1);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::vector<RhsFn> segment_rhs(cuts.size() - 1, rhs);
    return run_cut_segments(cuts, segment_rhs, dim, y0, cfg, output_grid);
}

Trajectory integrate(const ModelSpec& model, const ParamSchedule& schedule,
                     std::span<const double> y0, TimeSpan span,
                     const SolverConfig& cfg,
                     std::span<const double> output_grid) {
    model.validate();
    schedule.validate();
    cfg.validate(model.dimension);
    if (y0.size() != model.dimension) {
        raise(Errc::invalid_config, "initial state size must match the model");
    }
    if (!(span.t0 < span.t1)) {
        raise(Errc::invalid_config, "time span must satisfy t0 < t1");
    }
    if (span.t0 < schedule.segments.front().t_start ||
        span.t1 > schedule.horizon_end) {
        raise(Errc::out_of_schedule, "schedule does not cover the time span");
    }
    check_finite(y0, Errc::non_finite_state, "initial state");
    if (!cfg.nonnegative.empty()) {
        for (std::size_t d = 0; d < model.dimension; ++d) {
            if (cfg.nonnegative[d] && y0[d] < 0.0) {
                raise(Errc::invalid_config,
                      "initial state violates the nonnegativity mask");
            }
        }
    }
    validate_grid(output_grid, span);

    std::vector<double> cuts{span.t0};
    for (double bp : schedule.breakpoints()) {
        if (bp > span.t0 && bp < span.t1) {
            cuts.push_back(bp);
        }
    }
    cuts.push_back(span.t1);

    std::vector<RhsFn> segment_rhs;
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
        segment_rhs.push_back(make_rhs(model, params_at(schedule, cuts[s])));
    }

    Trajectory traj =
        run_cut_segments(cuts, segment_rhs, model.dimension, y0, cfg, output_grid);
    traj.model = model;
    return traj;
}

std::vector<double> uniform_grid(double t0, double t1, std::size_t n) {
    if (n < 2 || !(t0 < t1)) {
        raise(Errc::invalid_config, "uniform_grid requires n >= 2 and t0 < t1");
    }
    std::vector<double> grid(n);
    const double dt = (t1 - t0) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        grid[i] = t0 + dt * static_cast<double>(i);
    }
    grid.back() = t1;
    return grid;
}

} // namespace sweepdyn
