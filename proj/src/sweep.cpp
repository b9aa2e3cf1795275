#include "sweepdyn/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <string>
#include <thread>

namespace sweepdyn {

void SweepConfig::validate() const {
    if (!(threshold > 1.0)) {
        raise(Errc::invalid_config, "sweep threshold must exceed 1");
    }
    if (window && !(*window > 0.0)) {
        raise(Errc::invalid_config, "sweep window must be positive");
    }
    if (!(fallback_window > 0.0)) {
        raise(Errc::invalid_config, "fallback window must be positive");
    }
}

std::vector<std::pair<double, double>>
envelope_maxima(const Trajectory& traj, std::size_t component) {
    if (component >= traj.dim) {
        raise(Errc::invalid_config, "component index out of range");
    }
    if (traj.size() < 3) {
        raise(Errc::invalid_config,
              "envelope extraction needs at least 3 samples");
    }
    std::vector<std::pair<double, double>> maxima;
    const std::size_t n = traj.size();
    std::size_t i = 1;
    while (i + 1 < n) {
        const double v = traj.value(i, component);
        if (v > traj.value(i - 1, component)) {
            // Extend across a plateau of equal values.
            std::size_t j = i;
            while (j + 1 < n && traj.value(j + 1, component) == v) {
                ++j;
            }
            if (j + 1 < n && traj.value(j + 1, component) < v) {
                maxima.emplace_back(traj.times[i], v); // earliest plateau sample
            }
            i = j + 1;
        } else {
            ++i;
        }
    }
    return maxima;
}

namespace {

/// Mean spacing of the component's envelope maxima over (t_from, t_to]; the
/// fallback value when fewer than two maxima lie in that range.
double estimate_window(const std::vector<std::pair<double, double>>& maxima,
                       double t_from, double t_to, double fallback) {
    std::vector<double> times;
    for (const auto& [t, v] : maxima) {
        if (t > t_from && t <= t_to) {
            times.push_back(t);
        }
    }
    if (times.size() < 2) {
        return fallback;
    }
    return (times.back() - times.front()) /
           static_cast<double>(times.size() - 1);
}

/// Max of the component over the half-open time window (t_from, t_to].
double window_max(const Trajectory& traj, std::size_t component, double t_from,
                  double t_to) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const double t = traj.times[i];
        if (t > t_from && t <= t_to) {
            best = std::max(best, traj.value(i, component));
        }
    }
    return best;
}

} // namespace

std::vector<SweepEvent> detect_sweeps(const Trajectory& traj,
                                      std::span<const double> breakpoints,
                                      const SweepConfig& cfg,
                                      std::size_t component) {
    cfg.validate();
    if (component >= traj.dim) {
        raise(Errc::invalid_config, "component index out of range");
    }
    std::vector<SweepEvent> events;
    if (breakpoints.empty()) {
        return events;
    }
    if (traj.size() < 3) {
        raise(Errc::invalid_config, "trajectory has too few samples");
    }

    std::vector<double> bps(breakpoints.begin(), breakpoints.end());
    std::sort(bps.begin(), bps.end());

    const double t_begin = traj.times.front();
    const double t_end = traj.times.back();
    const auto maxima = envelope_maxima(traj, component);

    for (std::size_t k = 0; k < bps.size(); ++k) {
        const double bp = bps[k];
        const double prev = k == 0 ? t_begin : bps[k - 1];
        const double w =
            cfg.window ? *cfg.window
                       : estimate_window(maxima, prev, bp, cfg.fallback_window);
        if (bp - w < t_begin || bp + w > t_end) {
            raise(Errc::window_out_of_range,
                  "window " + std::to_string(w) + " around breakpoint " +
                      std::to_string(bp) +
                      " extends outside the trajectory span");
        }
        SweepEvent ev;
        ev.breakpoint_time = bp;
        ev.window = w;
        ev.pre_envelope_max = window_max(traj, component, bp - w, bp);
        ev.post_envelope_max = window_max(traj, component, bp, bp + w);
        ev.ratio = ev.post_envelope_max / ev.pre_envelope_max;
        ev.detected = ev.ratio >= cfg.threshold;
        events.push_back(ev);
    }
    return events;
}

const std::array<ScanFactor, 9>& scan_factor_table() {
    static const std::array<ScanFactor, 9> table = {{
        {"a", {1.0 / 3.0, 1.0 / 9.0}},
        {"b", {3.0, 9.0}},
        {"c", {3.0, 9.0}},
        {"kmax", {5.0 / 3.0, 7.0 / 3.0}},
        {"r0", {0.095 / 0.015, 0.15 / 0.015}},
        {"alpha", {3.0, 9.0}},
        {"beta", {1.0 / 3.0, 1.0 / 9.0}},
        {"delta", {9.5, 0.95 / 0.1}},
        {"rho0", {1.0 / 3.0, 1.0 / 9.0}},
    }};
    return table;
}

TkParams apply_scan_factor(TkParams base, std::size_t param_index,
                           double factor) {
    switch (param_index) {
    case 0: base.a *= factor; break;
    case 1: base.b *= factor; break;
    case 2: base.c *= factor; break;
    case 3: base.kmax *= factor; break;
    case 4: base.r0 *= factor; break;
    case 5: base.alpha *= factor; break;
    case 6: base.beta *= factor; break;
    case 7: base.delta *= factor; break;
    case 8: base.rho0 *= factor; break;
    default:
        raise(Errc::invalid_config, "scan parameter index out of range");
    }
    return base;
}

void ScanOptions::validate() const {
    if (max_subset_size == 0 || max_subset_size > 9) {
        raise(Errc::invalid_config, "max_subset_size must lie in [1, 9]");
    }
    if (!(t0 < breakpoints[0]) || !(breakpoints[0] < breakpoints[1]) ||
        !(breakpoints[1] < t1)) {
        raise(Errc::invalid_config,
              "scan requires t0 < first breakpoint < second breakpoint < t1");
    }
    if (grid_points < 3) {
        raise(Errc::invalid_config, "scan grid needs at least 3 points");
    }
    sweep.validate();
}

namespace {

/// All index subsets of {0..8} with sizes 1..max_size, sizes ascending and
/// each size in lexicographic combination order.
std::vector<std::vector<std::size_t>> enumerate_subsets(std::size_t max_size) {
    std::vector<std::vector<std::size_t>> subsets;
    for (std::size_t size = 1; size <= max_size; ++size) {
        std::vector<std::size_t> combo(size);
        for (std::size_t i = 0; i < size; ++i) {
            combo[i] = i;
        }
        for (;;) {
            subsets.push_back(combo);
            // Advance to the next lexicographic combination of {0..8}.
            std::size_t pos = size;
            while (pos > 0 && combo[pos - 1] == 9 - size + (pos - 1)) {
                --pos;
            }
            if (pos == 0) {
                break;
            }
            ++combo[pos - 1];
            for (std::size_t i = pos; i < size; ++i) {
                combo[i] = combo[i - 1] + 1;
            }
        }
    }
    return subsets;
}

ScanResult run_subset(const TkParams& base,
                      const std::vector<std::size_t>& members,
                      std::size_t index, const ScanOptions& opts) {
    const auto& table = scan_factor_table();

    ScanResult result;
    result.index = index;
    for (std::size_t m : members) {
        result.subset.emplace_back(table[m].name);
    }

    TkParams phase2 = base;
    TkParams phase3 = base;
    for (std::size_t m : members) {
        phase2 = apply_scan_factor(phase2, m, table[m].factors.phase2);
        phase3 = apply_scan_factor(phase3, m, table[m].factors.phase3);
    }

    try {
        ParamSchedule sched;
        sched.segments = {{opts.t0, base},
                          {opts.breakpoints[0], phase2},
                          {opts.breakpoints[1], phase3}};
        sched.horizon_end = opts.t1;

        SolverConfig solver = opts.solver;
        solver.nonnegative = {true, true, true};

        const std::vector<double> grid =
            uniform_grid(opts.t0, opts.t1, opts.grid_points);
        const Trajectory traj =
            integrate(ModelSpec::tk(), sched, opts.y0, {opts.t0, opts.t1},
                      solver, grid);

        result.events = detect_sweeps(traj, opts.breakpoints, opts.sweep);
        for (const SweepEvent& ev : result.events) {
            if (std::isfinite(ev.ratio)) {
                result.max_ratio = std::max(result.max_ratio, ev.ratio);
            }
            result.any_detected = result.any_detected || ev.detected;
        }
    } catch (const SimError& e) {
        result.failed = true;
        result.error = e.what();
        result.events.clear();
        result.max_ratio = 0.0;
        result.any_detected = false;
    }
    return result;
}

} // namespace

std::vector<ScanResult> scan_subsets(const TkParams& base,
                                     const ScanOptions& opts) {
    base.validate();
    opts.validate();

    const auto subsets = enumerate_subsets(opts.max_subset_size);
    std::vector<ScanResult> results(subsets.size());

    unsigned threads = opts.threads;
    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    threads = std::min<unsigned>(
        threads, static_cast<unsigned>(subsets.size()));

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= subsets.size()) {
                return;
            }
            results[i] = run_subset(base, subsets[i], i, opts);
        }
    };

    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
        for (auto& th : pool) {
            th.join();
        }
    }

    std::sort(results.begin(), results.end(),
              [](const ScanResult& a, const ScanResult& b) {
                  if (a.max_ratio != b.max_ratio) {
                      return a.max_ratio > b.max_ratio;
                  }
                  return a.index < b.index;
              });
    return results;
}

} // namespace sweepdyn
