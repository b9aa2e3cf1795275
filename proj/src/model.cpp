#include "sweepdyn/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sweepdyn {

const char* to_string(Errc code) noexcept {
    switch (code) {
    case Errc::invalid_config: return "invalid_config";
    case Errc::out_of_schedule: return "out_of_schedule";
    case Errc::singular_carrying_capacity: return "singular_carrying_capacity";
    case Errc::non_finite_state: return "non_finite_state";
    case Errc::step_underflow: return "step_underflow";
    case Errc::step_budget_exceeded: return "step_budget_exceeded";
    case Errc::no_interior_equilibrium: return "no_interior_equilibrium";
    case Errc::insufficient_oscillations: return "insufficient_oscillations";
    case Errc::window_out_of_range: return "window_out_of_range";
    }
    return "unknown";
}

const char* to_string(ModelKind kind) noexcept {
    switch (kind) {
    case ModelKind::turchin_korotayev: return "tk";
    case ModelKind::lotka_volterra: return "lv";
    }
    return "unknown";
}

namespace {

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        raise(Errc::invalid_config,
              std::string("parameter ") + name + " must be finite and > 0");
    }
}

} // namespace

void TkParams::validate() const {
    require_positive(r0, "r0");
    require_positive(rho0, "rho0");
    require_positive(c, "c");
    require_positive(a, "a");
    require_positive(kmax, "kmax");
    require_positive(b, "b");
    require_positive(beta, "beta");
    require_positive(delta, "delta");
    require_positive(alpha, "alpha");
}

void LvParams::validate() const {
    require_positive(alpha, "alpha");
    require_positive(beta, "beta");
    require_positive(gamma, "gamma");
    require_positive(delta, "delta");
}

void ModelSpec::validate() const {
    const std::size_t expected = kind == ModelKind::turchin_korotayev ? 3 : 2;
    if (dimension != expected) {
        raise(Errc::invalid_config, "model dimension does not match its kind");
    }
}

void ParamSchedule::validate() const {
    if (segments.empty()) {
        raise(Errc::invalid_config, "schedule has no segments");
    }
    const std::size_t kind_index = segments.front().params.index();
    for (std::size_t i = 0; i < segments.size(); ++i) {
        const auto& seg = segments[i];
        if (!std::isfinite(seg.t_start)) {
            raise(Errc::invalid_config, "segment start time must be finite");
        }
        if (i > 0 && !(seg.t_start > segments[i - 1].t_start)) {
            raise(Errc::invalid_config,
                  "segment start times must be strictly increasing");
        }
        if (seg.params.index() != kind_index) {
            raise(Errc::invalid_config,
                  "schedule mixes parameter sets of different models");
        }
        std::visit([](const auto& p) { p.validate(); }, seg.params);
    }
    if (!(horizon_end > segments.back().t_start)) {
        raise(Errc::invalid_config,
              "horizon_end must exceed the last segment start");
    }
}

std::vector<double> ParamSchedule::breakpoints() const {
    std::vector<double> out;
    for (std::size_t i = 1; i < segments.size(); ++i) {
        out.push_back(segments[i].t_start);
    }
    return out;
}

ParamSchedule ParamSchedule::constant(ParamSet params, double t_start,
                                      double horizon_end) {
    ParamSchedule s;
    s.segments.push_back({t_start, std::move(params)});
    s.horizon_end = horizon_end;
    return s;
}

const ParamSet& params_at(const ParamSchedule& schedule, double t) {
    if (schedule.segments.empty()) {
        raise(Errc::out_of_schedule, "schedule has no segments");
    }
    if (t < schedule.segments.front().t_start || t > schedule.horizon_end) {
        raise(Errc::out_of_schedule,
              "time " + std::to_string(t) + " outside schedule coverage");
    }
    auto it = std::upper_bound(
        schedule.segments.begin(), schedule.segments.end(), t,
        [](double value, const ScheduleSegment& seg) { return value < seg.t_start; });
    return std::prev(it)->params;
}

State3 tk_rhs(const State3& y, const TkParams& p) {
    if (!std::isfinite(y.n) || !std::isfinite(y.s) || !std::isfinite(y.w)) {
        raise(Errc::non_finite_state, "demographic state is not finite");
    }
    const double capacity = p.kmax - p.c * y.w;
    if (!(capacity >= min_carrying_capacity)) {
        raise(Errc::singular_carrying_capacity,
              "effective carrying capacity kmax - c*W = " +
                  std::to_string(capacity) + " is singular");
    }
    const double growth = 1.0 - y.n / capacity;
    return {
        p.r0 * y.n * growth - p.delta * y.n * y.w,
        p.rho0 * y.n * growth - p.beta * y.n,
        p.a * y.n * y.n - p.b * y.w - p.alpha * y.s,
    };
}

std::array<double, 2> lv_rhs(const std::array<double, 2>& y, const LvParams& p) {
    if (!std::isfinite(y[0]) || !std::isfinite(y[1])) {
        raise(Errc::non_finite_state, "predator-prey state is not finite");
    }
    const double r = y[0];
    const double c = y[1];
    return {p.alpha * r - p.beta * r * c, p.gamma * c * r - p.delta * c};
}

double exp_rhs(double y) noexcept { return y; }

RhsFn make_rhs(const ModelSpec& model, const ParamSet& params) {
    model.validate();
    if (model.kind == ModelKind::turchin_korotayev) {
        const auto p = std::get<TkParams>(params);
        return [p](double, std::span<const double> y, std::span<double> dydt) {
            const State3 d = tk_rhs({y[0], y[1], y[2]}, p);
            dydt[0] = d.n;
            dydt[1] = d.s;
            dydt[2] = d.w;
        };
    }
    const auto p = std::get<LvParams>(params);
    return [p](double, std::span<const double> y, std::span<double> dydt) {
        const auto d = lv_rhs({y[0], y[1]}, p);
        dydt[0] = d[0];
        dydt[1] = d[1];
    };
}

} // namespace sweepdyn
