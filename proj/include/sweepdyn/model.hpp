#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <variant>
#include <vector>

#include "sweepdyn/errors.hpp"

namespace sweepdyn {

/// Effective carrying capacities below this are treated as singular.
inline constexpr double min_carrying_capacity = 1e-9;

/// One point of the demographic-structural state space:
/// population N, accumulated state resources S, internal conflict intensity W.
struct State3 {
    double n = 0.0;
    double s = 0.0;
    double w = 0.0;
};

/// Parameters of the three-variable demographic-structural vector field
///   dN/dt = r0*N*(1 - N/(kmax - c*W)) - delta*N*W
///   dS/dt = rho0*N*(1 - N/(kmax - c*W)) - beta*N
///   dW/dt = a*N^2 - b*W - alpha*S
/// Defaults are the baseline calibration used throughout.
struct TkParams {
    double r0 = 0.015;  ///< intrinsic population growth rate
    double rho0 = 1.0;  ///< per-capita taxation yield
    double c = 2.0;     ///< erosion of carrying capacity per unit conflict
    double a = 0.01;    ///< conflict generation from population pressure
    double kmax = 3.0;  ///< maximum carrying capacity
    double b = 0.05;    ///< conflict decay rate
    double beta = 0.25; ///< per-capita state expenditure
    double delta = 0.1; ///< conflict-driven mortality rate
    double alpha = 0.1; ///< suppression of conflict by state resources

    /// Throws invalid_config unless every parameter is strictly positive.
    void validate() const;
};

/// Predator-prey (Lotka-Volterra) parameters:
///   dR/dt = alpha*R - beta*R*C
///   dC/dt = gamma*C*R - delta*C
/// Defaults are the worked rabbit/coyote calibration.
struct LvParams {
    double alpha = 5.0; ///< prey growth rate
    double beta = 0.1;  ///< predation rate
    double gamma = 0.1; ///< predator growth per encounter
    double delta = 5.0; ///< predator death rate

    void validate() const;
};

enum class ModelKind {
    turchin_korotayev,
    lotka_volterra,
};

[[nodiscard]] const char* to_string(ModelKind kind) noexcept;

/// Which vector field a trajectory belongs to, with its state dimension.
struct ModelSpec {
    ModelKind kind = ModelKind::turchin_korotayev;
    std::size_t dimension = 3;

    [[nodiscard]] static ModelSpec tk() { return {ModelKind::turchin_korotayev, 3}; }
    [[nodiscard]] static ModelSpec lv() { return {ModelKind::lotka_volterra, 2}; }

    /// Throws invalid_config if the dimension does not match the kind.
    void validate() const;
};

using ParamSet = std::variant<TkParams, LvParams>;

/// Piecewise-constant parameter assignment. A segment's values apply on the
/// half-open interval [t_start, next segment's t_start); the final segment
/// extends through horizon_end inclusive.
struct ScheduleSegment {
    double t_start = 0.0;
    ParamSet params;
};

struct ParamSchedule {
    std::vector<ScheduleSegment> segments;
    double horizon_end = 0.0;

    /// Throws invalid_config unless segments are non-empty, strictly
    /// increasing in t_start, homogeneous in model kind, individually valid,
    /// and horizon_end exceeds the last segment start.
    void validate() const;

    /// Interior segment-change times (every t_start except the first).
    [[nodiscard]] std::vector<double> breakpoints() const;

    [[nodiscard]] static ParamSchedule constant(ParamSet params, double t_start,
                                                double horizon_end);
};

/// Segment lookup for time t in [first t_start, horizon_end].
/// Throws out_of_schedule outside that range. At a segment boundary the new
/// segment's values apply (half-open convention).
[[nodiscard]] const ParamSet& params_at(const ParamSchedule& schedule, double t);

/// Demographic-structural vector field. Throws non_finite_state on non-finite
/// input and singular_carrying_capacity when kmax - c*W < min_carrying_capacity.
[[nodiscard]] State3 tk_rhs(const State3& y, const TkParams& p);

/// Predator-prey vector field. Throws non_finite_state on non-finite input.
[[nodiscard]] std::array<double, 2> lv_rhs(const std::array<double, 2>& y,
                                           const LvParams& p);

/// Scalar test field y' = y.
[[nodiscard]] double exp_rhs(double y) noexcept;

/// Vector-field callback used by the integrator. Writes d/dt of y into dydt
/// (same length as y).
using RhsFn = std::function<void(double t, std::span<const double> y,
                                 std::span<double> dydt)>;

/// Adapts a fixed parameter set to the integrator callback form.
[[nodiscard]] RhsFn make_rhs(const ModelSpec& model, const ParamSet& params);

} // namespace sweepdyn
