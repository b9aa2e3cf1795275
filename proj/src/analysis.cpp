#include "sweepdyn/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace sweepdyn {

namespace {

constexpr double k_pi = std::numbers::pi;

bool finite(const std::complex<double>& z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

/// Monic cubic lambda^3 + p2*lambda^2 + p1*lambda + p0 and its derivative.
struct MonicCubic {
    double p2, p1, p0;

    [[nodiscard]] std::complex<double> eval(std::complex<double> x) const {
        return ((x + p2) * x + p1) * x + p0;
    }
    [[nodiscard]] std::complex<double> deriv(std::complex<double> x) const {
        return (3.0 * x + 2.0 * p2) * x + p1;
    }
    [[nodiscard]] double scale() const {
        return std::max({1.0, std::abs(p2), std::abs(p1), std::abs(p0)});
    }

    /// A few Newton iterations; keeps the best residual seen.
    [[nodiscard]] std::complex<double> polish(std::complex<double> x) const {
        std::complex<double> best = x;
        double best_res = std::abs(eval(x));
        for (int it = 0; it < 4; ++it) {
            const std::complex<double> d = deriv(x);
            if (std::abs(d) < 1e-300) {
                break;
            }
            x -= eval(x) / d;
            const double res = std::abs(eval(x));
            if (res < best_res) {
                best = x;
                best_res = res;
            }
        }
        return best;
    }
};

} // namespace

double Matrix3::trace() const { return rows[0][0] + rows[1][1] + rows[2][2]; }

double Matrix3::det() const {
    const auto& m = rows;
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

double Matrix3::principal_minor_sum() const {
    const auto& m = rows;
    return (m[0][0] * m[1][1] - m[0][1] * m[1][0]) +
           (m[0][0] * m[2][2] - m[0][2] * m[2][0]) +
           (m[1][1] * m[2][2] - m[1][2] * m[2][1]);
}

Matrix3 Matrix3::identity() { return diagonal(1.0, 1.0, 1.0); }

Matrix3 Matrix3::diagonal(double a, double b, double c) {
    Matrix3 m;
    m(0, 0) = a;
    m(1, 1) = b;
    m(2, 2) = c;
    return m;
}

void Matrix3::validate() const {
    for (const auto& row : rows) {
        for (double v : row) {
            if (!std::isfinite(v)) {
                raise(Errc::invalid_config, "matrix entry is not finite");
            }
        }
    }
}

const char* to_string(Classification c) noexcept {
    switch (c) {
    case Classification::stable_node: return "StableNode";
    case Classification::stable_focus: return "StableFocus";
    case Classification::unstable_saddle_focus: return "UnstableSaddleFocus";
    case Classification::unstable_node: return "UnstableNode";
    case Classification::marginal: return "Marginal";
    case Classification::degenerate: return "Degenerate";
    }
    return "Degenerate";
}

State3 critical_point(const TkParams& p) {
    p.validate();
    if (!(p.rho0 > p.beta)) {
        raise(Errc::no_interior_equilibrium,
              "rho0 <= beta collapses the equilibrium onto the boundary");
    }
    const double w = p.r0 * p.beta / (p.rho0 * p.delta);
    const double capacity = p.kmax - p.c * w;
    if (!(capacity > 0.0)) {
        raise(Errc::no_interior_equilibrium,
              "equilibrium carrying capacity kmax - c*W* is not positive");
    }
    const double n = capacity * (1.0 - p.beta / p.rho0);
    const double s = (p.a * n * n - p.b * w) / p.alpha;
    if (s < 0.0) {
        raise(Errc::no_interior_equilibrium,
              "equilibrium state resource S* is negative");
    }
    return {n, s, w};
}

ValidityValues validity_values(const TkParams& p) {
    p.validate();
    const double a = p.a, b = p.b, c = p.c, r0 = p.r0, rho0 = p.rho0;
    const double kmax = p.kmax, beta = p.beta, delta = p.delta;

    ValidityValues v;
    v.lhs10 = beta * delta * kmax * rho0 + beta * c * r0 * rho0;
    v.rhs10 = c * r0 * beta * beta + delta * kmax * rho0 * rho0;

    const double beta2 = beta * beta;
    const double beta3 = beta2 * beta;
    const double beta4 = beta2 * beta2;
    const double rho2 = rho0 * rho0;
    const double rho3 = rho2 * rho0;
    const double rho4 = rho2 * rho2;
    const double c2 = c * c;
    const double r02 = r0 * r0;
    const double delta2 = delta * delta;
    const double kmax2 = kmax * kmax;

    v.lhs11 = 2 * a * beta3 * c2 * r02 * rho0 +
              2 * a * beta3 * c * delta * kmax * r0 * rho0 +
              2 * a * beta * c * delta * kmax * r0 * rho3 +
              2 * a * beta * delta2 * kmax2 * rho3 +
              b * beta * delta * r0 * rho3;
    v.rhs11 = a * beta4 * c2 * r02 +
              a * beta2 * c2 * r02 * rho2 +
              4 * a * beta2 * c * delta * kmax * r0 * rho2 +
              a * beta2 * delta2 * kmax2 * rho2 +
              a * delta2 * kmax2 * rho4;
    return v;
}

std::pair<bool, bool> validity_conditions(const TkParams& p) {
    const ValidityValues v = validity_values(p);
    return {v.condition10(), v.condition11()};
}

Matrix3 jacobian_tk(const TkParams& p, const State3& x) {
    const double capacity = p.kmax - p.c * x.w;
    if (!(capacity >= min_carrying_capacity)) {
        raise(Errc::singular_carrying_capacity,
              "effective carrying capacity kmax - c*W = " +
                  std::to_string(capacity) + " is singular");
    }
    const double n_over_k = x.n / capacity;
    const double n2_over_k2 = n_over_k * n_over_k;

    Matrix3 j;
    j(0, 0) = p.r0 * (1.0 - 2.0 * n_over_k) - p.delta * x.w;
    j(0, 1) = 0.0;
    j(0, 2) = -p.r0 * p.c * n2_over_k2 - p.delta * x.n;
    j(1, 0) = p.rho0 * (1.0 - 2.0 * n_over_k) - p.beta;
    j(1, 1) = 0.0;
    j(1, 2) = -p.rho0 * p.c * n2_over_k2;
    j(2, 0) = 2.0 * p.a * x.n;
    j(2, 1) = -p.alpha;
    j(2, 2) = -p.b;
    return j;
}

std::array<double, 4> char_poly(const Matrix3& m) {
    m.validate();
    // det(m - lambda*I) = -lambda^3 + tr*lambda^2 - (minor sum)*lambda + det.
    return {-1.0, m.trace(), -m.principal_minor_sum(), m.det()};
}

Eigen3 eigenvalues3(const Matrix3& m) {
    const std::array<double, 4> cp = char_poly(m);
    // Negate to the monic convention lambda^3 + p2 l^2 + p1 l + p0.
    const MonicCubic poly{-cp[1], -cp[2], -cp[3]};

    // Depressed cubic x^3 + P x + Q via lambda = x - p2/3.
    const double shift = poly.p2 / 3.0;
    const double P = poly.p1 - poly.p2 * poly.p2 / 3.0;
    const double Q = 2.0 * poly.p2 * poly.p2 * poly.p2 / 27.0 -
                     poly.p2 * poly.p1 / 3.0 + poly.p0;
    const double discriminant = Q * Q / 4.0 + P * P * P / 27.0;

    Eigen3 roots;
    if (discriminant > 0.0) {
        // One real root and a conjugate pair (Cardano).
        const double sd = std::sqrt(discriminant);
        // Pick the branch that avoids cancellation.
        const double u = (Q <= 0.0) ? std::cbrt(-Q / 2.0 + sd)
                                    : std::cbrt(-Q / 2.0 - sd);
        const double v = (u != 0.0) ? -P / (3.0 * u) : 0.0;
        const double real_x = u + v;
        const double pair_re = -real_x / 2.0;
        const double pair_im = std::sqrt(3.0) / 2.0 * std::abs(u - v);

        const std::complex<double> real_root =
            poly.polish({real_x - shift, 0.0});
        std::complex<double> pair_root =
            poly.polish({pair_re - shift, pair_im});
        roots = {std::complex<double>(real_root.real(), 0.0),
                 {pair_root.real(), std::abs(pair_root.imag())},
                 {pair_root.real(), -std::abs(pair_root.imag())}};
    } else if (P < 0.0) {
        // Three real roots (trigonometric form).
        const double rho = 2.0 * std::sqrt(-P / 3.0);
        const double arg =
            std::clamp(3.0 * Q / (P * rho), -1.0, 1.0);
        const double phi = std::acos(arg);
        for (int k = 0; k < 3; ++k) {
            const double x =
                rho * std::cos((phi - 2.0 * k_pi * static_cast<double>(k)) / 3.0);
            const std::complex<double> r = poly.polish({x - shift, 0.0});
            roots[static_cast<std::size_t>(k)] = {r.real(), 0.0};
        }
    } else {
        // P >= 0 with non-positive discriminant forces P = Q = 0: triple root.
        const std::complex<double> r = poly.polish({-shift, 0.0});
        roots = {std::complex<double>(r.real(), 0.0),
                 std::complex<double>(r.real(), 0.0),
                 std::complex<double>(r.real(), 0.0)};
    }

    std::sort(roots.begin(), roots.end(),
              [](const std::complex<double>& a, const std::complex<double>& b) {
                  if (a.real() != b.real()) {
                      return a.real() > b.real();
                  }
                  return a.imag() < b.imag();
              });
    return roots;
}

Classification classify(const Eigen3& eigs) {
    bool any_positive = false;
    bool all_negative = true;
    bool any_imag = false;
    for (const auto& z : eigs) {
        if (!finite(z)) {
            return Classification::degenerate;
        }
        if (z.real() > stability_tolerance) {
            any_positive = true;
        }
        if (!(z.real() < -stability_tolerance)) {
            all_negative = false;
        }
        if (std::abs(z.imag()) > stability_tolerance) {
            any_imag = true;
        }
    }
    if (any_positive) {
        return any_imag ? Classification::unstable_saddle_focus
                        : Classification::unstable_node;
    }
    if (all_negative) {
        return any_imag ? Classification::stable_focus
                        : Classification::stable_node;
    }
    return Classification::marginal;
}

StabilityReport analyze_tk(const TkParams& p) {
    StabilityReport report;
    report.params = p;
    report.critical_point = critical_point(p);
    report.jacobian = jacobian_tk(p, report.critical_point);
    report.eigenvalues = eigenvalues3(report.jacobian);
    report.classification = classify(report.eigenvalues);
    const ValidityValues v = validity_values(p);
    report.condition10 = v.condition10();
    report.condition11 = v.condition11();
    report.char_poly = char_poly(report.jacobian);
    return report;
}

namespace {

/// Vertex of the parabola through three samples; falls back to the middle
/// sample when the points are (numerically) collinear.
struct ParabolicPoint {
    double t;
    double v;
};

ParabolicPoint refine_extremum(double t0, double y0, double t1, double y1,
                               double t2, double y2) {
    const double d01 = t1 - t0;
    const double d12 = t1 - t2;
    const double num = d01 * d01 * (y1 - y2) - d12 * d12 * (y1 - y0);
    const double den = d01 * (y1 - y2) - d12 * (y1 - y0);
    if (den == 0.0 || !std::isfinite(num / den)) {
        return {t1, y1};
    }
    const double t_star = t1 - 0.5 * num / den;
    // Evaluate the interpolating parabola at its vertex (Lagrange form).
    const double l0 = ((t_star - t1) * (t_star - t2)) / ((t0 - t1) * (t0 - t2));
    const double l1 = ((t_star - t0) * (t_star - t2)) / ((t1 - t0) * (t1 - t2));
    const double l2 = ((t_star - t0) * (t_star - t1)) / ((t2 - t0) * (t2 - t1));
    return {t_star, y0 * l0 + y1 * l1 + y2 * l2};
}

} // namespace

LimitCycleReport limit_cycle_report(const Trajectory& traj,
                                    std::size_t component,
                                    double tail_fraction) {
    if (component >= traj.dim) {
        raise(Errc::invalid_config, "component index out of range");
    }
    if (!(tail_fraction > 0.0) || tail_fraction > 1.0) {
        raise(Errc::invalid_config, "tail_fraction must lie in (0, 1]");
    }
    if (traj.size() < 3) {
        raise(Errc::insufficient_oscillations,
              "trajectory has too few samples for peak detection");
    }

    const double t_begin = traj.times.front();
    const double t_end = traj.times.back();
    const double t_cut = t_end - tail_fraction * (t_end - t_begin);

    std::size_t first = 0;
    while (first < traj.size() && traj.times[first] < t_cut) {
        ++first;
    }

    // Strict interior sample maxima of the chosen component, refined by a
    // three-point parabolic fit.
    std::vector<ParabolicPoint> peaks;
    std::vector<std::size_t> peak_index;
    for (std::size_t i = std::max<std::size_t>(first, 1);
         i + 1 < traj.size(); ++i) {
        const double prev = traj.value(i - 1, component);
        const double here = traj.value(i, component);
        const double next = traj.value(i + 1, component);
        if (here > prev && here > next) {
            peaks.push_back(refine_extremum(traj.times[i - 1], prev,
                                            traj.times[i], here,
                                            traj.times[i + 1], next));
            peak_index.push_back(i);
        }
    }

    LimitCycleReport report;
    report.peak_count = peaks.size();
    if (peaks.size() < 5) {
        raise(Errc::insufficient_oscillations,
              "found " + std::to_string(peaks.size()) +
                  " peaks in the tail window; need at least 5");
    }

    const std::size_t last5 = peaks.size() - 5;
    std::array<double, 5> height{};
    std::array<double, 4> spacing{};
    for (std::size_t j = 0; j < 5; ++j) {
        height[j] = peaks[last5 + j].v;
    }
    for (std::size_t j = 0; j < 4; ++j) {
        spacing[j] = peaks[last5 + j + 1].t - peaks[last5 + j].t;
    }

    double height_var = 0.0;
    for (std::size_t j = 0; j + 1 < 5; ++j) {
        height_var = std::max(height_var,
                              std::abs(height[j + 1] - height[j]) /
                                  std::abs(height[j]));
    }
    double spacing_var = 0.0;
    for (std::size_t j = 0; j + 1 < 4; ++j) {
        spacing_var = std::max(spacing_var,
                               std::abs(spacing[j + 1] - spacing[j]) /
                                   std::abs(spacing[j]));
    }

    report.max_height_variation = height_var;
    report.max_spacing_variation = spacing_var;
    report.converged = height_var < 0.02 && spacing_var < 0.02;
    report.period = (spacing[0] + spacing[1] + spacing[2] + spacing[3]) / 4.0;

    // Amplitude: mean drop from each of the last five peaks to the trough
    // before the next peak (four refined trough values).
    double amplitude_sum = 0.0;
    std::size_t amplitude_terms = 0;
    for (std::size_t j = 0; j < 4; ++j) {
        const std::size_t from = peak_index[last5 + j];
        const std::size_t to = peak_index[last5 + j + 1];
        std::size_t arg_min = from;
        double min_v = traj.value(from, component);
        for (std::size_t i = from + 1; i <= to; ++i) {
            const double v = traj.value(i, component);
            if (v < min_v) {
                min_v = v;
                arg_min = i;
            }
        }
        ParabolicPoint trough{traj.times[arg_min], min_v};
        if (arg_min > 0 && arg_min + 1 < traj.size()) {
            trough = refine_extremum(
                traj.times[arg_min - 1], traj.value(arg_min - 1, component),
                traj.times[arg_min], min_v, traj.times[arg_min + 1],
                traj.value(arg_min + 1, component));
        }
        amplitude_sum += peaks[last5 + j].v - trough.v;
        ++amplitude_terms;
    }
    report.amplitude = amplitude_sum / static_cast<double>(amplitude_terms);
    return report;
}

} // namespace sweepdyn
