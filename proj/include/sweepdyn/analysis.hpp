#pragma once

#include <array>
#include <complex>
#include <cstddef>

#include "sweepdyn/integrator.hpp"
#include "sweepdyn/model.hpp"

namespace sweepdyn {

/// Real parts within this tolerance of zero are treated as marginal.
inline constexpr double stability_tolerance = 1e-9;

/// 3x3 real matrix, row-major.
struct Matrix3 {
    std::array<std::array<double, 3>, 3> rows{};

    [[nodiscard]] double& operator()(std::size_t i, std::size_t j) {
        return rows[i][j];
    }
    [[nodiscard]] double operator()(std::size_t i, std::size_t j) const {
        return rows[i][j];
    }

    [[nodiscard]] double trace() const;
    [[nodiscard]] double det() const;
    /// Sum of the three principal 2x2 minors.
    [[nodiscard]] double principal_minor_sum() const;

    [[nodiscard]] static Matrix3 identity();
    [[nodiscard]] static Matrix3 diagonal(double a, double b, double c);

    /// Throws invalid_config on non-finite entries.
    void validate() const;
};

enum class Classification {
    stable_node,
    stable_focus,
    unstable_saddle_focus,
    unstable_node,
    marginal,
    degenerate,
};

/// Stable camel-case labels ("StableNode", ..., "Degenerate") used in reports.
[[nodiscard]] const char* to_string(Classification c) noexcept;

using Eigen3 = std::array<std::complex<double>, 3>;

/// Interior equilibrium of the demographic-structural field:
///   W* = r0*beta/(rho0*delta),
///   N* = (kmax - c*W*)*(1 - beta/rho0),
///   S* = (a*N*^2 - b*W*)/alpha.
/// Throws no_interior_equilibrium when rho0 <= beta, kmax - c*W* <= 0, or
/// S* < 0.
[[nodiscard]] State3 critical_point(const TkParams& p);

/// Both sides of the two printed validity inequalities.
struct ValidityValues {
    double lhs10 = 0.0;
    double rhs10 = 0.0;
    double lhs11 = 0.0;
    double rhs11 = 0.0;

    [[nodiscard]] bool condition10() const { return lhs10 < rhs10; }
    [[nodiscard]] bool condition11() const { return lhs11 < rhs11; }
};

[[nodiscard]] ValidityValues validity_values(const TkParams& p);

/// (condition10, condition11), both strict inequalities.
[[nodiscard]] std::pair<bool, bool> validity_conditions(const TkParams& p);

/// Analytic Jacobian of the demographic-structural field at x, with
/// K = kmax - c*W:
///   row 1: (r0*(1 - 2N/K) - delta*W, 0, -r0*c*N^2/K^2 - delta*N)
///   row 2: (rho0*(1 - 2N/K) - beta,  0, -rho0*c*N^2/K^2)
///   row 3: (2*a*N, -alpha, -b)
/// Throws singular_carrying_capacity when K < min_carrying_capacity.
[[nodiscard]] Matrix3 jacobian_tk(const TkParams& p, const State3& x);

/// Coefficients (c3, c2, c1, c0) of det(m - lambda*I) expanded in lambda,
/// with the leading coefficient fixed at c3 = -1:
///   c3 = -1, c2 = trace(m), c1 = -(sum of principal minors), c0 = det(m).
[[nodiscard]] std::array<double, 4> char_poly(const Matrix3& m);

/// The three roots of char_poly(m) via the closed-form (trigonometric /
/// Cardano) cubic solution with Newton polish. Deterministic ordering:
/// descending real part, then ascending imaginary part. Complex roots come
/// back as an exact conjugate pair.
[[nodiscard]] Eigen3 eigenvalues3(const Matrix3& m);

/// Sign-pattern classification with threshold stability_tolerance:
/// any real part above it -> unstable (saddle-focus when an imaginary part is
/// present, node otherwise); all below its negative -> stable focus/node;
/// non-finite input -> degenerate; everything else -> marginal.
[[nodiscard]] Classification classify(const Eigen3& eigs);

/// Full local stability picture at the interior equilibrium.
struct StabilityReport {
    TkParams params;
    State3 critical_point;
    Matrix3 jacobian;
    Eigen3 eigenvalues;
    Classification classification = Classification::degenerate;
    bool condition10 = false;
    bool condition11 = false;
    std::array<double, 4> char_poly{};
};

[[nodiscard]] StabilityReport analyze_tk(const TkParams& p);

/// Peak-structure summary of one trajectory component over a tail window.
struct LimitCycleReport {
    bool converged = false;
    double period = 0.0;
    double amplitude = 0.0;
    std::size_t peak_count = 0;            ///< maxima found in the tail window
    double max_height_variation = 0.0;     ///< successive relative, last 5 peaks
    double max_spacing_variation = 0.0;    ///< successive relative, last 5 peaks
};

/// Examines the final tail_fraction of the trajectory's time span. Peaks are
/// strict sample maxima refined by a three-point parabolic fit; converged
/// means successive peak heights and spacings each vary by < 2% relative over
/// the last five peaks. Period is the mean refined spacing; amplitude the
/// mean peak-to-following-trough drop. Throws insufficient_oscillations when
/// fewer than five peaks lie in the window, invalid_config on bad arguments.
[[nodiscard]] LimitCycleReport limit_cycle_report(const Trajectory& traj,
                                                  std::size_t component,
                                                  double tail_fraction);

} // namespace sweepdyn
