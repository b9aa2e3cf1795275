#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "sweepdyn/analysis.hpp"
#include "sweepdyn/integrator.hpp"
#include "sweepdyn/model.hpp"

using namespace sweepdyn;

namespace {

Matrix3 baseline_jacobian() {
    // Analytic Jacobian at the baseline interior equilibrium, exact rationals.
    Matrix3 j;
    j.rows = {{{-9.0 / 800, 0.0, -189.0 / 800},
               {-3.0 / 4, 0.0, -9.0 / 8},
               {351.0 / 8000, -1.0 / 10, -1.0 / 20}}};
    return j;
}

std::complex<double> eval_poly(const std::array<double, 4>& c,
                               std::complex<double> x) {
    return ((c[0] * x + c[1]) * x + c[2]) * x + c[3];
}

/// Newton iteration on tk_rhs from a perturbed start; independent route to
/// the equilibrium used to cross-check the closed form.
State3 newton_equilibrium(const TkParams& p, State3 x) {
    for (int it = 0; it < 50; ++it) {
        const State3 f = tk_rhs(x, p);
        const Matrix3 j = jacobian_tk(p, x);
        const double det = j.det();
        if (std::abs(det) < 1e-300) {
            break;
        }
        // Cramer's rule for J * dx = -f.
        auto solve = [&](int col) {
            Matrix3 m = j;
            m(0, static_cast<std::size_t>(col)) = -f.n;
            m(1, static_cast<std::size_t>(col)) = -f.s;
            m(2, static_cast<std::size_t>(col)) = -f.w;
            return m.det() / det;
        };
        x = {x.n + solve(0), x.s + solve(1), x.w + solve(2)};
    }
    return x;
}

TkParams random_params_with_equilibrium(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(0.01, 3.0);
    for (;;) {
        TkParams p;
        p.r0 = dist(rng);
        p.rho0 = dist(rng);
        p.c = dist(rng);
        p.a = dist(rng);
        p.kmax = dist(rng);
        p.b = dist(rng);
        p.beta = dist(rng);
        p.delta = dist(rng);
        p.alpha = dist(rng);
        try {
            (void)critical_point(p);
            return p;
        } catch (const SimError&) {
            continue;
        }
    }
}

Matrix3 random_matrix(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-10.0, 10.0);
    Matrix3 m;
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            m(i, j) = dist(rng);
        }
    }
    return m;
}

} // namespace

TEST_CASE("critical point matches the exact rational baseline values") {
    const State3 cp = critical_point(TkParams{});
    CHECK(cp.n == doctest::Approx(2.19375).epsilon(1e-12));
    CHECK(cp.s == doctest::Approx(0.46250390625).epsilon(1e-12));
    CHECK(cp.w == doctest::Approx(0.0375).epsilon(1e-12));
    CHECK(cp.n == doctest::Approx(351.0 / 160.0).epsilon(1e-15));
    CHECK(cp.s == doctest::Approx(118401.0 / 256000.0).epsilon(1e-15));
    CHECK(cp.w == doctest::Approx(3.0 / 80.0).epsilon(1e-15));
    // Four-decimal published rounding.
    CHECK(std::abs(cp.n - 2.1938) < 1e-4);
    CHECK(std::abs(cp.s - 0.4625) < 1e-4);
    CHECK(std::abs(cp.w - 0.0375) < 1e-4);
}

TEST_CASE("critical point rejects degenerate parameter regimes") {
    TkParams boundary;
    boundary.rho0 = boundary.beta; // logistic factor forces N* = 0
    try {
        (void)critical_point(boundary);
        FAIL("expected SimError");
    } catch (const SimError& e) {
        CHECK(e.code() == Errc::no_interior_equilibrium);
    }

    TkParams negative_capacity;
    negative_capacity.delta = 1e-4; // W* huge -> kmax - c*W* < 0
    CHECK_THROWS_AS((void)critical_point(negative_capacity), SimError);
}

TEST_CASE("critical point zeroes the vector field across random draws") {
    std::mt19937_64 rng(20260815);
    for (int trial = 0; trial < 100; ++trial) {
        const TkParams p = random_params_with_equilibrium(rng);
        const State3 cp = critical_point(p);
        const State3 f = tk_rhs(cp, p);
        const double residual =
            std::max({std::abs(f.n), std::abs(f.s), std::abs(f.w)});
        CHECK(residual < 1e-10);
    }
}

TEST_CASE("closed-form equilibrium agrees with Newton iteration") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 25; ++trial) {
        const TkParams p = random_params_with_equilibrium(rng);
        const State3 cp = critical_point(p);
        const State3 start{cp.n * 1.001, cp.s * 1.001 + 1e-6, cp.w * 1.001};
        const State3 found = newton_equilibrium(p, start);
        const double scale =
            1.0 + std::max({std::abs(cp.n), std::abs(cp.s), std::abs(cp.w)});
        CHECK(std::abs(found.n - cp.n) < 1e-8 * scale);
        CHECK(std::abs(found.s - cp.s) < 1e-8 * scale);
        CHECK(std::abs(found.w - cp.w) < 1e-8 * scale);
    }
}

TEST_CASE("validity conditions reproduce the frozen baseline values") {
    const ValidityValues v = validity_values(TkParams{});
    CHECK(v.lhs10 == doctest::Approx(0.0825).epsilon(1e-12));
    CHECK(v.rhs10 == doctest::Approx(0.301875).epsilon(1e-12));
    CHECK(v.condition10());
    CHECK(v.lhs11 == doctest::Approx(0.00051684375).epsilon(1e-12));
    CHECK(v.rhs11 == doctest::Approx(0.00097934765625).epsilon(1e-12));
    CHECK(v.condition11());

    const auto [c10, c11] = validity_conditions(TkParams{});
    CHECK(c10);
    CHECK(c11);
}

TEST_CASE("validity conditions are strict at the boundary") {
    // Scale chosen so inequality (10) degenerates to LHS == RHS:
    // with c -> 0 it reads beta*delta*kmax*rho0 < delta*kmax*rho0^2, i.e.
    // beta < rho0; set beta = rho0 and kill the c terms by a tiny c.
    TkParams p;
    p.c = 1e-300;
    p.beta = p.rho0;
    const ValidityValues v = validity_values(p);
    CHECK(v.lhs10 == v.rhs10);
    CHECK_FALSE(v.condition10());
}

TEST_CASE("jacobian at the baseline equilibrium matches exact rationals") {
    const State3 cp = critical_point(TkParams{});
    const Matrix3 j = jacobian_tk(TkParams{}, cp);
    const Matrix3 expected = baseline_jacobian();
    for (std::size_t r = 0; r < 3; ++r) {
        for (std::size_t c = 0; c < 3; ++c) {
            CHECK(j(r, c) == doctest::Approx(expected(r, c)).epsilon(1e-12));
        }
    }
}

TEST_CASE("jacobian third row degenerates at the origin") {
    const TkParams p;
    const Matrix3 j = jacobian_tk(p, {0.0, 0.0, 0.0});
    CHECK(j(2, 0) == 0.0);
    CHECK(j(2, 1) == -p.alpha);
    CHECK(j(2, 2) == -p.b);
    CHECK(j(0, 0) == doctest::Approx(p.r0).epsilon(1e-15));
    CHECK(j(1, 0) == doctest::Approx(p.rho0 - p.beta).epsilon(1e-15));
}

TEST_CASE("jacobian rejects singular carrying capacity") {
    try {
        (void)jacobian_tk(TkParams{}, {1.0, 0.0, 1.5});
        FAIL("expected SimError");
    } catch (const SimError& e) {
        CHECK(e.code() == Errc::singular_carrying_capacity);
    }
}

TEST_CASE("jacobian matches central finite differences on random points") {
    std::mt19937_64 rng(424242);
    std::uniform_real_distribution<double> coord(0.05, 1.0);
    const double h = 1e-6;
    int tested = 0;
    while (tested < 200) {
        const TkParams p = random_params_with_equilibrium(rng);
        const State3 x{coord(rng), coord(rng), coord(rng)};
        if (p.kmax - p.c * (x.w + h) < 0.5) {
            // Keep the stencil well conditioned: the W-column derivatives
            // scale like 1/K^5, which would swamp the h^2 truncation bound.
            continue;
        }
        ++tested;
        const Matrix3 j = jacobian_tk(p, x);
        auto column = [&](State3 plus, State3 minus, std::size_t col) {
            const State3 fp = tk_rhs(plus, p);
            const State3 fm = tk_rhs(minus, p);
            CHECK(std::abs(j(0, col) - (fp.n - fm.n) / (2 * h)) < 1e-6);
            CHECK(std::abs(j(1, col) - (fp.s - fm.s) / (2 * h)) < 1e-6);
            CHECK(std::abs(j(2, col) - (fp.w - fm.w) / (2 * h)) < 1e-6);
        };
        column({x.n + h, x.s, x.w}, {x.n - h, x.s, x.w}, 0);
        column({x.n, x.s + h, x.w}, {x.n, x.s - h, x.w}, 1);
        column({x.n, x.s, x.w + h}, {x.n, x.s, x.w - h}, 2);
    }
}

TEST_CASE("char_poly fixes the leading coefficient convention") {
    const std::array<double, 4> ident = char_poly(Matrix3::identity());
    CHECK(ident[0] == -1.0);
    CHECK(ident[1] == 3.0);
    CHECK(ident[2] == -3.0);
    CHECK(ident[3] == 1.0);
    CHECK(std::abs(eval_poly(ident, {1.0, 0.0})) < 1e-14);

    const std::array<double, 4> diag = char_poly(Matrix3::diagonal(1, 2, 3));
    for (double root : {1.0, 2.0, 3.0}) {
        CHECK(std::abs(eval_poly(diag, {root, 0.0})) < 1e-12);
    }
}

TEST_CASE("char_poly of the baseline jacobian matches frozen coefficients") {
    const std::array<double, 4> c = char_poly(baseline_jacobian());
    CHECK(c[0] == -1.0);
    CHECK(c[1] == doctest::Approx(-0.06125).epsilon(1e-12));
    CHECK(c[2] == doctest::Approx(0.10157203125).epsilon(1e-12));
    CHECK(c[3] == doctest::Approx(-0.016453125).epsilon(1e-12));

    // Published four-decimal eigenvalues are near-roots of the polynomial;
    // their own rounding (about 4e-5 in the last component) dominates the
    // residual, so the bound is 1e-5 rather than the rounding-free 1e-14.
    for (const auto z : {std::complex<double>{-0.4085, 0.0},
                         std::complex<double>{0.1736, 0.1007},
                         std::complex<double>{0.1736, -0.1007}}) {
        CHECK(std::abs(eval_poly(c, z)) < 1e-5);
    }

    // The full-precision roots are exact to machine precision.
    for (const auto z :
         {std::complex<double>{-0.40849687952037944, 0.0},
          std::complex<double>{0.17362343976018976, 0.10065851490611194},
          std::complex<double>{0.17362343976018976, -0.10065851490611194}}) {
        CHECK(std::abs(eval_poly(c, z)) < 1e-14);
    }
}

TEST_CASE("eigenvalues of the baseline jacobian match frozen values") {
    const Eigen3 eig = eigenvalues3(baseline_jacobian());
    // Ordering: descending real part, conjugate pair with -imag first.
    CHECK(eig[0].real() == doctest::Approx(0.17362343976018976).epsilon(1e-12));
    CHECK(eig[1].real() == doctest::Approx(0.17362343976018976).epsilon(1e-12));
    CHECK(std::abs(eig[0].imag()) ==
          doctest::Approx(0.10065851490611194).epsilon(1e-12));
    CHECK(eig[0].imag() == -eig[1].imag());
    CHECK(eig[0].imag() < 0.0);
    CHECK(eig[2].real() == doctest::Approx(-0.40849687952037944).epsilon(1e-12));
    CHECK(eig[2].imag() == 0.0);

    // Published four-decimal values, each within 1e-3 per component.
    CHECK(std::abs(eig[2].real() - (-0.4085)) < 1e-3);
    CHECK(std::abs(eig[0].real() - 0.1736) < 1e-3);
    CHECK(std::abs(std::abs(eig[0].imag()) - 0.1007) < 1e-3);
}

TEST_CASE("eigenvalues of diagonal matrices follow the stated ordering") {
    const Eigen3 ident = eigenvalues3(Matrix3::identity());
    for (const auto& z : ident) {
        CHECK(z.real() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(z.imag() == 0.0);
    }

    const Eigen3 diag = eigenvalues3(Matrix3::diagonal(-1.0, -2.0, 5.0));
    CHECK(diag[0].real() == doctest::Approx(5.0).epsilon(1e-10));
    CHECK(diag[1].real() == doctest::Approx(-1.0).epsilon(1e-10));
    CHECK(diag[2].real() == doctest::Approx(-2.0).epsilon(1e-10));

    const Eigen3 zero = eigenvalues3(Matrix3{});
    for (const auto& z : zero) {
        CHECK(z == std::complex<double>(0.0, 0.0));
    }
}

TEST_CASE("eigenvalue trace and determinant identities hold on random matrices") {
    std::mt19937_64 rng(13371337);
    for (int trial = 0; trial < 1000; ++trial) {
        const Matrix3 m = random_matrix(rng);
        const Eigen3 eig = eigenvalues3(m);

        const std::complex<double> sum = eig[0] + eig[1] + eig[2];
        CHECK(std::abs(sum - std::complex<double>(m.trace(), 0.0)) < 1e-8);

        const std::complex<double> prod = eig[0] * eig[1] * eig[2];
        const double det = m.det();
        const double denom = std::max(1.0, std::abs(det));
        CHECK(std::abs(prod - std::complex<double>(det, 0.0)) / denom < 1e-8);

        // Residual bound relative to coefficient scale.
        const std::array<double, 4> c = char_poly(m);
        const double scale =
            std::max({1.0, std::abs(c[1]), std::abs(c[2]), std::abs(c[3])});
        for (const auto& z : eig) {
            CHECK(std::abs(eval_poly(c, z)) < 1e-8 * scale);
        }

        // Complex roots must come as an exact conjugate pair.
        int nonreal = 0;
        for (const auto& z : eig) {
            if (z.imag() != 0.0) {
                ++nonreal;
            }
        }
        CHECK((nonreal == 0 || nonreal == 2));
        if (nonreal == 2) {
            std::vector<std::complex<double>> pair;
            for (const auto& z : eig) {
                if (z.imag() != 0.0) {
                    pair.push_back(z);
                }
            }
            REQUIRE(pair.size() == 2);
            CHECK(pair[0].real() == pair[1].real());
            CHECK(pair[0].imag() == -pair[1].imag());
        }

        CHECK(std::is_sorted(eig.begin(), eig.end(),
                             [](const auto& a, const auto& b) {
                                 if (a.real() != b.real()) {
                                     return a.real() > b.real();
                                 }
                                 return a.imag() < b.imag();
                             }));
    }
}

TEST_CASE("classification follows the sign pattern of the real parts") {
    using C = std::complex<double>;
    CHECK(classify({C{-1, 0}, C{-2, 0}, C{-3, 0}}) ==
          Classification::stable_node);
    CHECK(classify({C{-1, 1}, C{-1, -1}, C{-3, 0}}) ==
          Classification::stable_focus);
    CHECK(classify({C{1, 0}, C{2, 0}, C{-3, 0}}) ==
          Classification::unstable_node);
    CHECK(classify({C{0.17, 0.1}, C{0.17, -0.1}, C{-0.4, 0}}) ==
          Classification::unstable_saddle_focus);
    CHECK(classify({C{-1, 0}, C{0, 1}, C{0, -1}}) == Classification::marginal);
    CHECK(classify({C{0, 0}, C{0, 0}, C{0, 0}}) == Classification::marginal);
    const double nan = std::nan("");
    CHECK(classify({C{nan, 0}, C{0, 0}, C{0, 0}}) ==
          Classification::degenerate);

    CHECK(std::string(to_string(Classification::unstable_saddle_focus)) ==
          "UnstableSaddleFocus");
    CHECK(std::string(to_string(Classification::marginal)) == "Marginal");
}

TEST_CASE("classification is invariant under positive scaling") {
    using C = std::complex<double>;
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> part(-2.0, 2.0);
    std::uniform_real_distribution<double> scale_dist(0.01, 100.0);
    for (int trial = 0; trial < 200; ++trial) {
        // Real triple or (real, conjugate pair) with parts safely away from
        // the threshold so scaling cannot cross it.
        auto off_axis = [&]() {
            double v = part(rng);
            if (std::abs(v) < 1e-3) {
                v = v < 0 ? v - 1e-3 : v + 1e-3;
            }
            return v;
        };
        Eigen3 eigs;
        if (trial % 2 == 0) {
            eigs = {C{off_axis(), 0}, C{off_axis(), 0}, C{off_axis(), 0}};
        } else {
            const double re = off_axis();
            const double im = std::abs(off_axis());
            eigs = {C{re, im}, C{re, -im}, C{off_axis(), 0}};
        }
        const double s = scale_dist(rng);
        const Eigen3 scaled{eigs[0] * s, eigs[1] * s, eigs[2] * s};
        CHECK(classify(eigs) == classify(scaled));
    }
}

TEST_CASE("full stability report for the baseline parameters") {
    const StabilityReport r = analyze_tk(TkParams{});
    CHECK(r.classification == Classification::unstable_saddle_focus);
    CHECK(r.condition10);
    CHECK(r.condition11);
    CHECK(r.critical_point.n == doctest::Approx(2.19375).epsilon(1e-12));
    CHECK(r.char_poly[0] == -1.0);
    CHECK(r.eigenvalues[2].real() ==
          doctest::Approx(-0.40849687952037944).epsilon(1e-12));

    // Report invariants: trace and determinant identities.
    std::complex<double> sum = r.eigenvalues[0] + r.eigenvalues[1] + r.eigenvalues[2];
    CHECK(std::abs(sum - std::complex<double>(r.jacobian.trace(), 0.0)) < 1e-8);
    std::complex<double> prod = r.eigenvalues[0] * r.eigenvalues[1] * r.eigenvalues[2];
    CHECK(std::abs(prod - std::complex<double>(r.jacobian.det(), 0.0)) < 1e-8);
}

TEST_CASE("baseline run approaches a limit cycle") {
    const auto sched = ParamSchedule::constant(TkParams{}, 1.0, 4000.0);
    SolverConfig cfg;
    cfg.nonnegative = {true, true, true};
    const std::vector<double> grid = uniform_grid(1.0, 4000.0, 4000);
    const Trajectory traj =
        integrate(ModelSpec::tk(), sched, std::array<double, 3>{1.0, 0.0, 1.0},
                  {1.0, 4000.0}, cfg, grid);

    const LimitCycleReport lc = limit_cycle_report(traj, 0, 0.5);
    CHECK(lc.converged);
    CHECK(lc.peak_count >= 20);
    CHECK(lc.period > 60.0);
    CHECK(lc.period < 100.0);
    CHECK(lc.amplitude > 1.0);
    CHECK(lc.max_height_variation < 0.01);
    CHECK(lc.max_spacing_variation < 0.02);

    // The cycle period sits within a factor of two of the linearized
    // oscillation period 2*pi / Im(lambda).
    const double eigen_period = 2.0 * std::numbers::pi / 0.10065851490611194;
    CHECK(lc.period / eigen_period > 1.0);
    CHECK(lc.period / eigen_period < 2.0);
}

TEST_CASE("constant trajectories report insufficient oscillations") {
    Trajectory flat;
    flat.dim = 1;
    flat.times = uniform_grid(0.0, 10.0, 101);
    flat.values.assign(101, 2.5);
    try {
        (void)limit_cycle_report(flat, 0, 1.0);
        FAIL("expected SimError");
    } catch (const SimError& e) {
        CHECK(e.code() == Errc::insufficient_oscillations);
    }
}

TEST_CASE("limit cycle report validates its arguments") {
    Trajectory flat;
    flat.dim = 1;
    flat.times = {0.0, 1.0, 2.0};
    flat.values = {0.0, 1.0, 0.0};
    CHECK_THROWS_AS((void)limit_cycle_report(flat, 2, 0.5), SimError);
    CHECK_THROWS_AS((void)limit_cycle_report(flat, 0, 0.0), SimError);
    CHECK_THROWS_AS((void)limit_cycle_report(flat, 0, 1.5), SimError);
}

TEST_CASE("closed predator-prey orbits report their own period") {
    const auto sched = ParamSchedule::constant(LvParams{}, 1.0, 350.0);
    const std::vector<double> grid = uniform_grid(1.0, 350.0, 7000);
    const Trajectory traj =
        integrate(ModelSpec::lv(), sched, std::array<double, 2>{100.0, 100.0},
                  {1.0, 350.0}, SolverConfig{}, grid);

    const LimitCycleReport lc = limit_cycle_report(traj, 0, 0.5);
    CHECK(lc.converged);
    CHECK(lc.period > 1.0);
    CHECK(lc.period < 2.0);

    // Independent period estimate: first local maximum of the sample
    // autocorrelation of the prey series, refined parabolically.
    const std::vector<double> r = traj.column(0);
    const double mean =
        std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(r.size());
    auto autocorr = [&](std::size_t lag) {
        double acc = 0.0;
        for (std::size_t i = 0; i + lag < r.size(); ++i) {
            acc += (r[i] - mean) * (r[i + lag] - mean);
        }
        return acc / static_cast<double>(r.size() - lag);
    };
    const double dt = traj.times[1] - traj.times[0];
    double oracle_period = 0.0;
    for (std::size_t lag = 2; lag < 500; ++lag) {
        const double prev = autocorr(lag - 1);
        const double here = autocorr(lag);
        const double next = autocorr(lag + 1);
        if (here > prev && here > next && here > 0.0) {
            // Parabolic vertex in lag units.
            const double offset = 0.5 * (prev - next) / (prev - 2 * here + next);
            oracle_period = (static_cast<double>(lag) + offset) * dt;
            break;
        }
    }
    REQUIRE(oracle_period > 0.0);
    CHECK(std::abs(lc.period - oracle_period) / oracle_period < 0.02);
}
