#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <vector>

#include "sweepdyn/integrator.hpp"
#include "sweepdyn/model.hpp"
#include "sweepdyn/sweep.hpp"

using namespace sweepdyn;

namespace {

Trajectory series(std::vector<double> ts, std::vector<double> vs) {
    Trajectory traj;
    traj.dim = 1;
    traj.times = std::move(ts);
    traj.values = std::move(vs);
    return traj;
}

/// Oscillation with period 10 whose amplitude jumps by `gain` at t = 100.
Trajectory switched_oscillation(double gain) {
    const std::size_t n = 2001;
    std::vector<double> ts(n);
    std::vector<double> vs(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = 0.1 * static_cast<double>(i);
        const double level = t > 100.0 ? gain : 1.0;
        ts[i] = t;
        vs[i] = level * (1.2 + std::sin(2.0 * std::numbers::pi * t / 10.0));
    }
    return series(std::move(ts), std::move(vs));
}

Trajectory tk_three_phase(const TkParams& p2, const TkParams& p3) {
    ParamSchedule sched;
    sched.segments = {{1.0, TkParams{}}, {1000.0, p2}, {2000.0, p3}};
    sched.horizon_end = 4000.0;
    SolverConfig cfg;
    cfg.nonnegative = {true, true, true};
    return integrate(ModelSpec::tk(), sched, std::array<double, 3>{1.0, 0.0, 1.0},
                     {1.0, 4000.0}, cfg, uniform_grid(1.0, 4000.0, 4000));
}

constexpr std::array<double, 2> k_breakpoints{1000.0, 2000.0};

const ScanResult& find_row(const std::vector<ScanResult>& rows,
                           const std::vector<std::string>& subset) {
    for (const auto& r : rows) {
        if (r.subset == subset) {
            return r;
        }
    }
    static ScanResult missing;
    REQUIRE(false);
    return missing;
}

} // namespace

TEST_CASE("envelope maxima on simple shapes") {
    const auto one_peak = envelope_maxima(series({0, 1, 2}, {1, 2, 1}), 0);
    REQUIRE(one_peak.size() == 1);
    CHECK(one_peak[0].first == 1.0);
    CHECK(one_peak[0].second == 2.0);

    CHECK(envelope_maxima(series({0, 1, 2, 3}, {1, 2, 3, 4}), 0).empty());
    CHECK(envelope_maxima(series({0, 1, 2, 3}, {4, 3, 2, 1}), 0).empty());

    // Plateau resolves to the earliest sample.
    const auto plateau =
        envelope_maxima(series({0, 1, 2, 3, 4}, {1, 3, 3, 3, 2}), 0);
    REQUIRE(plateau.size() == 1);
    CHECK(plateau[0].first == 1.0);

    // A plateau running into the series end is not a maximum.
    CHECK(envelope_maxima(series({0, 1, 2, 3}, {1, 3, 3, 3}), 0).empty());

    CHECK_THROWS_AS((void)envelope_maxima(series({0, 1}, {1, 2}), 0), SimError);
    CHECK_THROWS_AS((void)envelope_maxima(series({0, 1, 2}, {1, 2, 1}), 1),
                    SimError);
}

TEST_CASE("envelope maxima match a brute-force scan on the baseline run") {
    const Trajectory traj = tk_three_phase(TkParams{}, TkParams{});
    const auto maxima = envelope_maxima(traj, 0);

    std::vector<std::pair<double, double>> brute;
    for (std::size_t i = 1; i + 1 < traj.size(); ++i) {
        if (traj.value(i, 0) > traj.value(i - 1, 0) &&
            traj.value(i, 0) > traj.value(i + 1, 0)) {
            brute.emplace_back(traj.times[i], traj.value(i, 0));
        }
    }
    CHECK(maxima == brute);
    CHECK(maxima.size() > 30); // dozens of cycles over the full span
}

TEST_CASE("detect_sweeps flags an amplitude jump and ignores a small one") {
    const SweepConfig cfg;
    const std::array<double, 1> bp{100.0};

    const auto flagged = detect_sweeps(switched_oscillation(2.0), bp, cfg);
    REQUIRE(flagged.size() == 1);
    CHECK(flagged[0].breakpoint_time == 100.0);
    CHECK(flagged[0].detected);
    CHECK(flagged[0].ratio == doctest::Approx(2.0).epsilon(0.01));
    // Window defaults to the estimated pre-breakpoint period.
    CHECK(flagged[0].window == doctest::Approx(10.0).epsilon(0.02));
    CHECK(flagged[0].ratio > 0.0);

    const auto quiet = detect_sweeps(switched_oscillation(1.2), bp, cfg);
    REQUIRE(quiet.size() == 1);
    CHECK_FALSE(quiet[0].detected);
    CHECK(quiet[0].ratio == doctest::Approx(1.2).epsilon(0.01));
}

TEST_CASE("detection respects a threshold equal to the measured ratio") {
    SweepConfig cfg;
    cfg.window = 10.0;
    const Trajectory traj = switched_oscillation(2.0);
    const auto at_two = detect_sweeps(traj, std::array<double, 1>{100.0}, cfg);
    REQUIRE(at_two.size() == 1);

    SweepConfig exact = cfg;
    exact.threshold = at_two[0].ratio; // ratio >= threshold: boundary detects
    const auto boundary =
        detect_sweeps(traj, std::array<double, 1>{100.0}, exact);
    CHECK(boundary[0].detected);

    SweepConfig above = cfg;
    above.threshold = std::nextafter(at_two[0].ratio, 10.0);
    const auto miss = detect_sweeps(traj, std::array<double, 1>{100.0}, above);
    CHECK_FALSE(miss[0].detected);
}

TEST_CASE("detect_sweeps ratios are invariant under positive rescaling") {
    const Trajectory traj = switched_oscillation(1.8);
    Trajectory scaled = traj;
    for (double& v : scaled.values) {
        v *= 37.5;
    }
    const auto base = detect_sweeps(traj, std::array<double, 1>{100.0});
    const auto big = detect_sweeps(scaled, std::array<double, 1>{100.0});
    REQUIRE(base.size() == big.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
        CHECK(big[i].ratio == doctest::Approx(base[i].ratio).epsilon(1e-12));
        CHECK(big[i].detected == base[i].detected);
        CHECK(big[i].window == base[i].window);
    }
}

TEST_CASE("detect_sweeps falls back to a 500-unit window without peaks") {
    // Monotone rise: no pre-breakpoint maxima to estimate a period from.
    const std::size_t n = 2001;
    std::vector<double> ts(n);
    std::vector<double> vs(n);
    for (std::size_t i = 0; i < n; ++i) {
        ts[i] = static_cast<double>(i); // [0, 2000]
        vs[i] = 1.0 + 0.001 * static_cast<double>(i);
    }
    const auto events =
        detect_sweeps(series(std::move(ts), std::move(vs)),
                      std::array<double, 1>{1000.0});
    REQUIRE(events.size() == 1);
    CHECK(events[0].window == 500.0);
    CHECK(events[0].ratio > 1.0);
    CHECK_FALSE(events[0].detected);
}

TEST_CASE("detect_sweeps with no breakpoints returns nothing") {
    const auto events =
        detect_sweeps(switched_oscillation(2.0), std::span<const double>{});
    CHECK(events.empty());
}

TEST_CASE("windows that leave the span raise window_out_of_range") {
    SweepConfig cfg;
    cfg.window = 150.0; // bp at 100 with span [0, 200.1): 100 - 150 < 0
    try {
        (void)detect_sweeps(switched_oscillation(2.0),
                            std::array<double, 1>{100.0}, cfg);
        FAIL("expected SimError");
    } catch (const SimError& e) {
        CHECK(e.code() == Errc::window_out_of_range);
    }
}

TEST_CASE("sweep config validation") {
    SweepConfig bad_threshold;
    bad_threshold.threshold = 1.0;
    CHECK_THROWS_AS(bad_threshold.validate(), SimError);

    SweepConfig bad_window;
    bad_window.window = 0.0;
    CHECK_THROWS_AS(bad_window.validate(), SimError);

    CHECK_NOTHROW(SweepConfig{}.validate());
}

// Frozen scenario regressions. The ratios below were measured with this
// detector and cross-checked against an independent implementation of the
// same semantics; they guard against behavioural drift.

TEST_CASE("three-phase kmax/r0/delta schedule: frozen detector outcome") {
    TkParams p2;
    p2.kmax = 5.0;
    p2.r0 = 0.095;
    p2.delta = 0.45;
    TkParams p3;
    p3.kmax = 7.0;
    p3.r0 = 0.15;
    p3.delta = 0.95;
    const auto events =
        detect_sweeps(tk_three_phase(p2, p3), k_breakpoints);
    REQUIRE(events.size() == 2);
    CHECK(events[0].ratio == doctest::Approx(1.492038230).epsilon(1e-6));
    CHECK(events[1].ratio == doctest::Approx(1.353369501).epsilon(1e-6));
    CHECK_FALSE(events[0].detected); // 0.5% below the 1.5 threshold
    CHECK_FALSE(events[1].detected);
    CHECK(events[0].window == doctest::Approx(82.909091).epsilon(1e-4));
}

TEST_CASE("three-phase kmax/beta/rho0 schedule: frozen detector outcome") {
    TkParams p2;
    p2.kmax = 5.0;
    p2.beta = 0.25 / 3.0;
    p2.rho0 = 1.0 / 3.0;
    TkParams p3;
    p3.kmax = 7.0;
    p3.beta = 0.25 / 9.0;
    p3.rho0 = 1.0 / 9.0;
    const auto events =
        detect_sweeps(tk_three_phase(p2, p3), k_breakpoints);
    REQUIRE(events.size() == 2);
    CHECK(events[0].ratio == doctest::Approx(1.511575438).epsilon(1e-6));
    CHECK(events[1].ratio == doctest::Approx(1.149086467).epsilon(1e-6));
    CHECK(events[0].detected);
    CHECK_FALSE(events[1].detected);
}

TEST_CASE("three-phase a/b/alpha schedule: frozen detector outcome") {
    TkParams p2;
    p2.a = 0.01 / 3.0;
    p2.b = 0.15;
    p2.alpha = 0.3;
    TkParams p3;
    p3.a = 0.01 / 9.0;
    p3.b = 0.45;
    p3.alpha = 0.9;
    const auto events =
        detect_sweeps(tk_three_phase(p2, p3), k_breakpoints);
    REQUIRE(events.size() == 2);
    // The population floor rises (a sustained level shift) but the envelope
    // maxima stay capped, so the max-ratio detector sees ratios below 1.
    CHECK(events[0].ratio == doctest::Approx(0.968494926).epsilon(1e-6));
    CHECK(events[1].ratio == doctest::Approx(0.961380590).epsilon(1e-6));
    CHECK_FALSE(events[0].detected);
    CHECK_FALSE(events[1].detected);
}

TEST_CASE("delta-only schedule: frozen no-sweep outcome") {
    TkParams p2;
    p2.delta = 0.45;
    TkParams p3;
    p3.delta = 0.95;
    const auto events =
        detect_sweeps(tk_three_phase(p2, p3), k_breakpoints);
    REQUIRE(events.size() == 2);
    CHECK(events[0].ratio == doctest::Approx(1.038765098).epsilon(1e-6));
    CHECK(events[1].ratio == doctest::Approx(0.975423512).epsilon(1e-6));
    CHECK_FALSE(events[0].detected);
    CHECK_FALSE(events[1].detected);
}

TEST_CASE("kmax-only schedule detects the first sweep") {
    TkParams p2;
    p2.kmax = 5.0;
    TkParams p3;
    p3.kmax = 7.0;
    const auto events =
        detect_sweeps(tk_three_phase(p2, p3), k_breakpoints);
    REQUIRE(events.size() == 2);
    CHECK(events[0].ratio == doctest::Approx(1.619362831).epsilon(1e-6));
    CHECK(events[0].detected);
    CHECK(events[1].ratio == doctest::Approx(1.390197986).epsilon(1e-6));
    CHECK_FALSE(events[1].detected);
}

TEST_CASE("scan factor table pins the canonical order and values") {
    const auto& table = scan_factor_table();
    REQUIRE(table.size() == 9);
    const std::array<const char*, 9> names = {"a", "b", "c", "kmax", "r0",
                                              "alpha", "beta", "delta", "rho0"};
    for (std::size_t i = 0; i < 9; ++i) {
        CHECK(std::string(table[i].name) == names[i]);
    }
    CHECK(table[0].factors.phase2 == 1.0 / 3.0);
    CHECK(table[0].factors.phase3 == 1.0 / 9.0);
    CHECK(table[3].factors.phase2 == 5.0 / 3.0);
    CHECK(table[3].factors.phase3 == 7.0 / 3.0);
    CHECK(table[4].factors.phase2 == 0.095 / 0.015);
    CHECK(table[4].factors.phase3 == 0.15 / 0.015);
    // The two delta factors are written differently at the source and differ
    // in the last bit under IEEE evaluation.
    CHECK(table[7].factors.phase2 == 9.5);
    CHECK(table[7].factors.phase3 == 0.95 / 0.1);
    CHECK(table[7].factors.phase3 != 9.5);
}

TEST_CASE("apply_scan_factor targets the right field") {
    const TkParams base;
    CHECK(apply_scan_factor(base, 0, 2.0).a == base.a * 2.0);
    CHECK(apply_scan_factor(base, 1, 2.0).b == base.b * 2.0);
    CHECK(apply_scan_factor(base, 2, 2.0).c == base.c * 2.0);
    CHECK(apply_scan_factor(base, 3, 2.0).kmax == base.kmax * 2.0);
    CHECK(apply_scan_factor(base, 4, 2.0).r0 == base.r0 * 2.0);
    CHECK(apply_scan_factor(base, 5, 2.0).alpha == base.alpha * 2.0);
    CHECK(apply_scan_factor(base, 6, 2.0).beta == base.beta * 2.0);
    CHECK(apply_scan_factor(base, 7, 2.0).delta == base.delta * 2.0);
    CHECK(apply_scan_factor(base, 8, 2.0).rho0 == base.rho0 * 2.0);
    CHECK_THROWS_AS((void)apply_scan_factor(base, 9, 2.0), SimError);
}

TEST_CASE("size-1 scan enumerates nine subsets deterministically") {
    ScanOptions opts;
    opts.max_subset_size = 1;

    opts.threads = 1;
    const auto serial = scan_subsets(TkParams{}, opts);
    opts.threads = 4;
    const auto parallel = scan_subsets(TkParams{}, opts);

    REQUIRE(serial.size() == 9);
    REQUIRE(parallel.size() == 9);
    for (std::size_t i = 0; i < 9; ++i) {
        CHECK(serial[i].index == parallel[i].index);
        CHECK(serial[i].subset == parallel[i].subset);
        CHECK(serial[i].max_ratio == parallel[i].max_ratio); // bit-exact
        CHECK(serial[i].failed == parallel[i].failed);
        REQUIRE(serial[i].events.size() == parallel[i].events.size());
        for (std::size_t e = 0; e < serial[i].events.size(); ++e) {
            CHECK(serial[i].events[e].ratio == parallel[i].events[e].ratio);
        }
    }

    // Every size-1 subset appears exactly once.
    std::set<std::string> seen;
    for (const auto& r : serial) {
        REQUIRE(r.subset.size() == 1);
        seen.insert(r.subset[0]);
    }
    CHECK(seen.size() == 9);
}

TEST_CASE("full scan: row counts, rankings, and frozen special rows") {
    const auto results = scan_subsets(TkParams{}, ScanOptions{});
    REQUIRE(results.size() == 255); // 9 + 36 + 84 + 126

    // Canonical indices are a permutation of 0..254.
    std::set<std::size_t> indices;
    for (const auto& r : results) {
        indices.insert(r.index);
        REQUIRE(!r.subset.empty());
        REQUIRE(r.subset.size() <= 4);
        if (r.failed) {
            CHECK(!r.error.empty());
            CHECK(r.events.empty());
        }
    }
    CHECK(indices.size() == 255);
    CHECK(*indices.begin() == 0);
    CHECK(*indices.rbegin() == 254);

    // Ranking is max_ratio descending with index ascending as tie-break.
    for (std::size_t i = 0; i + 1 < results.size(); ++i) {
        const bool ordered =
            results[i].max_ratio > results[i + 1].max_ratio ||
            (results[i].max_ratio == results[i + 1].max_ratio &&
             results[i].index < results[i + 1].index);
        CHECK(ordered);
    }

    const ScanResult& t2 = find_row(results, {"kmax", "r0", "delta"});
    CHECK_FALSE(t2.failed);
    REQUIRE(t2.events.size() == 2);
    CHECK(t2.events[0].ratio == doctest::Approx(1.532067594).epsilon(1e-6));
    CHECK(t2.events[1].ratio == doctest::Approx(1.209304195).epsilon(1e-6));
    CHECK(t2.any_detected); // first breakpoint crosses the threshold

    const ScanResult& t3 = find_row(results, {"kmax", "beta", "rho0"});
    CHECK_FALSE(t3.failed);
    CHECK(t3.max_ratio == doctest::Approx(1.511575438).epsilon(1e-6));
    CHECK(t3.any_detected);

    const ScanResult& t4 = find_row(results, {"a", "b", "alpha"});
    CHECK_FALSE(t4.failed);
    CHECK(t4.max_ratio == doctest::Approx(0.968494926).epsilon(1e-6));
    CHECK_FALSE(t4.any_detected);

    const ScanResult& delta_row = find_row(results, {"delta"});
    CHECK_FALSE(delta_row.failed);
    REQUIRE(delta_row.events.size() == 2);
    CHECK(delta_row.events[0].ratio ==
          doctest::Approx(1.062631778).epsilon(1e-6));
    CHECK(delta_row.events[1].ratio ==
          doctest::Approx(0.996945922).epsilon(1e-6));
    CHECK_FALSE(delta_row.any_detected);

    // Scans are pure: a second run reproduces the ranking bit-for-bit.
    const auto again = scan_subsets(TkParams{}, ScanOptions{});
    REQUIRE(again.size() == results.size());
    for (std::size_t i = 0; i < results.size(); ++i) {
        CHECK(again[i].index == results[i].index);
        CHECK(again[i].max_ratio == results[i].max_ratio);
    }
}

TEST_CASE("scan options validation") {
    ScanOptions bad_size;
    bad_size.max_subset_size = 0;
    CHECK_THROWS_AS((void)scan_subsets(TkParams{}, bad_size), SimError);
    bad_size.max_subset_size = 10;
    CHECK_THROWS_AS((void)scan_subsets(TkParams{}, bad_size), SimError);

    ScanOptions bad_order;
    bad_order.breakpoints = {2000.0, 1000.0};
    CHECK_THROWS_AS((void)scan_subsets(TkParams{}, bad_order), SimError);
}
