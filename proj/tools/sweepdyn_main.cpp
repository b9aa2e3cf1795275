#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>

#include "sweepdyn/analysis.hpp"
#include "sweepdyn/config.hpp"
#include "sweepdyn/csv.hpp"
#include "sweepdyn/errors.hpp"
#include "sweepdyn/integrator.hpp"
#include "sweepdyn/model.hpp"
#include "sweepdyn/report.hpp"
#include "sweepdyn/svg.hpp"
#include "sweepdyn/sweep.hpp"

namespace {

constexpr const char* k_version = "sweepdyn 1.0.0";

/// Maps failure categories onto the documented exit codes: 2 for anything the
/// user can fix in the config or invocation, 4 for a missing interior
/// equilibrium, 3 for numerical failures.
int exit_code_for(const sweepdyn::SimError& e) {
    switch (e.code()) {
    case sweepdyn::Errc::invalid_config:
    case sweepdyn::Errc::out_of_schedule:
    case sweepdyn::Errc::window_out_of_range:
        return 2;
    case sweepdyn::Errc::no_interior_equilibrium:
        return 4;
    default:
        return 3;
    }
}

sweepdyn::Trajectory run_config(const sweepdyn::RunConfig& cfg) {
    std::vector<double> grid;
    if (cfg.grid_points != 0) {
        grid = sweepdyn::uniform_grid(cfg.span.t0, cfg.span.t1, cfg.grid_points);
    }
    return sweepdyn::integrate(cfg.model, cfg.schedule, cfg.y0, cfg.span,
                               cfg.solver, grid);
}

const sweepdyn::TkParams& first_tk_params(const sweepdyn::RunConfig& cfg) {
    if (cfg.model.kind != sweepdyn::ModelKind::turchin_korotayev) {
        sweepdyn::raise(sweepdyn::Errc::invalid_config,
                        "stability analysis requires the demographic model "
                        "(config.model \"tk\")");
    }
    return std::get<sweepdyn::TkParams>(cfg.schedule.segments.front().params);
}

struct AnalysisOutcome {
    sweepdyn::StabilityReport report;
    sweepdyn::SolverStats stats;
};

/// Stability report for the given parameters. The single vector-field
/// evaluation recorded in solver_stats is a residual check of the returned
/// critical point.
AnalysisOutcome analyze_with_residual_check(const sweepdyn::TkParams& params) {
    AnalysisOutcome out{sweepdyn::analyze_tk(params), {}};
    const sweepdyn::State3 rhs = sweepdyn::tk_rhs(out.report.critical_point, params);
    out.stats.rhs_evaluations = 1;
    const double residual =
        std::max({std::abs(rhs.n), std::abs(rhs.s), std::abs(rhs.w)});
    if (!(residual < 1e-8)) {
        sweepdyn::raise(sweepdyn::Errc::non_finite_state,
                        "critical-point residual check failed (" +
                            std::to_string(residual) + ")");
    }
    return out;
}

unsigned scan_threads_from_env() {
    const char* env = std::getenv("SWEEPDYN_THREADS");
    if (env == nullptr || *env == '\0') {
        return 0; // hardware concurrency
    }
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (*end != '\0' || v == 0 || v > 4096) {
        sweepdyn::raise(sweepdyn::Errc::invalid_config,
                        "SWEEPDYN_THREADS must be a positive integer, got \"" +
                            std::string(env) + "\"");
    }
    return static_cast<unsigned>(v);
}

void note_written(const std::filesystem::path& path) {
    std::cout << "wrote " << path.string() << "\n";
}

int cmd_simulate(const std::string& config_path, const std::string& out_override) {
    sweepdyn::RunConfig cfg = sweepdyn::load_config(config_path);
    if (!out_override.empty()) {
        cfg.output_dir = out_override;
    }
    const std::filesystem::path dir(cfg.output_dir);

    const sweepdyn::Trajectory traj = run_config(cfg);
    std::cout << "integrated " << traj.size() << " samples ("
              << traj.stats.steps_accepted << " steps accepted, "
              << traj.stats.steps_rejected << " rejected)\n";

    if (cfg.outputs.trajectory_csv) {
        const auto path = dir / "trajectory.csv";
        sweepdyn::write_trajectory_csv(path, traj);
        note_written(path);
    }
    if (cfg.outputs.plot_svg) {
        const auto path = dir / "trajectory.svg";
        sweepdyn::write_trajectory_svg(path, traj);
        note_written(path);
    }
    if (cfg.outputs.analysis_json) {
        const AnalysisOutcome out = analyze_with_residual_check(first_tk_params(cfg));
        const auto path = dir / "analysis.json";
        sweepdyn::write_stability_report(path, out.report, out.stats);
        note_written(path);
    }
    return 0;
}

int cmd_analyze(const std::string& config_path) {
    const sweepdyn::RunConfig cfg = sweepdyn::load_config(config_path);
    const AnalysisOutcome out = analyze_with_residual_check(first_tk_params(cfg));
    const auto path = std::filesystem::path(cfg.output_dir) / "analysis.json";
    sweepdyn::write_stability_report(path, out.report, out.stats);
    std::cout << sweepdyn::stability_report_json(out.report, out.stats);
    return 0;
}

int cmd_scan(const std::string& config_path, std::size_t max_subset_size) {
    const sweepdyn::RunConfig cfg = sweepdyn::load_config(config_path);
    const sweepdyn::TkParams& base = first_tk_params(cfg);

    sweepdyn::ScanOptions opts;
    opts.max_subset_size = max_subset_size;
    opts.threads = scan_threads_from_env();
    opts.solver = cfg.solver;

    const auto results = sweepdyn::scan_subsets(base, opts);

    std::size_t detected = 0;
    std::size_t failed = 0;
    for (const auto& row : results) {
        detected += row.any_detected ? 1 : 0;
        failed += row.failed ? 1 : 0;
    }
    std::cout << "scanned " << results.size() << " parameter subsets: " << detected
              << " with a detected sweep, " << failed << " failed\n";
    const std::size_t top = std::min<std::size_t>(5, results.size());
    for (std::size_t i = 0; i < top; ++i) {
        const auto& row = results[i];
        std::cout << "  " << (i + 1) << ". {";
        for (std::size_t k = 0; k < row.subset.size(); ++k) {
            std::cout << (k ? "," : "") << row.subset[k];
        }
        std::cout << "} max_ratio=" << row.max_ratio
                  << (row.any_detected ? " (detected)" : "") << "\n";
    }

    const std::filesystem::path dir(cfg.output_dir);
    const auto csv_path = dir / "scan.csv";
    sweepdyn::write_scan_csv(csv_path, results);
    note_written(csv_path);
    const auto json_path = dir / "scan.json";
    sweepdyn::write_scan_report(json_path, results);
    note_written(json_path);
    return 0;
}

enum class FigureStyle { component_series, phase_portrait, prey_series };

struct FigureSpec {
    const char* preset;
    FigureStyle style;
    const char* title;
};

const std::map<std::string, FigureSpec>& figure_table() {
    static const std::map<std::string, FigureSpec> figures = {
        {"fig2", {"tk-baseline", FigureStyle::component_series, "Demographic baseline"}},
        {"fig3", {"lv-baseline", FigureStyle::phase_portrait, "Predator-prey phase portrait"}},
        {"fig4",
         {"lv-switched-code", FigureStyle::phase_portrait,
          "Predator-prey phase portrait, switched gamma"}},
        {"fig5",
         {"lv-switched-code", FigureStyle::prey_series,
          "Prey population under switched gamma"}},
        {"fig6",
         {"tk-table2", FigureStyle::component_series,
          "Three-phase schedule: kmax, r0, delta"}},
        {"fig7",
         {"tk-kmax-only", FigureStyle::component_series, "Three-phase schedule: kmax"}},
        {"fig8",
         {"tk-r0-only", FigureStyle::component_series, "Three-phase schedule: r0"}},
        {"fig9",
         {"tk-delta-only", FigureStyle::component_series, "Three-phase schedule: delta"}},
        {"fig10",
         {"tk-table3", FigureStyle::component_series,
          "Three-phase schedule: kmax, beta, rho0"}},
        {"fig11",
         {"tk-table4", FigureStyle::component_series,
          "Three-phase schedule: a, b, alpha"}},
    };
    return figures;
}

int cmd_reproduce(const std::string& figure, const std::string& out_dir) {
    const auto it = figure_table().find(figure);
    if (it == figure_table().end()) {
        std::string known;
        for (const auto& [name, spec] : figure_table()) {
            known += known.empty() ? name : ", " + name;
        }
        sweepdyn::raise(sweepdyn::Errc::invalid_config,
                        "unknown figure id \"" + figure + "\" (known: " + known + ")");
    }
    const FigureSpec& spec = it->second;

    sweepdyn::RunConfig cfg = sweepdyn::preset(spec.preset);
    if (!out_dir.empty()) {
        cfg.output_dir = out_dir;
    }
    const std::filesystem::path dir(cfg.output_dir);

    const sweepdyn::Trajectory traj = run_config(cfg);

    const auto csv_path = dir / (figure + ".csv");
    sweepdyn::write_trajectory_csv(csv_path, traj);
    note_written(csv_path);

    sweepdyn::PlotOptions options;
    options.title = spec.title;
    const auto svg_path = dir / (figure + ".svg");
    switch (spec.style) {
    case FigureStyle::component_series:
        options.x_label = "t";
        sweepdyn::write_trajectory_svg(svg_path, traj, options);
        break;
    case FigureStyle::phase_portrait:
        sweepdyn::write_phase_svg(svg_path, traj, 0, 1, options);
        break;
    case FigureStyle::prey_series:
        options.x_label = "t";
        options.y_label = "R";
        sweepdyn::write_line_svg(svg_path, {{"R", traj.times, traj.column(0)}}, options);
        break;
    }
    note_written(svg_path);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Demographic-structural and predator-prey simulation toolkit"};
    app.set_version_flag("--version", std::string(k_version));
    app.require_subcommand(0, 1);

    std::string sim_config;
    std::string sim_out;
    CLI::App* simulate = app.add_subcommand(
        "simulate", "Integrate a configured run and emit trajectory artifacts");
    simulate->add_option("--config", sim_config, "JSON run config or preset reference")
        ->required();
    simulate->add_option("--out", sim_out, "output directory (overrides config)");

    std::string analyze_config;
    CLI::App* analyze = app.add_subcommand(
        "analyze", "Equilibrium stability report for a demographic config");
    analyze->add_option("--config", analyze_config, "JSON run config or preset reference")
        ->required();

    std::string scan_config;
    std::size_t max_subset_size = 4;
    CLI::App* scan = app.add_subcommand(
        "scan", "Rank parameter subsets by sweep response under the three-phase schedule");
    scan->add_option("--config", scan_config, "JSON run config supplying base parameters")
        ->required();
    scan->add_option("--max-subset-size", max_subset_size,
                     "largest subset cardinality to enumerate (1-9)")
        ->check(CLI::Range(1, 9));

    std::string figure;
    std::string reproduce_out;
    CLI::App* reproduce =
        app.add_subcommand("reproduce", "Regenerate a named figure's CSV and SVG");
    reproduce->add_option("--figure", figure, "figure id (fig2..fig11)")->required();
    reproduce->add_option("--out", reproduce_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (simulate->parsed()) {
            return cmd_simulate(sim_config, sim_out);
        }
        if (analyze->parsed()) {
            return cmd_analyze(analyze_config);
        }
        if (scan->parsed()) {
            return cmd_scan(scan_config, max_subset_size);
        }
        if (reproduce->parsed()) {
            return cmd_reproduce(figure, reproduce_out);
        }
    } catch (const sweepdyn::SimError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }

    std::cerr << app.help();
    return 2;
}
