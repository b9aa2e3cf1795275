#include "sweepdyn/report.hpp"

#include <json.hpp>

#include "io_util.hpp"

namespace sweepdyn {

namespace {

using nlohmann::json;

json stats_to_json(const SolverStats& stats) {
    json j;
    j["steps_accepted"] = stats.steps_accepted;
    j["steps_rejected"] = stats.steps_rejected;
    j["rhs_evaluations"] = stats.rhs_evaluations;
    return j;
}

} // namespace

std::string stability_report_json(const StabilityReport& report,
                                  const SolverStats& stats) {
    json j;
    j["critical_point"] = {{"N", report.critical_point.n},
                           {"S", report.critical_point.s},
                           {"W", report.critical_point.w}};
    json jac = json::array();
    for (std::size_t r = 0; r < 3; ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < 3; ++c) {
            row.push_back(report.jacobian(r, c));
        }
        jac.push_back(std::move(row));
    }
    j["jacobian"] = std::move(jac);
    json eigs = json::array();
    for (const auto& lambda : report.eigenvalues) {
        eigs.push_back({{"re", lambda.real()}, {"im", lambda.imag()}});
    }
    j["eigenvalues"] = std::move(eigs);
    j["classification"] = to_string(report.classification);
    j["validity"] = {{"condition10", report.condition10},
                     {"condition11", report.condition11}};
    j["char_poly"] = report.char_poly;
    j["solver_stats"] = stats_to_json(stats);
    return j.dump(2) + "\n";
}

std::string scan_report_json(const std::vector<ScanResult>& results) {
    json rows = json::array();
    for (std::size_t rank = 0; rank < results.size(); ++rank) {
        const ScanResult& row = results[rank];
        json r;
        r["rank"] = rank + 1;
        r["index"] = row.index;
        r["subset"] = row.subset;
        r["max_ratio"] = row.max_ratio;
        r["any_detected"] = row.any_detected;
        r["failed"] = row.failed;
        r["error"] = row.error;
        json events = json::array();
        for (const SweepEvent& ev : row.events) {
            events.push_back({{"breakpoint_time", ev.breakpoint_time},
                              {"pre_envelope_max", ev.pre_envelope_max},
                              {"post_envelope_max", ev.post_envelope_max},
                              {"ratio", ev.ratio},
                              {"window", ev.window},
                              {"detected", ev.detected}});
        }
        r["events"] = std::move(events);
        rows.push_back(std::move(r));
    }
    json j;
    j["results"] = std::move(rows);
    return j.dump(2) + "\n";
}

void write_stability_report(const std::filesystem::path& path,
                            const StabilityReport& report, const SolverStats& stats) {
    detail::atomic_write_file(path, stability_report_json(report, stats));
}

void write_scan_report(const std::filesystem::path& path,
                       const std::vector<ScanResult>& results) {
    detail::atomic_write_file(path, scan_report_json(results));
}

} // namespace sweepdyn
