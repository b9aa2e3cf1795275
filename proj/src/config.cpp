#include "sweepdyn/config.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <string>
#include <utility>
#include <variant>

#include <json.hpp>

#include "io_util.hpp"
#include "sweepdyn/errors.hpp"

namespace sweepdyn {

namespace {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

json params_to_json(const ParamSet& params) {
    json j;
    if (const auto* tk = std::get_if<TkParams>(&params)) {
        j["r0"] = tk->r0;
        j["rho0"] = tk->rho0;
        j["c"] = tk->c;
        j["a"] = tk->a;
        j["kmax"] = tk->kmax;
        j["b"] = tk->b;
        j["beta"] = tk->beta;
        j["delta"] = tk->delta;
        j["alpha"] = tk->alpha;
    } else {
        const auto& lv = std::get<LvParams>(params);
        j["alpha"] = lv.alpha;
        j["beta"] = lv.beta;
        j["gamma"] = lv.gamma;
        j["delta"] = lv.delta;
    }
    return j;
}

json config_to_json(const RunConfig& cfg) {
    json j;
    j["model"] = to_string(cfg.model.kind);
    j["y0"] = cfg.y0;
    j["t_span"] = {cfg.span.t0, cfg.span.t1};
    j["grid_points"] = static_cast<std::uint64_t>(cfg.grid_points);

    json solver;
    solver["rel_tol"] = cfg.solver.rel_tol;
    solver["abs_tol"] = cfg.solver.abs_tol;
    solver["h_init"] = cfg.solver.h_init;
    solver["h_min"] = cfg.solver.h_min;
    solver["h_max"] = cfg.solver.h_max;
    solver["max_steps"] = cfg.solver.max_steps;
    solver["nonnegative"] = json::array();
    for (const bool flag : cfg.solver.nonnegative) {
        solver["nonnegative"].push_back(flag);
    }
    j["solver"] = std::move(solver);

    json schedule;
    schedule["horizon_end"] = cfg.schedule.horizon_end;
    schedule["segments"] = json::array();
    for (const auto& seg : cfg.schedule.segments) {
        json s;
        s["t_start"] = seg.t_start;
        s["params"] = params_to_json(seg.params);
        schedule["segments"].push_back(std::move(s));
    }
    j["schedule"] = std::move(schedule);

    json outputs;
    outputs["trajectory_csv"] = cfg.outputs.trajectory_csv;
    outputs["analysis_json"] = cfg.outputs.analysis_json;
    outputs["plot_svg"] = cfg.outputs.plot_svg;
    j["outputs"] = std::move(outputs);

    j["output_dir"] = cfg.output_dir;
    return j;
}

// ---------------------------------------------------------------------------
// Strict parsing
// ---------------------------------------------------------------------------

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    raise(Errc::invalid_config, where + ": " + what);
}

void expect_object(const json& j, const std::string& where) {
    if (!j.is_object()) {
        fail(where, "must be an object");
    }
}

void reject_unknown_keys(const json& j, const std::string& where,
                         std::initializer_list<const char*> allowed) {
    for (const auto& item : j.items()) {
        const bool known = std::any_of(allowed.begin(), allowed.end(),
                                       [&](const char* k) { return item.key() == k; });
        if (!known) {
            fail(where, "unknown key \"" + item.key() + "\"");
        }
    }
}

double to_number(const json& v, const std::string& where) {
    if (!v.is_number()) {
        fail(where, "must be a number");
    }
    return v.get<double>();
}

bool to_bool(const json& v, const std::string& where) {
    if (!v.is_boolean()) {
        fail(where, "must be a boolean");
    }
    return v.get<bool>();
}

std::uint64_t to_count(const json& v, const std::string& where) {
    if (!v.is_number_unsigned()) {
        fail(where, "must be a nonnegative integer");
    }
    return v.get<std::uint64_t>();
}

/// Overwrites `target` with the value under `key` when present.
void read_number(const json& j, const char* key, const std::string& where,
                 double& target) {
    if (const auto it = j.find(key); it != j.end()) {
        target = to_number(*it, where + "." + key);
    }
}

ParamSet params_from_json(const json& j, ModelKind kind, const std::string& where) {
    expect_object(j, where);
    if (kind == ModelKind::turchin_korotayev) {
        reject_unknown_keys(j, where,
                            {"r0", "rho0", "c", "a", "kmax", "b", "beta", "delta",
                             "alpha"});
        TkParams p;
        read_number(j, "r0", where, p.r0);
        read_number(j, "rho0", where, p.rho0);
        read_number(j, "c", where, p.c);
        read_number(j, "a", where, p.a);
        read_number(j, "kmax", where, p.kmax);
        read_number(j, "b", where, p.b);
        read_number(j, "beta", where, p.beta);
        read_number(j, "delta", where, p.delta);
        read_number(j, "alpha", where, p.alpha);
        return p;
    }
    reject_unknown_keys(j, where, {"alpha", "beta", "gamma", "delta"});
    LvParams p;
    read_number(j, "alpha", where, p.alpha);
    read_number(j, "beta", where, p.beta);
    read_number(j, "gamma", where, p.gamma);
    read_number(j, "delta", where, p.delta);
    return p;
}

SolverConfig solver_from_json(const json& j, const std::string& where) {
    expect_object(j, where);
    reject_unknown_keys(j, where,
                        {"rel_tol", "abs_tol", "h_init", "h_min", "h_max",
                         "max_steps", "nonnegative"});
    SolverConfig cfg;
    read_number(j, "rel_tol", where, cfg.rel_tol);
    read_number(j, "abs_tol", where, cfg.abs_tol);
    read_number(j, "h_init", where, cfg.h_init);
    read_number(j, "h_min", where, cfg.h_min);
    read_number(j, "h_max", where, cfg.h_max);
    if (const auto it = j.find("max_steps"); it != j.end()) {
        cfg.max_steps = to_count(*it, where + ".max_steps");
    }
    if (const auto it = j.find("nonnegative"); it != j.end()) {
        if (!it->is_array()) {
            fail(where + ".nonnegative", "must be an array of booleans");
        }
        cfg.nonnegative.clear();
        for (std::size_t i = 0; i < it->size(); ++i) {
            cfg.nonnegative.push_back(
                to_bool((*it)[i], where + ".nonnegative[" + std::to_string(i) + "]"));
        }
    }
    return cfg;
}

ParamSchedule schedule_from_json(const json& j, ModelKind kind,
                                 const std::string& where) {
    expect_object(j, where);
    reject_unknown_keys(j, where, {"horizon_end", "segments"});
    const auto horizon = j.find("horizon_end");
    if (horizon == j.end()) {
        fail(where, "missing required key \"horizon_end\"");
    }
    const auto segments = j.find("segments");
    if (segments == j.end()) {
        fail(where, "missing required key \"segments\"");
    }
    if (!segments->is_array()) {
        fail(where + ".segments", "must be an array");
    }

    ParamSchedule schedule;
    schedule.horizon_end = to_number(*horizon, where + ".horizon_end");
    for (std::size_t i = 0; i < segments->size(); ++i) {
        const std::string seg_where = where + ".segments[" + std::to_string(i) + "]";
        const json& seg = (*segments)[i];
        expect_object(seg, seg_where);
        reject_unknown_keys(seg, seg_where, {"t_start", "params"});
        const auto t_start = seg.find("t_start");
        if (t_start == seg.end()) {
            fail(seg_where, "missing required key \"t_start\"");
        }
        const auto params = seg.find("params");
        if (params == seg.end()) {
            fail(seg_where, "missing required key \"params\"");
        }
        schedule.segments.push_back(
            {to_number(*t_start, seg_where + ".t_start"),
             params_from_json(*params, kind, seg_where + ".params")});
    }
    return schedule;
}

RunConfig parse_config_object(const json& j) {
    expect_object(j, "config");
    reject_unknown_keys(j, "config",
                        {"model", "y0", "t_span", "grid_points", "solver",
                         "schedule", "outputs", "output_dir"});

    RunConfig cfg;

    const auto model = j.find("model");
    if (model == j.end()) {
        fail("config", "missing required key \"model\"");
    }
    if (!model->is_string()) {
        fail("config.model", "must be a string");
    }
    const auto model_name = model->get<std::string>();
    if (model_name == "tk") {
        cfg.model = ModelSpec::tk();
    } else if (model_name == "lv") {
        cfg.model = ModelSpec::lv();
    } else {
        fail("config.model", "unknown model \"" + model_name + "\" (expected \"tk\" or \"lv\")");
    }

    const auto y0 = j.find("y0");
    if (y0 == j.end()) {
        fail("config", "missing required key \"y0\"");
    }
    if (!y0->is_array()) {
        fail("config.y0", "must be an array of numbers");
    }
    for (std::size_t i = 0; i < y0->size(); ++i) {
        cfg.y0.push_back(to_number((*y0)[i], "config.y0[" + std::to_string(i) + "]"));
    }

    const auto span = j.find("t_span");
    if (span == j.end()) {
        fail("config", "missing required key \"t_span\"");
    }
    if (!span->is_array() || span->size() != 2) {
        fail("config.t_span", "must be an array [t0, t1]");
    }
    cfg.span.t0 = to_number((*span)[0], "config.t_span[0]");
    cfg.span.t1 = to_number((*span)[1], "config.t_span[1]");

    if (const auto it = j.find("grid_points"); it != j.end()) {
        cfg.grid_points = static_cast<std::size_t>(to_count(*it, "config.grid_points"));
    }
    if (const auto it = j.find("solver"); it != j.end()) {
        cfg.solver = solver_from_json(*it, "config.solver");
    }

    const auto schedule = j.find("schedule");
    if (schedule == j.end()) {
        fail("config", "missing required key \"schedule\"");
    }
    cfg.schedule = schedule_from_json(*schedule, cfg.model.kind, "config.schedule");

    if (const auto it = j.find("outputs"); it != j.end()) {
        expect_object(*it, "config.outputs");
        reject_unknown_keys(*it, "config.outputs",
                            {"trajectory_csv", "analysis_json", "plot_svg"});
        if (const auto f = it->find("trajectory_csv"); f != it->end()) {
            cfg.outputs.trajectory_csv = to_bool(*f, "config.outputs.trajectory_csv");
        }
        if (const auto f = it->find("analysis_json"); f != it->end()) {
            cfg.outputs.analysis_json = to_bool(*f, "config.outputs.analysis_json");
        }
        if (const auto f = it->find("plot_svg"); f != it->end()) {
            cfg.outputs.plot_svg = to_bool(*f, "config.outputs.plot_svg");
        }
    }

    if (const auto it = j.find("output_dir"); it != j.end()) {
        if (!it->is_string()) {
            fail("config.output_dir", "must be a string");
        }
        cfg.output_dir = it->get<std::string>();
    }

    cfg.validate();
    return cfg;
}

RunConfig config_from_json(const json& doc) {
    if (doc.is_object() && doc.contains("preset")) {
        const json& name = doc["preset"];
        if (!name.is_string()) {
            fail("config.preset", "must be a preset name string");
        }
        json merged = config_to_json(preset(name.get<std::string>()));
        json overrides = doc;
        overrides.erase("preset");
        merged.merge_patch(overrides);
        return parse_config_object(merged);
    }
    return parse_config_object(doc);
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

/// Three-phase demographic schedule: baseline until t = 1000, `phase2` until
/// t = 2000, `phase3` through t = 4000.
RunConfig tk_scenario(const TkParams& phase2, const TkParams& phase3) {
    RunConfig cfg;
    cfg.model = ModelSpec::tk();
    cfg.y0 = {1.0, 0.0, 1.0};
    cfg.span = {1.0, 4000.0};
    cfg.grid_points = 4000;
    cfg.solver.nonnegative = {true, true, true};
    cfg.schedule.segments = {{1.0, TkParams{}}, {1000.0, phase2}, {2000.0, phase3}};
    cfg.schedule.horizon_end = 4000.0;
    cfg.outputs = {true, false, true};
    return cfg;
}

RunConfig lv_scenario(std::vector<ScheduleSegment> segments, double horizon,
                      std::size_t grid_points) {
    RunConfig cfg;
    cfg.model = ModelSpec::lv();
    cfg.y0 = {100.0, 100.0};
    cfg.span = {segments.front().t_start, horizon};
    cfg.grid_points = grid_points;
    cfg.schedule.segments = std::move(segments);
    cfg.schedule.horizon_end = horizon;
    cfg.outputs = {true, false, true};
    return cfg;
}

LvParams lv_gamma(double gamma) {
    LvParams p;
    p.gamma = gamma;
    return p;
}

RunConfig make_preset(std::string_view name) {
    if (name == "tk-baseline") {
        RunConfig cfg = tk_scenario(TkParams{}, TkParams{});
        cfg.schedule.segments = {{1.0, TkParams{}}};
        cfg.outputs.analysis_json = true;
        return cfg;
    }
    if (name == "tk-table2") {
        TkParams p2;
        p2.r0 = 0.095;
        p2.kmax = 5.0;
        p2.delta = 0.45;
        TkParams p3;
        p3.r0 = 0.15;
        p3.kmax = 7.0;
        p3.delta = 0.95;
        return tk_scenario(p2, p3);
    }
    if (name == "tk-table3") {
        TkParams p2;
        p2.kmax = 5.0;
        p2.beta = 0.25 / 3.0;
        p2.rho0 = 1.0 / 3.0;
        TkParams p3;
        p3.kmax = 7.0;
        p3.beta = 0.25 / 9.0;
        p3.rho0 = 1.0 / 9.0;
        return tk_scenario(p2, p3);
    }
    if (name == "tk-table4") {
        TkParams p2;
        p2.a = 0.01 / 3.0;
        p2.b = 0.15;
        p2.alpha = 0.3;
        TkParams p3;
        p3.a = 0.01 / 9.0;
        p3.b = 0.45;
        p3.alpha = 0.9;
        return tk_scenario(p2, p3);
    }
    if (name == "tk-kmax-only") {
        TkParams p2;
        p2.kmax = 5.0;
        TkParams p3;
        p3.kmax = 7.0;
        return tk_scenario(p2, p3);
    }
    if (name == "tk-r0-only") {
        TkParams p2;
        p2.r0 = 0.095;
        TkParams p3;
        p3.r0 = 0.15;
        return tk_scenario(p2, p3);
    }
    if (name == "tk-delta-only") {
        TkParams p2;
        p2.delta = 0.45;
        TkParams p3;
        p3.delta = 0.95;
        return tk_scenario(p2, p3);
    }
    if (name == "lv-baseline") {
        return lv_scenario({{1.0, LvParams{}}}, 350.0, 7000);
    }
    if (name == "lv-switched-code") {
        return lv_scenario({{1.0, lv_gamma(0.1)},
                            {50.0, lv_gamma(0.2)},
                            {100.0, lv_gamma(0.3)},
                            {300.0, lv_gamma(0.1)}},
                           350.0, 7000);
    }
    if (name == "lv-switched-text") {
        return lv_scenario({{1.0, lv_gamma(0.1)},
                            {500.0, lv_gamma(0.2)},
                            {1000.0, lv_gamma(0.3)},
                            {3000.0, lv_gamma(0.1)}},
                           3500.0, 70000);
    }
    raise(Errc::invalid_config, "unknown preset \"" + std::string(name) + "\"");
}

} // namespace

// ---------------------------------------------------------------------------
// Public interface
// ---------------------------------------------------------------------------

void RunConfig::validate() const {
    model.validate();
    if (y0.size() != model.dimension) {
        raise(Errc::invalid_config,
              "y0 has " + std::to_string(y0.size()) + " components but the model needs " +
                  std::to_string(model.dimension));
    }
    for (const double v : y0) {
        if (!std::isfinite(v)) {
            raise(Errc::invalid_config, "y0 components must be finite");
        }
    }
    if (!(span.t1 > span.t0)) {
        raise(Errc::invalid_config, "t_span must satisfy t0 < t1");
    }
    if (grid_points == 1) {
        raise(Errc::invalid_config, "grid_points must be 0 (raw steps) or at least 2");
    }
    solver.validate(model.dimension);
    schedule.validate();
    const bool schedule_is_tk =
        std::holds_alternative<TkParams>(schedule.segments.front().params);
    if (schedule_is_tk != (model.kind == ModelKind::turchin_korotayev)) {
        raise(Errc::invalid_config, "schedule parameters do not match the model kind");
    }
    if (output_dir.empty()) {
        raise(Errc::invalid_config, "output_dir must not be empty");
    }
}

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {
        "tk-baseline",  "tk-table2",         "tk-table3",
        "tk-table4",    "tk-kmax-only",      "tk-r0-only",
        "tk-delta-only", "lv-baseline",      "lv-switched-text",
        "lv-switched-code",
    };
    return names;
}

bool is_preset(std::string_view name) {
    const auto& names = preset_names();
    return std::find(names.begin(), names.end(), name) != names.end();
}

RunConfig preset(std::string_view name) {
    RunConfig cfg = make_preset(name);
    cfg.validate();
    return cfg;
}

std::string to_json_text(const RunConfig& cfg) {
    return config_to_json(cfg).dump(2) + "\n";
}

RunConfig config_from_json_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        raise(Errc::invalid_config, std::string("config is not valid JSON: ") + e.what());
    }
    return config_from_json(doc);
}

RunConfig load_config(const std::filesystem::path& path) {
    return config_from_json_text(detail::read_file(path));
}

void save_config(const std::filesystem::path& path, const RunConfig& cfg) {
    detail::atomic_write_file(path, to_json_text(cfg));
}

} // namespace sweepdyn
