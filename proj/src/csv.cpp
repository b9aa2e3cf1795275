#include "sweepdyn/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>
#include <string_view>

#include "io_util.hpp"
#include "sweepdyn/errors.hpp"

namespace sweepdyn {

namespace {

void append_number(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

std::string header_for(const Trajectory& traj) {
    if (traj.model) {
        if (traj.model->kind == ModelKind::turchin_korotayev) {
            return "t,N,S,W";
        }
        return "t,R,C";
    }
    if (traj.dim == 3) {
        return "t,N,S,W";
    }
    if (traj.dim == 2) {
        return "t,R,C";
    }
    std::string header = "t";
    for (std::size_t c = 1; c <= traj.dim; ++c) {
        header += ",y" + std::to_string(c);
    }
    return header;
}

/// Escapes one CSV field: quoted when it contains a delimiter, quote, or
/// newline, with inner quotes doubled.
std::string csv_field(std::string_view value) {
    if (value.find_first_of(",\"\n") == std::string_view::npos) {
        return std::string(value);
    }
    std::string quoted = "\"";
    for (const char ch : value) {
        if (ch == '"') {
            quoted += "\"\"";
        } else {
            quoted += ch;
        }
    }
    quoted += '"';
    return quoted;
}

double parse_number(const std::string& field, std::size_t line_no) {
    const char* begin = field.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0') {
        raise(Errc::invalid_config, "csv line " + std::to_string(line_no) +
                                        ": \"" + field + "\" is not a number");
    }
    return v;
}

std::vector<std::string> split_fields(std::string_view line) {
    std::vector<std::string> fields;
    std::string current;
    for (const char ch : line) {
        if (ch == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current += ch;
        }
    }
    fields.push_back(std::move(current));
    return fields;
}

} // namespace

std::string trajectory_csv_text(const Trajectory& traj) {
    if (traj.dim == 0 || traj.values.size() != traj.size() * traj.dim) {
        raise(Errc::invalid_config, "trajectory shape is inconsistent");
    }
    std::string out = header_for(traj);
    out += '\n';
    out.reserve(out.size() + traj.size() * (traj.dim + 1) * 20);
    for (std::size_t i = 0; i < traj.size(); ++i) {
        append_number(out, traj.times[i]);
        for (std::size_t c = 0; c < traj.dim; ++c) {
            out += ',';
            append_number(out, traj.value(i, c));
        }
        out += '\n';
    }
    return out;
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
    detail::atomic_write_file(path, trajectory_csv_text(traj));
}

Trajectory trajectory_from_csv_text(const std::string& text) {
    Trajectory traj;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) {
            eol = text.size();
        }
        std::string_view line(text.data() + pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (line.empty()) {
            continue;
        }
        const auto fields = split_fields(line);
        if (line_no == 1) {
            if (fields.size() < 2 || fields[0] != "t") {
                raise(Errc::invalid_config, "csv header must start with \"t,\"");
            }
            traj.dim = fields.size() - 1;
            if (fields.size() == 4 && fields[1] == "N") {
                traj.model = ModelSpec::tk();
            } else if (fields.size() == 3 && fields[1] == "R") {
                traj.model = ModelSpec::lv();
            }
            continue;
        }
        if (fields.size() != traj.dim + 1) {
            raise(Errc::invalid_config,
                  "csv line " + std::to_string(line_no) + ": expected " +
                      std::to_string(traj.dim + 1) + " fields, got " +
                      std::to_string(fields.size()));
        }
        traj.times.push_back(parse_number(fields[0], line_no));
        for (std::size_t c = 1; c < fields.size(); ++c) {
            traj.values.push_back(parse_number(fields[c], line_no));
        }
    }
    if (traj.dim == 0) {
        raise(Errc::invalid_config, "csv has no header row");
    }
    return traj;
}

Trajectory read_trajectory_csv(const std::filesystem::path& path) {
    return trajectory_from_csv_text(detail::read_file(path));
}

std::string scan_csv_text(const std::vector<ScanResult>& results) {
    std::size_t max_events = 0;
    for (const auto& row : results) {
        max_events = std::max(max_events, row.events.size());
    }

    std::string out = "rank,index,subset,size,max_ratio,any_detected,failed,error";
    for (std::size_t k = 1; k <= max_events; ++k) {
        const std::string bp = "bp" + std::to_string(k);
        for (const char* suffix :
             {"_time", "_pre_max", "_post_max", "_ratio", "_window", "_detected"}) {
            out += ',' + bp + suffix;
        }
    }
    out += '\n';

    for (std::size_t rank = 0; rank < results.size(); ++rank) {
        const ScanResult& row = results[rank];
        out += std::to_string(rank + 1);
        out += ',' + std::to_string(row.index);
        std::string subset;
        for (const auto& name : row.subset) {
            if (!subset.empty()) {
                subset += '+';
            }
            subset += name;
        }
        out += ',' + csv_field(subset);
        out += ',' + std::to_string(row.subset.size());
        out += ',';
        append_number(out, row.max_ratio);
        out += row.any_detected ? ",true" : ",false";
        out += row.failed ? ",true" : ",false";
        out += ',' + csv_field(row.error);
        for (std::size_t k = 0; k < max_events; ++k) {
            if (k >= row.events.size()) {
                out += ",,,,,,";
                continue;
            }
            const SweepEvent& ev = row.events[k];
            for (const double v : {ev.breakpoint_time, ev.pre_envelope_max,
                                   ev.post_envelope_max, ev.ratio, ev.window}) {
                out += ',';
                append_number(out, v);
            }
            out += ev.detected ? ",true" : ",false";
        }
        out += '\n';
    }
    return out;
}

void write_scan_csv(const std::filesystem::path& path,
                    const std::vector<ScanResult>& results) {
    detail::atomic_write_file(path, scan_csv_text(results));
}

} // namespace sweepdyn
