// SPDX-License-Identifier: Apache-2.0
#include "gaze/signal.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>
#include <system_error>

#include <json.hpp>

#include "gaze/errors.hpp"

namespace gaze {

namespace {

std::string_view strip_cr(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
}

bool parse_double(std::string_view text, double& out) {
    // Leading '+' and surrounding spaces are not part of the schema.
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

struct RawRow {
    double t, yaw, pitch;
    std::size_t line_no;
};

std::vector<RawRow> read_csv_rows(std::istream& in, const std::string& name) {
    std::vector<RawRow> rows;
    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line)) {
        throw InputError(name + ": empty file, expected header 't,yaw,pitch'");
    }
    ++line_no;
    if (strip_cr(line) != "t,yaw,pitch") {
        throw InputError(name + ": line 1: bad header, expected 't,yaw,pitch'");
    }

    while (std::getline(in, line)) {
        ++line_no;
        std::string_view row = strip_cr(line);
        if (row.empty()) continue;

        std::string_view fields[3];
        std::size_t field = 0;
        std::size_t begin = 0;
        for (std::size_t i = 0; i <= row.size(); ++i) {
            if (i == row.size() || row[i] == ',') {
                if (field >= 3) {
                    throw InputError(name + ": line " + std::to_string(line_no) +
                                     ": expected 3 fields");
                }
                fields[field++] = row.substr(begin, i - begin);
                begin = i + 1;
            }
        }
        if (field != 3) {
            throw InputError(name + ": line " + std::to_string(line_no) +
                             ": expected 3 fields, got " + std::to_string(field));
        }

        RawRow r{0, 0, 0, line_no};
        if (!parse_double(fields[0], r.t) || !parse_double(fields[1], r.yaw) ||
            !parse_double(fields[2], r.pitch)) {
            throw InputError(name + ": line " + std::to_string(line_no) +
                             ": unparseable numeric field");
        }
        rows.push_back(r);
    }
    return rows;
}

std::vector<RawRow> read_jsonl_rows(std::istream& in, const std::string& name) {
    std::vector<RawRow> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view row = strip_cr(line);
        if (row.empty()) continue;

        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(row);
        } catch (const nlohmann::json::exception& e) {
            throw InputError(name + ": line " + std::to_string(line_no) +
                             ": invalid JSON: " + e.what());
        }
        if (!obj.is_object() || !obj.contains("t") || !obj.contains("yaw") ||
            !obj.contains("pitch") || !obj["t"].is_number() ||
            !obj["yaw"].is_number() || !obj["pitch"].is_number()) {
            throw InputError(name + ": line " + std::to_string(line_no) +
                             ": expected numeric fields t, yaw, pitch");
        }
        rows.push_back({obj["t"].get<double>(), obj["yaw"].get<double>(),
                        obj["pitch"].get<double>(), line_no});
    }
    return rows;
}

GazeTrace rows_to_trace(const std::vector<RawRow>& rows, const std::string& name,
                        RowPolicy policy) {
    GazeTrace trace;
    trace.source_id = name;
    trace.samples.reserve(rows.size());

    for (const RawRow& r : rows) {
        if (!std::isfinite(r.t)) {
            // A broken clock is unrecoverable: ordering cannot be checked.
            throw InputError(name + ": line " + std::to_string(r.line_no) +
                             ": non-finite timestamp");
        }
        if (!std::isfinite(r.yaw) || !std::isfinite(r.pitch)) {
            if (policy == RowPolicy::DropInvalid) continue;
            throw InputError(name + ": line " + std::to_string(r.line_no) +
                             ": non-finite yaw/pitch (policy is reject)");
        }
        if (!trace.samples.empty() && r.t <= trace.samples.back().t) {
            throw InputError(name + ": line " + std::to_string(r.line_no) +
                             ": non-monotonic timestamp " + format_double(r.t) +
                             " after " + format_double(trace.samples.back().t));
        }
        trace.samples.push_back({r.t, r.yaw, r.pitch});
    }

    if (trace.samples.empty()) {
        throw InputError(name + ": empty trace after filtering");
    }
    return trace;
}

} // namespace

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) throw InternalError("format_double: to_chars failed");
    return std::string(buf, ptr);
}

TraceFormat trace_format_from_extension(const std::filesystem::path& path) {
    auto ext = path.extension().string();
    if (ext == ".csv") return TraceFormat::Csv;
    if (ext == ".jsonl") return TraceFormat::Jsonl;
    throw InputError("cannot infer trace format from extension '" + ext +
                     "' (use .csv or .jsonl): " + path.string());
}

GazeTrace load_trace(const std::filesystem::path& path, TraceFormat format,
                     RowPolicy policy) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open trace file: " + path.string());
    const std::string name = path.string();
    auto rows = format == TraceFormat::Csv ? read_csv_rows(in, name)
                                           : read_jsonl_rows(in, name);
    return rows_to_trace(rows, name, policy);
}

void write_trace(const GazeTrace& trace, std::ostream& out, TraceFormat format) {
    if (format == TraceFormat::Csv) {
        out << "t,yaw,pitch\n";
        for (const GazeSample& s : trace.samples) {
            out << format_double(s.t) << ',' << format_double(s.yaw) << ','
                << format_double(s.pitch) << '\n';
        }
    } else {
        for (const GazeSample& s : trace.samples) {
            nlohmann::ordered_json obj;
            obj["t"] = s.t;
            obj["yaw"] = s.yaw;
            obj["pitch"] = s.pitch;
            out << obj.dump() << '\n';
        }
    }
}

void save_trace(const GazeTrace& trace, const std::filesystem::path& path,
                TraceFormat format) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write trace file: " + path.string());
    write_trace(trace, out, format);
    if (!out) throw InputError("write failed: " + path.string());
}

void validate_trace(const GazeTrace& trace) {
    if (trace.samples.empty()) throw InputError("trace has no samples");
    for (std::size_t i = 0; i < trace.samples.size(); ++i) {
        const GazeSample& s = trace.samples[i];
        if (!std::isfinite(s.t) || !std::isfinite(s.yaw) || !std::isfinite(s.pitch)) {
            throw InputError("trace sample " + std::to_string(i) +
                             " has a non-finite field");
        }
        if (i > 0 && s.t <= trace.samples[i - 1].t) {
            throw InputError("trace timestamps not strictly increasing at sample " +
                             std::to_string(i));
        }
    }
}

VelocityProfile compute_velocity(const GazeTrace& trace) {
    const auto& s = trace.samples;
    if (s.size() < 2) {
        throw InputError("compute_velocity needs at least 2 samples, got " +
                         std::to_string(s.size()));
    }
    VelocityProfile profile;
    profile.omegas.reserve(s.size() - 1);
    for (std::size_t j = 1; j < s.size(); ++j) {
        const double dt = s[j].t - s[j - 1].t;
        if (dt <= 0.0) {
            throw InternalError("non-positive time delta at sample " +
                                std::to_string(j) + " (trace not validated?)");
        }
        const double dy = s[j].yaw - s[j - 1].yaw;
        const double dp = s[j].pitch - s[j - 1].pitch;
        profile.omegas.push_back(std::sqrt(dy * dy + dp * dp) / dt);
    }
    return profile;
}

GazeTrace smooth_trace(const GazeTrace& trace, int window) {
    if (window < 1 || window % 2 == 0) {
        throw ConfigError("smoothing window must be odd and >= 1, got " +
                          std::to_string(window));
    }
    if (window == 1) return trace;

    GazeTrace out;
    out.source_id = trace.source_id;
    out.samples.resize(trace.samples.size());
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(trace.samples.size());
    const std::ptrdiff_t half = window / 2;
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        // Shrink the half-width so the window stays centered inside the trace.
        const std::ptrdiff_t h = std::min({half, i, n - 1 - i});
        double yaw = 0.0, pitch = 0.0;
        for (std::ptrdiff_t k = i - h; k <= i + h; ++k) {
            yaw += trace.samples[k].yaw;
            pitch += trace.samples[k].pitch;
        }
        const double count = static_cast<double>(2 * h + 1);
        out.samples[i] = {trace.samples[i].t, yaw / count, pitch / count};
    }
    return out;
}

} // namespace gaze
