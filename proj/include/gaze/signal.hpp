// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace gaze {

// One timestamped gaze direction. Angles in degrees, time in seconds.
struct GazeSample {
    double t = 0.0;
    double yaw = 0.0;
    double pitch = 0.0;
};

// Raw gaze signal: samples strictly ordered by t, at least one sample.
struct GazeTrace {
    std::vector<GazeSample> samples;
    std::string source_id;

    std::size_t sample_count() const { return samples.size(); }
};

// Instantaneous angular speeds in deg/s. omegas[k] is the speed at sample
// index k+1 (computed from the step k -> k+1); sample 0 has no speed.
struct VelocityProfile {
    std::vector<double> omegas;
};

// What to do with rows whose yaw/pitch is non-finite.
enum class RowPolicy {
    Reject,     // any defective row fails the whole load
    DropInvalid // defective rows are removed, the rest is kept
};

enum class TraceFormat { Csv, Jsonl };

// Picks Csv for ".csv", Jsonl for ".jsonl"; anything else is an InputError.
TraceFormat trace_format_from_extension(const std::filesystem::path& path);

// Loads and validates a trace.
//   CSV:   header exactly "t,yaw,pitch", one sample per line.
//   JSONL: one object per line with numeric fields t, yaw, pitch.
// Throws InputError on unreadable files, malformed rows, non-monotonic
// timestamps, or an empty trace after filtering.
GazeTrace load_trace(const std::filesystem::path& path, TraceFormat format,
                     RowPolicy policy = RowPolicy::Reject);

// Writes the schema load_trace reads. Values round-trip bit-exactly.
void save_trace(const GazeTrace& trace, const std::filesystem::path& path,
                TraceFormat format);
void write_trace(const GazeTrace& trace, std::ostream& out, TraceFormat format);

// Enforces the GazeTrace invariants (finite fields, strict t ordering,
// N_g >= 1). Throws InputError naming the first offending sample.
void validate_trace(const GazeTrace& trace);

// omega_j = sqrt((y_j - y_{j-1})^2 + (p_j - p_{j-1})^2) / (t_j - t_{j-1})
// for j = 1..N_g-1. Requires N_g >= 2 and strictly increasing timestamps.
VelocityProfile compute_velocity(const GazeTrace& trace);

// Optional preprocessing: centered moving average over yaw and pitch with an
// odd window length. The window shrinks symmetrically near the edges.
// window == 1 is the identity; timestamps are never touched. Default
// pipelines keep this off.
GazeTrace smooth_trace(const GazeTrace& trace, int window);

// Lossless shortest-form decimal rendering of a double (round-trips exactly).
std::string format_double(double value);

} // namespace gaze
