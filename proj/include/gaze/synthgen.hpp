// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "gaze/parser.hpp"
#include "gaze/signal.hpp"

namespace gaze {

// One planted segment. Motion runs at a constant speed along +yaw; fixations
// dwell wherever the previous segment ended (speed 0 unless a small drift is
// requested). Position is continuous across segments.
struct ScriptSegment {
    EventClass event_class = EventClass::Fixation;
    double duration = 0.0; // s
    double speed = 0.0;    // deg/s
};

struct EventScript {
    std::vector<ScriptSegment> segments;
    double rate_hz = 100.0;
    double noise_deg = 0.0; // uniform per-axis positional jitter amplitude
    std::uint64_t seed = 0;
    double start_yaw = 0.0;
    double start_pitch = 0.0;
};

// JSON document mirroring EventScript.
EventScript load_script(const std::filesystem::path& path);
void save_script(const EventScript& script, const std::filesystem::path& path);

// Checks the script against the parser config it is meant to exercise:
// positive durations and rate, speeds inside the class bands (fixation below
// v_low, pursuit strictly inside (v_low, v_high), saccade above v_high),
// enough samples per segment to survive the minimum-event thresholds, and no
// two adjacent segments of the same class (those cannot be told apart).
void validate_script(const EventScript& script, const ParserConfig& config);

struct SyntheticTrace {
    GazeTrace trace;
    EventSequence ground_truth; // planted classes and exact boundaries
};

// Piecewise motion at the scripted speeds, sampled at rate_hz with seeded
// jitter. Deterministic for a fixed seed. The per-sample velocity
// perturbation from jitter is bounded by 2*sqrt(2)*noise_deg*rate_hz.
SyntheticTrace generate_trace(const EventScript& script,
                              const ParserConfig& config = {});

} // namespace gaze
