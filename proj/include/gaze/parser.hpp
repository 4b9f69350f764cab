// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "gaze/signal.hpp"

namespace gaze {

enum class EventClass { Fixation, Saccade, SmoothPursuit };

std::string_view to_string(EventClass c);
EventClass event_class_from_string(std::string_view name);

// Edges of the qualitative label bins. All configurable; the defaults follow
// conventional eye-tracking ranges.
struct LabelBins {
    double duration_brief_max = 0.2;    // s: Brief < this
    double duration_normal_max = 0.5;   // s: Normal up to this, Long beyond
    double amplitude_small_max = 5.0;   // deg: Small < this
    double amplitude_medium_max = 15.0; // deg: Medium up to this, Large beyond
    double velocity_slow_max = 200.0;   // deg/s: Slow < this, Fast at/above
};

// Two-threshold I-VT parameters plus the post-segmentation cleanup knobs.
struct ParserConfig {
    double v_low = 30.0;   // deg/s
    double v_high = 100.0; // deg/s
    double min_fixation_duration = 0.05; // s, applies to Fixation events
    int min_event_samples = 2;           // classified samples per event
    double merge_gap = 0.0;              // s, same-class events this close coalesce
    LabelBins bins;

    void validate() const; // throws ConfigError
};

// One symbolic gaze event with its quantitative attributes and qualitative
// labels. The sample span [first_sample, last_sample] indexes the source
// trace; it is bookkeeping and is not serialized.
struct GazeEventPrimitive {
    EventClass event_class = EventClass::Fixation;
    double start_t = 0.0;
    double end_t = 0.0;
    double duration = 0.0;
    double amplitude = 0.0;     // deg, first-to-last angular distance
    double peak_velocity = 0.0; // deg/s
    double mean_velocity = 0.0; // deg/s
    double centroid_yaw = 0.0;  // deg
    double centroid_pitch = 0.0;
    std::map<std::string, std::string> labels;

    std::size_t first_sample = 0;
    std::size_t last_sample = 0;
};

struct EventSequence {
    std::vector<GazeEventPrimitive> events;
    std::string source_id;
    ParserConfig config; // thresholds this sequence was produced with
};

// Three-way threshold rule, one class per velocity index:
//   omega <  v_low  -> Fixation
//   omega >  v_high -> Saccade
//   otherwise       -> SmoothPursuit (both boundaries fall in the middle band)
std::vector<EventClass> classify_samples(const VelocityProfile& profile,
                                         const ParserConfig& config);

// Turns maximal same-class runs into events, merging runs below the minimum
// duration/sample thresholds into the longer adjacent neighbor (ties prefer
// the preceding one). classes.size() must equal trace.sample_count() - 1.
EventSequence segment_events(const std::vector<EventClass>& classes,
                             const GazeTrace& trace, const ParserConfig& config);

// Computes the attributes and labels for one event spanning the inclusive
// sample range [first_sample, last_sample] (at least two samples).
GazeEventPrimitive annotate_event(const GazeTrace& trace, std::size_t first_sample,
                                  std::size_t last_sample, EventClass event_class,
                                  const VelocityProfile& profile,
                                  const ParserConfig& config);

// compute_velocity -> classify_samples -> segment_events, annotated.
EventSequence parse(const GazeTrace& trace, const ParserConfig& config);

// JSONL, one event per line. Fields exactly: class, start_t, end_t, duration,
// amplitude, peak_velocity, mean_velocity, centroid_yaw, centroid_pitch,
// labels.
std::string event_to_json_line(const GazeEventPrimitive& event);
void write_events_jsonl(const EventSequence& events, std::ostream& out);
EventSequence read_events_jsonl(std::istream& in); // inverse, for tooling/tests

} // namespace gaze
