// SPDX-License-Identifier: Apache-2.0
#include "gaze/parser.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <istream>

#include <json.hpp>

#include "gaze/errors.hpp"

namespace gaze {

namespace {

// A maximal run of identically classified velocity indices. Velocity index j
// (1-based, j = vel index + 1 in sample terms) covers the step from sample
// j-1 to sample j, so a run over velocity indices [first, last] spans samples
// [first - 1, last].
struct Run {
    EventClass cls;
    std::size_t first_vel; // 1-based velocity index
    std::size_t last_vel;

    std::size_t vel_count() const { return last_vel - first_vel + 1; }
    std::size_t first_sample() const { return first_vel - 1; }
    std::size_t last_sample() const { return last_vel; }
};

double run_duration(const Run& run, const GazeTrace& trace) {
    return trace.samples[run.last_sample()].t - trace.samples[run.first_sample()].t;
}

bool is_sub_minimum(const Run& run, const GazeTrace& trace,
                    const ParserConfig& config) {
    if (run.vel_count() < static_cast<std::size_t>(config.min_event_samples))
        return true;
    if (run.cls == EventClass::Fixation &&
        run_duration(run, trace) < config.min_fixation_duration)
        return true;
    return false;
}

std::vector<Run> build_runs(const std::vector<EventClass>& classes) {
    std::vector<Run> runs;
    for (std::size_t i = 0; i < classes.size(); ++i) {
        const std::size_t vel_index = i + 1;
        if (!runs.empty() && runs.back().cls == classes[i]) {
            runs.back().last_vel = vel_index;
        } else {
            runs.push_back({classes[i], vel_index, vel_index});
        }
    }
    return runs;
}

void coalesce_same_class(std::vector<Run>& runs) {
    std::vector<Run> out;
    for (const Run& run : runs) {
        if (!out.empty() && out.back().cls == run.cls &&
            out.back().last_vel + 1 == run.first_vel) {
            out.back().last_vel = run.last_vel;
        } else {
            out.push_back(run);
        }
    }
    runs = std::move(out);
}

// Merges sub-minimum runs into the longer adjacent neighbor, leftmost first,
// until every surviving run meets the thresholds or only one run remains.
void merge_short_runs(std::vector<Run>& runs, const GazeTrace& trace,
                      const ParserConfig& config) {
    while (runs.size() > 1) {
        std::size_t victim = runs.size();
        for (std::size_t i = 0; i < runs.size(); ++i) {
            if (is_sub_minimum(runs[i], trace, config)) {
                victim = i;
                break;
            }
        }
        if (victim == runs.size()) break;

        std::size_t target;
        if (victim == 0) {
            target = 1;
        } else if (victim + 1 == runs.size()) {
            target = victim - 1;
        } else {
            const double prev_d = run_duration(runs[victim - 1], trace);
            const double next_d = run_duration(runs[victim + 1], trace);
            target = next_d > prev_d ? victim + 1 : victim - 1; // tie -> preceding
        }

        if (target < victim) {
            runs[target].last_vel = runs[victim].last_vel;
        } else {
            runs[target].first_vel = runs[victim].first_vel;
        }
        runs.erase(runs.begin() + static_cast<std::ptrdiff_t>(victim));
        coalesce_same_class(runs);
    }
}

// With contiguous runs the inter-event gap is zero, so this only coalesces
// same-class neighbors; the knob matters for configs that classify sparsely.
void apply_merge_gap(std::vector<Run>& runs, const GazeTrace& trace,
                     const ParserConfig& config) {
    std::vector<Run> out;
    for (const Run& run : runs) {
        if (!out.empty() && out.back().cls == run.cls) {
            const double gap = trace.samples[run.first_sample()].t -
                               trace.samples[out.back().last_sample()].t;
            if (gap <= config.merge_gap) {
                out.back().last_vel = run.last_vel;
                continue;
            }
        }
        out.push_back(run);
    }
    runs = std::move(out);
}

std::string duration_label(double duration, const LabelBins& bins) {
    if (duration < bins.duration_brief_max) return "Brief";
    if (duration <= bins.duration_normal_max) return "Normal";
    return "Long";
}

std::string amplitude_label(double amplitude, const LabelBins& bins) {
    if (amplitude < bins.amplitude_small_max) return "Small";
    if (amplitude <= bins.amplitude_medium_max) return "Medium";
    return "Large";
}

std::string velocity_label(double peak, const LabelBins& bins) {
    return peak < bins.velocity_slow_max ? "Slow" : "Fast";
}

} // namespace

std::string_view to_string(EventClass c) {
    switch (c) {
    case EventClass::Fixation: return "Fixation";
    case EventClass::Saccade: return "Saccade";
    case EventClass::SmoothPursuit: return "SmoothPursuit";
    }
    throw InternalError("unknown EventClass value");
}

EventClass event_class_from_string(std::string_view name) {
    if (name == "Fixation") return EventClass::Fixation;
    if (name == "Saccade") return EventClass::Saccade;
    if (name == "SmoothPursuit") return EventClass::SmoothPursuit;
    throw InputError("unknown event class: '" + std::string(name) + "'");
}

void ParserConfig::validate() const {
    if (!(v_low > 0.0) || !(v_high > v_low)) {
        throw ConfigError("parser thresholds must satisfy 0 < v_low < v_high");
    }
    if (min_fixation_duration < 0.0)
        throw ConfigError("min_fixation_duration must be >= 0");
    if (min_event_samples < 1)
        throw ConfigError("min_event_samples must be >= 1");
    if (merge_gap < 0.0) throw ConfigError("merge_gap must be >= 0");
    if (!(bins.duration_brief_max <= bins.duration_normal_max) ||
        !(bins.amplitude_small_max <= bins.amplitude_medium_max)) {
        throw ConfigError("label bin edges must be ordered");
    }
}

std::vector<EventClass> classify_samples(const VelocityProfile& profile,
                                         const ParserConfig& config) {
    config.validate();
    if (profile.omegas.empty()) {
        throw InputError("classify_samples: empty velocity profile");
    }
    std::vector<EventClass> classes;
    classes.reserve(profile.omegas.size());
    for (double omega : profile.omegas) {
        if (omega < config.v_low) {
            classes.push_back(EventClass::Fixation);
        } else if (omega > config.v_high) {
            classes.push_back(EventClass::Saccade);
        } else {
            classes.push_back(EventClass::SmoothPursuit);
        }
    }
    return classes;
}

GazeEventPrimitive annotate_event(const GazeTrace& trace, std::size_t first_sample,
                                  std::size_t last_sample, EventClass event_class,
                                  const VelocityProfile& profile,
                                  const ParserConfig& config) {
    if (first_sample >= last_sample) {
        throw InputError("annotate_event: empty sample span");
    }
    if (last_sample >= trace.samples.size() || last_sample > profile.omegas.size()) {
        throw InputError("annotate_event: span outside trace");
    }

    GazeEventPrimitive e;
    e.event_class = event_class;
    e.first_sample = first_sample;
    e.last_sample = last_sample;

    const GazeSample& first = trace.samples[first_sample];
    const GazeSample& last = trace.samples[last_sample];
    e.start_t = first.t;
    e.end_t = last.t;
    e.duration = e.end_t - e.start_t;

    const double dy = last.yaw - first.yaw;
    const double dp = last.pitch - first.pitch;
    e.amplitude = std::sqrt(dy * dy + dp * dp);

    double peak = 0.0, sum = 0.0;
    for (std::size_t j = first_sample + 1; j <= last_sample; ++j) {
        const double omega = profile.omegas[j - 1];
        peak = std::max(peak, omega);
        sum += omega;
    }
    e.peak_velocity = peak;
    e.mean_velocity = sum / static_cast<double>(last_sample - first_sample);

    double yaw_sum = 0.0, pitch_sum = 0.0;
    for (std::size_t j = first_sample; j <= last_sample; ++j) {
        yaw_sum += trace.samples[j].yaw;
        pitch_sum += trace.samples[j].pitch;
    }
    const double n = static_cast<double>(last_sample - first_sample + 1);
    e.centroid_yaw = yaw_sum / n;
    e.centroid_pitch = pitch_sum / n;

    e.labels["duration_label"] = duration_label(e.duration, config.bins);
    if (event_class == EventClass::Saccade) {
        e.labels["amplitude_label"] = amplitude_label(e.amplitude, config.bins);
        e.labels["velocity_label"] = velocity_label(e.peak_velocity, config.bins);
    }
    return e;
}

EventSequence segment_events(const std::vector<EventClass>& classes,
                             const GazeTrace& trace, const ParserConfig& config) {
    config.validate();
    if (classes.size() + 1 != trace.samples.size()) {
        throw InputError("segment_events: " + std::to_string(classes.size()) +
                         " classes do not match trace of " +
                         std::to_string(trace.samples.size()) + " samples");
    }

    std::vector<Run> runs = build_runs(classes);
    merge_short_runs(runs, trace, config);
    apply_merge_gap(runs, trace, config);

    const VelocityProfile profile = compute_velocity(trace);

    EventSequence seq;
    seq.source_id = trace.source_id;
    seq.config = config;
    seq.events.reserve(runs.size());
    for (const Run& run : runs) {
        seq.events.push_back(annotate_event(trace, run.first_sample(),
                                            run.last_sample(), run.cls, profile,
                                            config));
    }
    return seq;
}

EventSequence parse(const GazeTrace& trace, const ParserConfig& config) {
    validate_trace(trace);
    if (trace.samples.size() < 2) {
        throw InputError("parse needs at least 2 samples");
    }
    const VelocityProfile profile = compute_velocity(trace);
    const std::vector<EventClass> classes = classify_samples(profile, config);
    return segment_events(classes, trace, config);
}

std::string event_to_json_line(const GazeEventPrimitive& event) {
    nlohmann::ordered_json obj;
    obj["class"] = std::string(to_string(event.event_class));
    obj["start_t"] = event.start_t;
    obj["end_t"] = event.end_t;
    obj["duration"] = event.duration;
    obj["amplitude"] = event.amplitude;
    obj["peak_velocity"] = event.peak_velocity;
    obj["mean_velocity"] = event.mean_velocity;
    obj["centroid_yaw"] = event.centroid_yaw;
    obj["centroid_pitch"] = event.centroid_pitch;
    obj["labels"] = event.labels;
    return obj.dump();
}

void write_events_jsonl(const EventSequence& events, std::ostream& out) {
    for (const GazeEventPrimitive& e : events.events) {
        out << event_to_json_line(e) << '\n';
    }
}

EventSequence read_events_jsonl(std::istream& in) {
    EventSequence seq;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw InputError("events line " + std::to_string(line_no) +
                             ": invalid JSON: " + e.what());
        }
        GazeEventPrimitive e;
        try {
            e.event_class = event_class_from_string(obj.at("class").get<std::string>());
            e.start_t = obj.at("start_t").get<double>();
            e.end_t = obj.at("end_t").get<double>();
            e.duration = obj.at("duration").get<double>();
            e.amplitude = obj.at("amplitude").get<double>();
            e.peak_velocity = obj.at("peak_velocity").get<double>();
            e.mean_velocity = obj.at("mean_velocity").get<double>();
            e.centroid_yaw = obj.at("centroid_yaw").get<double>();
            e.centroid_pitch = obj.at("centroid_pitch").get<double>();
            for (auto& [key, value] : obj.at("labels").items()) {
                e.labels[key] = value.get<std::string>();
            }
        } catch (const nlohmann::json::exception& ex) {
            throw InputError("events line " + std::to_string(line_no) +
                             ": bad field: " + ex.what());
        }
        seq.events.push_back(std::move(e));
    }
    return seq;
}

} // namespace gaze
