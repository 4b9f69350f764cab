// SPDX-License-Identifier: Apache-2.0
#include "gaze/synthgen.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

#include "gaze/errors.hpp"

namespace gaze {

namespace {

std::size_t segment_sample_count(const ScriptSegment& segment, double rate_hz) {
    return static_cast<std::size_t>(std::llround(segment.duration * rate_hz));
}

} // namespace

EventScript load_script(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open script file: " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(path.string() + ": invalid JSON: " + e.what());
    }

    EventScript script;
    try {
        script.rate_hz = doc.at("rate_hz").get<double>();
        script.noise_deg = doc.value("noise_deg", 0.0);
        script.seed = doc.value("seed", std::uint64_t{0});
        script.start_yaw = doc.value("start_yaw", 0.0);
        script.start_pitch = doc.value("start_pitch", 0.0);
        for (const auto& item : doc.at("segments")) {
            ScriptSegment segment;
            segment.event_class =
                event_class_from_string(item.at("class").get<std::string>());
            segment.duration = item.at("duration").get<double>();
            segment.speed = item.value("speed", 0.0);
            script.segments.push_back(segment);
        }
    } catch (const nlohmann::json::exception& e) {
        throw InputError(path.string() + ": bad script field: " + e.what());
    }
    return script;
}

void save_script(const EventScript& script, const std::filesystem::path& path) {
    nlohmann::ordered_json doc;
    doc["rate_hz"] = script.rate_hz;
    doc["noise_deg"] = script.noise_deg;
    doc["seed"] = script.seed;
    doc["start_yaw"] = script.start_yaw;
    doc["start_pitch"] = script.start_pitch;
    doc["segments"] = nlohmann::ordered_json::array();
    for (const ScriptSegment& segment : script.segments) {
        nlohmann::ordered_json item;
        item["class"] = std::string(to_string(segment.event_class));
        item["duration"] = segment.duration;
        item["speed"] = segment.speed;
        doc["segments"].push_back(item);
    }
    std::ofstream out(path);
    if (!out) throw InputError("cannot write script file: " + path.string());
    out << doc.dump(2) << '\n';
}

void validate_script(const EventScript& script, const ParserConfig& config) {
    config.validate();
    if (script.segments.empty()) {
        throw InputError("script has no segments");
    }
    if (!(script.rate_hz > 0.0)) {
        throw InputError("script rate_hz must be positive");
    }
    if (script.noise_deg < 0.0) {
        throw InputError("script noise_deg must be >= 0");
    }
    for (std::size_t i = 0; i < script.segments.size(); ++i) {
        const ScriptSegment& segment = script.segments[i];
        const std::string where = "script segment " + std::to_string(i);
        if (!(segment.duration > 0.0)) {
            throw InputError(where + ": duration must be positive");
        }
        if (segment.speed < 0.0) {
            throw InputError(where + ": speed must be >= 0");
        }
        switch (segment.event_class) {
        case EventClass::Fixation:
            if (segment.speed >= config.v_low) {
                throw InputError(where + ": fixation speed " +
                                 std::to_string(segment.speed) +
                                 " must stay below v_low");
            }
            if (segment.duration < config.min_fixation_duration) {
                throw InputError(where + ": fixation shorter than min_fixation_duration");
            }
            break;
        case EventClass::SmoothPursuit:
            if (!(segment.speed > config.v_low && segment.speed < config.v_high)) {
                throw InputError(where + ": pursuit speed " +
                                 std::to_string(segment.speed) +
                                 " must lie strictly inside (v_low, v_high)");
            }
            break;
        case EventClass::Saccade:
            if (!(segment.speed > config.v_high)) {
                throw InputError(where + ": saccade speed " +
                                 std::to_string(segment.speed) +
                                 " must exceed v_high");
            }
            break;
        }
        if (segment_sample_count(segment, script.rate_hz) <
            static_cast<std::size_t>(config.min_event_samples)) {
            throw InputError(where + ": too short to survive min_event_samples at " +
                             std::to_string(script.rate_hz) + " Hz");
        }
        if (i > 0 && segment.event_class == script.segments[i - 1].event_class) {
            throw InputError(where + ": adjacent segments share a class and cannot "
                                     "be told apart");
        }
    }
}

SyntheticTrace generate_trace(const EventScript& script, const ParserConfig& config) {
    validate_script(script, config);
    const double dt = 1.0 / script.rate_hz;

    // Cumulative sample index of each segment boundary.
    std::vector<std::size_t> boundaries{0};
    for (const ScriptSegment& segment : script.segments) {
        boundaries.push_back(boundaries.back() +
                             segment_sample_count(segment, script.rate_hz));
    }
    const std::size_t total = boundaries.back();

    SyntheticTrace out;
    out.trace.source_id = "synthetic(seed=" + std::to_string(script.seed) + ")";
    out.trace.samples.reserve(total + 1);

    std::mt19937_64 rng(script.seed);
    std::uniform_real_distribution<double> jitter(-script.noise_deg, script.noise_deg);
    auto push_sample = [&](std::size_t k, double yaw, double pitch) {
        double jy = 0.0, jp = 0.0;
        if (script.noise_deg > 0.0) {
            jy = jitter(rng);
            jp = jitter(rng);
        }
        out.trace.samples.push_back({static_cast<double>(k) * dt, yaw + jy, pitch + jp});
    };

    // Clean position is continuous across segments; each step k -> k+1 moves
    // at the speed of the segment owning that step.
    double yaw = script.start_yaw;
    const double pitch = script.start_pitch;
    std::size_t k = 0;
    push_sample(k, yaw, pitch);
    for (const ScriptSegment& segment : script.segments) {
        const std::size_t steps = segment_sample_count(segment, script.rate_hz);
        for (std::size_t step = 0; step < steps; ++step) {
            yaw += segment.speed * dt;
            push_sample(++k, yaw, pitch);
        }
    }

    const VelocityProfile profile = compute_velocity(out.trace);
    out.ground_truth.source_id = out.trace.source_id;
    out.ground_truth.config = config;
    for (std::size_t i = 0; i < script.segments.size(); ++i) {
        out.ground_truth.events.push_back(
            annotate_event(out.trace, boundaries[i], boundaries[i + 1],
                           script.segments[i].event_class, profile, config));
    }
    return out;
}

} // namespace gaze
