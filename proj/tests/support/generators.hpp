// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "gaze/parser.hpp"
#include "gaze/signal.hpp"
#include "gaze/synthgen.hpp"

namespace gaze::test {

// Random-walk trace with irregular sampling; always valid.
inline GazeTrace random_trace(std::mt19937_64& rng, std::size_t max_samples = 1000) {
    std::uniform_int_distribution<std::size_t> size_dist(2, max_samples);
    std::uniform_real_distribution<double> dt_dist(1e-3, 0.05);
    std::uniform_real_distribution<double> step_dist(-3.0, 3.0);

    GazeTrace trace;
    trace.source_id = "random";
    const std::size_t n = size_dist(rng);
    double t = 0.0, yaw = 0.0, pitch = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        trace.samples.push_back({t, yaw, pitch});
        t += dt_dist(rng);
        yaw += step_dist(rng);
        pitch += step_dist(rng);
    }
    return trace;
}

// Random zero-noise script honoring the config's class bands, with durations
// quantized to the sampling grid so planted boundaries land on samples.
inline EventScript random_script(std::mt19937_64& rng, const ParserConfig& config) {
    const double rates[] = {50.0, 100.0, 200.0};
    EventScript script;
    script.rate_hz = rates[rng() % 3];
    script.noise_deg = 0.0;
    script.seed = rng();

    std::uniform_int_distribution<int> count_dist(2, 6);
    std::uniform_real_distribution<double> fix_dur(0.1, 0.6);
    std::uniform_real_distribution<double> sac_dur(0.03, 0.08);
    std::uniform_real_distribution<double> pursuit_speed(config.v_low + 10.0,
                                                         config.v_high - 10.0);
    std::uniform_real_distribution<double> saccade_speed(config.v_high + 50.0,
                                                         config.v_high + 300.0);

    const double dt = 1.0 / script.rate_hz;
    auto quantize = [&](double duration, double minimum) {
        const double steps = std::max(
            minimum, std::round(duration / dt));
        return steps * dt;
    };
    const double min_steps = static_cast<double>(config.min_event_samples);

    const int count = count_dist(rng);
    EventClass previous = EventClass::Saccade; // anything; first pick is free
    for (int i = 0; i < count; ++i) {
        ScriptSegment segment;
        do {
            const int pick = static_cast<int>(rng() % 3);
            segment.event_class = pick == 0   ? EventClass::Fixation
                                  : pick == 1 ? EventClass::Saccade
                                              : EventClass::SmoothPursuit;
        } while (i > 0 && segment.event_class == previous);
        previous = segment.event_class;

        switch (segment.event_class) {
        case EventClass::Fixation:
            segment.duration = quantize(fix_dur(rng),
                                        std::max(min_steps,
                                                 std::ceil(config.min_fixation_duration / dt)));
            segment.speed = 0.0;
            break;
        case EventClass::SmoothPursuit:
            segment.duration = quantize(fix_dur(rng), min_steps);
            segment.speed = pursuit_speed(rng);
            break;
        case EventClass::Saccade:
            segment.duration = quantize(sac_dur(rng), min_steps);
            segment.speed = saccade_speed(rng);
            break;
        }
        script.segments.push_back(segment);
    }
    return script;
}

// Short texts safe to embed in prompts (no delimiter-like lines).
inline std::string random_sentence(std::mt19937_64& rng) {
    static const char* words[] = {"the",   "user",  "looks", "around", "slowly",
                                  "then",  "turns", "holds", "steady", "gaze",
                                  "briefly","scans", "left",  "right",  "ahead"};
    std::uniform_int_distribution<int> length(3, 12);
    std::string out;
    const int n = length(rng);
    for (int i = 0; i < n; ++i) {
        if (i > 0) out += ' ';
        out += words[rng() % (sizeof(words) / sizeof(words[0]))];
    }
    out += '.';
    return out;
}

} // namespace gaze::test
