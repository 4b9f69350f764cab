// SPDX-License-Identifier: Apache-2.0
#include "gaze/synthesis.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "gaze/errors.hpp"

namespace gaze {

namespace {

std::string strip(const std::string& text) {
    const auto begin = text.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return {};
    const auto end = text.find_last_not_of(" \t\r\n");
    return text.substr(begin, end - begin + 1);
}

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
    std::size_t count = 0, at = 0;
    while ((at = haystack.find(needle, at)) != std::string_view::npos) {
        ++count;
        at += needle.size();
    }
    return count;
}

} // namespace

std::string format_fixed3(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", value);
    return buf;
}

void PromptTemplate::validate() const {
    if (count_occurrences(instruction, kEventSlot) != 1) {
        throw ConfigError("prompt template must contain exactly one " +
                          std::string(kEventSlot) + " slot");
    }
    for (const auto& [input, output] : exemplars) {
        if (input.empty() || output.empty()) {
            throw ConfigError("prompt exemplars must have nonempty input and output");
        }
    }
}

std::string PromptTemplate::render(const std::string& serialized_events) const {
    validate();
    std::string block;
    for (const auto& [input, output] : exemplars) {
        block += std::string(prompts::kInputHeader) + "\n" + input + "\n";
        block += std::string(prompts::kOutputHeader) + "\n" + output + "\n\n";
    }
    block += std::string(prompts::kInputHeader) + "\n" + serialized_events + "\n";
    block += std::string(prompts::kOutputHeader);

    std::string prompt = instruction;
    prompt.replace(prompt.find(kEventSlot), kEventSlot.size(), block);
    return prompt;
}

PromptTemplate load_prompt_template(
    const std::filesystem::path& instruction_file,
    const std::optional<std::filesystem::path>& exemplars_file) {
    PromptTemplate tmpl;

    std::ifstream in(instruction_file);
    if (!in) {
        throw InputError("cannot open prompt template: " + instruction_file.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    tmpl.instruction = buffer.str();

    if (exemplars_file) {
        std::ifstream ex(*exemplars_file);
        if (!ex) {
            throw InputError("cannot open exemplars file: " + exemplars_file->string());
        }
        std::string line, input, output;
        enum { None, Input, Output } state = None;
        auto flush_pair = [&] {
            if (state == Output) {
                tmpl.exemplars.emplace_back(strip(input), strip(output));
                input.clear();
                output.clear();
            }
        };
        while (std::getline(ex, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line == "=== input") {
                flush_pair();
                state = Input;
            } else if (line == "=== output") {
                if (state != Input) {
                    throw InputError(exemplars_file->string() +
                                     ": '=== output' without a preceding '=== input'");
                }
                state = Output;
            } else if (state == Input) {
                input += line + "\n";
            } else if (state == Output) {
                output += line + "\n";
            } else if (!strip(line).empty()) {
                throw InputError(exemplars_file->string() +
                                 ": content before the first '=== input'");
            }
        }
        flush_pair();
    }

    tmpl.validate();
    return tmpl;
}

PromptTemplate default_gaze_template() {
    PromptTemplate tmpl;
    tmpl.instruction =
        "You describe human eye-gaze behavior. The input is a list of gaze\n"
        "events, one per line, in temporal order. Write one short narration in\n"
        "plain English that describes the gaze behavior in order. Mention every\n"
        "event, keep the transitions natural, and do not invent anything that is\n"
        "not in the event list.\n"
        "\n"
        "{{EVENTS}}\n";
    tmpl.exemplars.emplace_back(
        "Fixation duration=0.450s (Normal) amplitude=0.120deg "
        "peak_velocity=12.000deg/s centroid=(1.500, -0.300)\n"
        "Saccade duration=0.040s (Brief) amplitude=8.500deg (Medium) "
        "peak_velocity=310.000deg/s centroid=(5.100, -0.200)\n"
        "Fixation duration=0.600s (Long) amplitude=0.080deg "
        "peak_velocity=9.500deg/s centroid=(9.700, -0.100)",
        "The user holds their gaze steady for a moment, then snaps it several "
        "degrees to the side and settles into a long fixation at the new spot.");
    tmpl.exemplars.emplace_back(
        "SmoothPursuit duration=0.800s (Long) amplitude=24.000deg (Large) "
        "peak_velocity=45.000deg/s centroid=(12.000, 2.000)",
        "The user smoothly tracks a target moving across their field of view.");
    return tmpl;
}

std::string serialize_event(const GazeEventPrimitive& event) {
    std::string line(to_string(event.event_class));
    line += " duration=" + format_fixed3(event.duration) + "s";
    if (auto it = event.labels.find("duration_label"); it != event.labels.end()) {
        line += " (" + it->second + ")";
    }
    line += " amplitude=" + format_fixed3(event.amplitude) + "deg";
    if (auto it = event.labels.find("amplitude_label"); it != event.labels.end()) {
        line += " (" + it->second + ")";
    }
    line += " peak_velocity=" + format_fixed3(event.peak_velocity) + "deg/s";
    line += " centroid=(" + format_fixed3(event.centroid_yaw) + ", " +
            format_fixed3(event.centroid_pitch) + ")";
    return line;
}

std::string serialize_events(const EventSequence& events) {
    if (events.events.empty()) {
        throw InputError("serialize_events: empty event sequence");
    }
    std::string out;
    for (std::size_t i = 0; i < events.events.size(); ++i) {
        if (i > 0) out += '\n';
        out += serialize_event(events.events[i]);
    }
    return out;
}

std::string build_gaze_prompt(const EventSequence& events, const PromptTemplate& tmpl) {
    return std::string(prompts::kGazeNarrationTask) + "\n" +
           tmpl.render(serialize_events(events));
}

GazeNarration narrate_gaze(const EventSequence& events, const PromptTemplate& tmpl,
                           Provider& backend, std::string segment_id) {
    GazeNarration narration;
    narration.segment_id = std::move(segment_id);
    narration.serialized_events = serialize_events(events);

    GenerationRequest request;
    request.prompt = std::string(prompts::kGazeNarrationTask) + "\n" +
                     tmpl.render(narration.serialized_events);
    narration.text = strip(backend.generate(request));
    if (narration.text.empty()) {
        throw BackendError("gaze narration backend returned empty output");
    }
    return narration;
}

} // namespace gaze
