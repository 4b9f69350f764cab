// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gaze/backend.hpp"
#include "gaze/parser.hpp"

namespace gaze {

// Few-shot prompt skeleton for gaze narration. The instruction text carries
// exactly one {{EVENTS}} slot; rendering replaces it with the exemplar blocks
// followed by the serialized events of the segment at hand.
struct PromptTemplate {
    static constexpr std::string_view kEventSlot = "{{EVENTS}}";

    std::string instruction;
    std::vector<std::pair<std::string, std::string>> exemplars; // input -> output

    void validate() const; // throws ConfigError
    std::string render(const std::string& serialized_events) const;
};

// Instruction file is plain text with the {{EVENTS}} slot. The exemplars file
// alternates "=== input" / "=== output" blocks; it may be absent.
PromptTemplate load_prompt_template(const std::filesystem::path& instruction_file,
                                    const std::optional<std::filesystem::path>& exemplars_file);
PromptTemplate default_gaze_template();

struct GazeNarration {
    std::string text;
    std::string segment_id;
    std::string serialized_events; // exact string handed to the backend
};

// One line per event in temporal order:
//   <Class> duration=<d>s (<DurationLabel>) amplitude=<a>deg[ (<AmplitudeLabel>)]
//   peak_velocity=<v>deg/s centroid=(<yaw>, <pitch>)
// All numbers fixed at 3 decimal places; deterministic.
std::string serialize_events(const EventSequence& events);
std::string serialize_event(const GazeEventPrimitive& event);

// Builds the few-shot prompt around serialize_events(events) and asks the
// backend for the narration. Leading/trailing whitespace of the reply is
// stripped; an empty reply is a BackendError.
GazeNarration narrate_gaze(const EventSequence& events, const PromptTemplate& tmpl,
                           Provider& backend, std::string segment_id = {});

// The exact prompt narrate_gaze sends, exposed for auditing and tests.
std::string build_gaze_prompt(const EventSequence& events, const PromptTemplate& tmpl);

std::string format_fixed3(double value); // printf "%.3f"

} // namespace gaze
