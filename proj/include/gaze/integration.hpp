// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gaze/backend.hpp"
#include "gaze/refinement.hpp"
#include "gaze/signal.hpp"
#include "gaze/synthesis.hpp"

namespace gaze {

// One atomic body-motion annotation: what the body did over [start_t, end_t).
struct MotionNarration {
    double start_t = 0.0;
    double end_t = 0.0;
    std::string text;
};

struct MotionNarrationSequence {
    std::vector<MotionNarration> items;

    void validate() const; // ordered by start_t, positive spans, nonempty texts
};

// JSONL, one object per line with start_t, end_t, text.
MotionNarrationSequence load_motions_jsonl(const std::filesystem::path& path);

// One per-segment unit of work: the gaze slice plus the motions that overlap.
struct SegmentInput {
    int id = 0;
    double start_t = 0.0;
    double end_t = 0.0;
    GazeTrace trace;
    MotionNarrationSequence motions;
};

struct SegmentationPolicy {
    enum class Kind { MotionIntervals, FixedWindow };
    Kind kind = Kind::MotionIntervals;
    double window_seconds = 5.0; // FixedWindow only

    void validate() const;
};

// Splits the trace into ordered, non-overlapping segments. MotionIntervals
// derives one segment per motion annotation (falling back to FixedWindow when
// there are none); FixedWindow tiles the trace in window_seconds chunks.
// Segment spans are half-open except the last, which is closed so the final
// sample is kept. Segments with fewer than 2 gaze samples are dropped; if
// nothing remains the trace and motions do not overlap, which is an error.
std::vector<SegmentInput> align_segments(const GazeTrace& trace,
                                         const MotionNarrationSequence& motions,
                                         const SegmentationPolicy& policy);

// Sliding context carried from segment to segment: the last W integrated
// narrations (oldest first), the critique from the previous self-correcting
// round, and optional scene metadata.
struct HistoryContext {
    std::vector<std::string> prior_narrations;
    std::optional<std::string> last_feedback;
    std::vector<std::pair<std::string, std::string>> scene_metadata;

    bool empty() const {
        return prior_narrations.empty() && !last_feedback && scene_metadata.empty();
    }
};

struct IntegratedNarration {
    std::string text;
    int segment_id = 0;
    HistoryContext history; // snapshot the narration was generated under
    ScoreVector final_scores;
    int iterations = 0; // evaluation rounds consumed
};

// Appends the narration, evicts the oldest entries beyond w, and replaces the
// feedback (clearing it when none is given).
HistoryContext update_history(HistoryContext history, const IntegratedNarration& narration,
                              const std::optional<std::string>& feedback, int w);

// The structured integration prompt: CTX, GAZE, MOTION sections in that
// order, each introduced by its delimiter on its own line. A wholly empty
// context renders as the single line "CTX: (none)". History entries, scene
// values, and motion texts are flattened to single lines; the gaze narration
// is embedded verbatim.
std::string build_integrated_prompt(const HistoryContext& history,
                                    const GazeNarration& gaze,
                                    const MotionNarrationSequence& motions);

struct PromptSections {
    std::string ctx;
    std::string gaze;
    std::string motion;
};

// Checks the prompt grammar: exactly one CTX:, GAZE:, and MOTION: delimiter,
// in that order, at line starts. Returns the section bodies; the gaze body is
// the narration byte-for-byte. Throws InputError on any violation.
PromptSections verify_integrated_prompt(const std::string& prompt);

// Verifies the prompt and asks the backend for the fused narration. A prompt
// that fails verification is rejected before any backend call.
std::string integrate(const std::string& prompt, Provider& backend);

} // namespace gaze
