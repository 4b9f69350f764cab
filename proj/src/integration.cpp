// SPDX-License-Identifier: Apache-2.0
#include "gaze/integration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "gaze/errors.hpp"
#include "gaze/synthesis.hpp"

namespace gaze {

namespace {

std::string single_line(std::string text) {
    for (char& c : text) {
        if (c == '\n' || c == '\r') c = ' ';
    }
    return text;
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::size_t begin = 0;
    while (begin <= text.size()) {
        const std::size_t end = text.find('\n', begin);
        if (end == std::string::npos) {
            lines.push_back(text.substr(begin));
            break;
        }
        lines.push_back(text.substr(begin, end - begin));
        begin = end + 1;
    }
    return lines;
}

} // namespace

void MotionNarrationSequence::validate() const {
    for (std::size_t i = 0; i < items.size(); ++i) {
        const MotionNarration& m = items[i];
        if (!(m.end_t > m.start_t)) {
            throw InputError("motion narration " + std::to_string(i) +
                             " has a non-positive span");
        }
        if (m.text.empty()) {
            throw InputError("motion narration " + std::to_string(i) + " has empty text");
        }
        if (i > 0 && m.start_t < items[i - 1].start_t) {
            throw InputError("motion narrations not ordered by start_t at index " +
                             std::to_string(i));
        }
    }
}

MotionNarrationSequence load_motions_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open motions file: " + path.string());
    MotionNarrationSequence motions;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw InputError(path.string() + ": line " + std::to_string(line_no) +
                             ": invalid JSON: " + e.what());
        }
        if (!obj.is_object() || !obj.contains("start_t") || !obj.contains("end_t") ||
            !obj.contains("text") || !obj["start_t"].is_number() ||
            !obj["end_t"].is_number() || !obj["text"].is_string()) {
            throw InputError(path.string() + ": line " + std::to_string(line_no) +
                             ": expected numeric start_t/end_t and string text");
        }
        motions.items.push_back({obj["start_t"].get<double>(),
                                 obj["end_t"].get<double>(),
                                 obj["text"].get<std::string>()});
    }
    motions.validate();
    return motions;
}

void SegmentationPolicy::validate() const {
    if (kind == Kind::FixedWindow && !(window_seconds > 0.0)) {
        throw ConfigError("fixed_window requires a positive window length");
    }
}

namespace {

struct Span {
    double start, end;
    bool closed_end; // last segment keeps its end sample
};

GazeTrace slice_trace(const GazeTrace& trace, const Span& span, int segment_id) {
    GazeTrace slice;
    slice.source_id = trace.source_id + "#seg" + std::to_string(segment_id);
    for (const GazeSample& s : trace.samples) {
        const bool inside = s.t >= span.start &&
                            (span.closed_end ? s.t <= span.end : s.t < span.end);
        if (inside) slice.samples.push_back(s);
    }
    return slice;
}

MotionNarrationSequence overlapping_motions(const MotionNarrationSequence& motions,
                                            const Span& span) {
    MotionNarrationSequence out;
    for (const MotionNarration& m : motions.items) {
        if (m.start_t < span.end && m.end_t > span.start) out.items.push_back(m);
    }
    return out;
}

} // namespace

std::vector<SegmentInput> align_segments(const GazeTrace& trace,
                                         const MotionNarrationSequence& motions,
                                         const SegmentationPolicy& policy) {
    validate_trace(trace);
    motions.validate();
    policy.validate();

    const bool use_motion_intervals =
        policy.kind == SegmentationPolicy::Kind::MotionIntervals &&
        !motions.items.empty();

    std::vector<Span> spans;
    if (use_motion_intervals) {
        for (std::size_t i = 0; i < motions.items.size(); ++i) {
            const MotionNarration& m = motions.items[i];
            if (i > 0 && m.start_t < motions.items[i - 1].end_t) {
                throw InputError(
                    "motion intervals overlap; segmentation needs disjoint spans");
            }
            spans.push_back({m.start_t, m.end_t, i + 1 == motions.items.size()});
        }
    } else {
        const double t0 = trace.samples.front().t;
        const double t1 = trace.samples.back().t;
        const double w = policy.window_seconds;
        const std::size_t count =
            std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((t1 - t0) / w)));
        for (std::size_t i = 0; i < count; ++i) {
            spans.push_back({t0 + static_cast<double>(i) * w,
                             t0 + static_cast<double>(i + 1) * w, i + 1 == count});
        }
    }

    std::vector<SegmentInput> segments;
    for (const Span& span : spans) {
        SegmentInput segment;
        segment.id = static_cast<int>(segments.size());
        segment.start_t = span.start;
        segment.end_t = span.end;
        segment.trace = slice_trace(trace, span, segment.id);
        if (segment.trace.samples.size() < 2) continue; // nothing to parse here
        segment.motions = overlapping_motions(motions, span);
        segments.push_back(std::move(segment));
    }
    // Re-number after drops so ids stay dense and ordered.
    for (std::size_t i = 0; i < segments.size(); ++i) {
        segments[i].id = static_cast<int>(i);
    }

    if (segments.empty()) {
        throw InputError("trace does not overlap any segment span (empty overlap)");
    }
    return segments;
}

HistoryContext update_history(HistoryContext history, const IntegratedNarration& narration,
                              const std::optional<std::string>& feedback, int w) {
    if (w < 0) throw InputError("history window must be >= 0");
    history.prior_narrations.push_back(narration.text);
    while (history.prior_narrations.size() > static_cast<std::size_t>(w)) {
        history.prior_narrations.erase(history.prior_narrations.begin());
    }
    if (feedback && !feedback->empty()) {
        history.last_feedback = *feedback;
    } else {
        history.last_feedback.reset();
    }
    return history;
}

std::string build_integrated_prompt(const HistoryContext& history,
                                    const GazeNarration& gaze,
                                    const MotionNarrationSequence& motions) {
    if (gaze.text.empty()) {
        throw InputError("build_integrated_prompt: empty gaze narration");
    }

    std::string prompt;
    if (history.empty()) {
        prompt += std::string(prompts::kCtxDelimiter) + " (none)\n";
    } else {
        prompt += std::string(prompts::kCtxDelimiter) + "\n";
        for (std::size_t i = 0; i < history.prior_narrations.size(); ++i) {
            prompt += "history[" + std::to_string(i + 1) + "]: " +
                      single_line(history.prior_narrations[i]) + "\n";
        }
        if (history.last_feedback) {
            prompt += "feedback: " + single_line(*history.last_feedback) + "\n";
        }
        if (!history.scene_metadata.empty()) {
            prompt += "scene: ";
            for (std::size_t i = 0; i < history.scene_metadata.size(); ++i) {
                if (i > 0) prompt += ", ";
                prompt += single_line(history.scene_metadata[i].first) + "=" +
                          single_line(history.scene_metadata[i].second);
            }
            prompt += "\n";
        }
    }
    prompt += std::string(prompts::kGazeDelimiter) + "\n" + gaze.text + "\n";
    prompt += std::string(prompts::kMotionDelimiter) + "\n";
    for (const MotionNarration& m : motions.items) {
        prompt += "[" + format_fixed3(m.start_t) + "s-" + format_fixed3(m.end_t) +
                  "s] " + single_line(m.text) + "\n";
    }
    return prompt;
}

PromptSections verify_integrated_prompt(const std::string& prompt) {
    const std::vector<std::string> lines = split_lines(prompt);

    std::vector<std::size_t> ctx_at, gaze_at, motion_at;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].rfind(prompts::kCtxDelimiter, 0) == 0) ctx_at.push_back(i);
        if (lines[i].rfind(prompts::kGazeDelimiter, 0) == 0) gaze_at.push_back(i);
        if (lines[i].rfind(prompts::kMotionDelimiter, 0) == 0) motion_at.push_back(i);
    }
    if (ctx_at.size() != 1 || gaze_at.size() != 1 || motion_at.size() != 1) {
        throw InputError("malformed integration prompt: expected exactly one CTX:, "
                         "GAZE:, and MOTION: delimiter");
    }
    if (!(ctx_at[0] < gaze_at[0] && gaze_at[0] < motion_at[0])) {
        throw InputError("malformed integration prompt: delimiters out of order");
    }
    if (ctx_at[0] != 0) {
        throw InputError("malformed integration prompt: CTX: must open the prompt");
    }

    auto join_range = [&](std::size_t first, std::size_t last) {
        std::string out;
        for (std::size_t i = first; i < last; ++i) {
            if (i > first) out += '\n';
            out += lines[i];
        }
        return out;
    };

    PromptSections sections;
    const std::string& ctx_line = lines[ctx_at[0]];
    sections.ctx = ctx_line.size() > prompts::kCtxDelimiter.size()
                       ? ctx_line.substr(prompts::kCtxDelimiter.size() + 1)
                       : join_range(ctx_at[0] + 1, gaze_at[0]);
    sections.gaze = join_range(gaze_at[0] + 1, motion_at[0]);
    // Drop the trailing blank produced by the prompt's final newline.
    std::size_t motion_end = lines.size();
    if (motion_end > motion_at[0] + 1 && lines.back().empty()) --motion_end;
    sections.motion = join_range(motion_at[0] + 1, motion_end);

    if (sections.gaze.empty()) {
        throw InputError("malformed integration prompt: empty GAZE section");
    }
    return sections;
}

std::string integrate(const std::string& prompt, Provider& backend) {
    verify_integrated_prompt(prompt); // reject before any backend dispatch

    GenerationRequest request;
    request.prompt = prompt;
    std::string text = backend.generate(request);
    const auto begin = text.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) {
        throw BackendError("integration backend returned empty output");
    }
    const auto end = text.find_last_not_of(" \t\r\n");
    return text.substr(begin, end - begin + 1);
}

} // namespace gaze
