// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gaze/backend.hpp"
#include "gaze/integration.hpp"
#include "gaze/parser.hpp"
#include "gaze/refinement.hpp"
#include "gaze/signal.hpp"
#include "gaze/synthesis.hpp"

namespace gaze {

struct SignalOptions {
    RowPolicy row_policy = RowPolicy::Reject;
    int smoothing_window = 1; // 1 = off

    void validate() const;
};

// Everything one run needs. Defaults mirror the reference setup: v_low 30,
// v_high 100, W = 2, K_max = 3, tau = 4.5, template providers.
struct PipelineConfig {
    ParserConfig parser;
    SignalOptions signal;
    int window_size = 2; // W
    LoopConfig loop;
    ProviderConfig generation;
    ProviderConfig embedding;
    std::optional<std::filesystem::path> gaze_template_path;
    std::optional<std::filesystem::path> gaze_exemplars_path;
    std::optional<std::filesystem::path> lexicon_path;
    SegmentationPolicy segmentation;
    std::vector<std::pair<std::string, std::string>> scene; // passed into CTX
    bool include_timing = false; // timing fields break byte-reproducibility
    std::filesystem::path output_dir = ".";

    void validate() const;
};

// JSON document; relative asset paths resolve against the config file's
// directory. Missing fields keep their defaults.
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig config_from_json(const std::string& json_text,
                                const std::filesystem::path& base_dir);

// Full provenance of one segment, serialized as one JSONL line per segment.
// The stored history snapshot, gaze narration, and motions are sufficient to
// rebuild the integration prompt byte-exactly.
struct PipelineRecord {
    int segment_id = 0;
    double start_t = 0.0;
    double end_t = 0.0;
    std::size_t event_count = 0;
    std::string serialized_events;
    std::string gaze_initial;
    std::string gaze_final;
    LoopTranscript gaze_transcript;
    MotionNarrationSequence motions;
    HistoryContext history;
    std::string integrated_prompt;
    std::string integrated_initial;
    std::string integrated_final;
    LoopTranscript integrated_transcript;
    ScoreVector final_scores;
    int iterations = 0;
    double elapsed_ms = 0.0; // serialized only when include_timing
    std::string error;       // set on the partial record of an aborted run
};

std::string record_to_json_line(const PipelineRecord& record, const QualityRubric& gaze,
                                const QualityRubric& integrated, bool include_timing);

// Runs parse -> narrate -> self-correct -> integrate -> self-correct ->
// update-history per segment, appending one record line per segment (flushed
// as written, so aborted runs leave a usable partial log). A transcript error
// flag aborts the run after flushing the partial record.
std::vector<PipelineRecord> run_pipeline(const GazeTrace& trace,
                                         const MotionNarrationSequence& motions,
                                         const PipelineConfig& config,
                                         Provider& generation, std::ostream& records_out);

// CLI entry points. Each returns the path of the artifact it wrote.
std::filesystem::path cmd_parse(const std::filesystem::path& trace_path,
                                const PipelineConfig& config);
std::filesystem::path cmd_run(const std::filesystem::path& trace_path,
                              const std::filesystem::path& motions_path,
                              const PipelineConfig& config);

struct RunPair {
    std::filesystem::path trace;
    std::filesystem::path motions;
};

// Fans independent (trace, motions) pairs out across up to `jobs` workers.
// Each pair gets its own history and record file (<trace stem>.records.jsonl;
// a single pair keeps the plain records.jsonl name). Segments within a pair
// stay strictly sequential. Returns the record paths in pair order.
std::vector<std::filesystem::path> cmd_run_batch(const std::vector<RunPair>& pairs,
                                                 const PipelineConfig& config,
                                                 int jobs);
std::filesystem::path cmd_eval(const std::filesystem::path& candidates_path,
                               const std::filesystem::path& references_path,
                               const PipelineConfig& config);
// Writes <stem>.trace.csv and <stem>.truth.jsonl; returns the trace path.
std::filesystem::path cmd_synth(const std::filesystem::path& script_path,
                                const PipelineConfig& config);

// Exit codes: 0 success, 2 input/config errors, 3 backend errors, 4 internal.
int cli_main(int argc, const char* const* argv);

} // namespace gaze
