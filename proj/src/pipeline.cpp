// SPDX-License-Identifier: Apache-2.0
#include "gaze/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "gaze/errors.hpp"
#include "gaze/log.hpp"
#include "gaze/metrics.hpp"
#include "gaze/synthgen.hpp"

namespace gaze {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::filesystem::path resolve(const std::filesystem::path& base,
                              const std::filesystem::path& path) {
    return path.is_absolute() ? path : base / path;
}

ProviderConfig provider_from_json(const ordered_json& obj) {
    ProviderConfig config;
    const std::string kind = obj.value("kind", "template");
    if (kind == "template") {
        config.kind = ProviderKind::Template;
    } else if (kind == "remote") {
        config.kind = ProviderKind::Remote;
    } else {
        throw ConfigError("provider kind must be 'template' or 'remote', got '" +
                          kind + "'");
    }
    config.endpoint = obj.value("endpoint", "");
    config.embed_endpoint = obj.value("embed_endpoint", "");
    config.model = obj.value("model", "");
    config.credential_env = obj.value("credential_env", "");
    config.retry.max_attempts = obj.value("max_attempts", config.retry.max_attempts);
    config.retry.base_delay_ms = obj.value("base_delay_ms", config.retry.base_delay_ms);
    config.timeout_ms = obj.value("timeout_ms", config.timeout_ms);
    config.max_concurrent = obj.value("max_concurrent", config.max_concurrent);
    config.embed_dim = obj.value("embed_dim", config.embed_dim);
    config.validate();
    return config;
}

ordered_json scores_to_json(const ScoreVector& scores, const QualityRubric& rubric) {
    ordered_json obj = ordered_json::object();
    for (std::size_t i = 0; i < scores.values.size() && i < rubric.dimensions.size();
         ++i) {
        obj[rubric.dimensions[i].name] = scores.values[i];
    }
    return obj;
}

ordered_json transcript_to_json(const LoopTranscript& transcript,
                                const QualityRubric& rubric) {
    ordered_json obj;
    obj["iterations"] = ordered_json::array();
    for (const IterationRecord& it : transcript.iterations) {
        ordered_json entry;
        entry["narration"] = it.narration;
        entry["scores"] = scores_to_json(it.scores, rubric);
        entry["critique"] = it.critique.text;
        obj["iterations"].push_back(entry);
    }
    obj["eval_calls"] = transcript.eval_calls;
    obj["refine_calls"] = transcript.refine_calls;
    obj["termination"] = std::string(to_string(transcript.termination));
    if (!transcript.error.empty()) obj["error"] = transcript.error;
    return obj;
}

ordered_json motions_to_json(const MotionNarrationSequence& motions) {
    ordered_json arr = ordered_json::array();
    for (const MotionNarration& m : motions.items) {
        ordered_json obj;
        obj["start_t"] = m.start_t;
        obj["end_t"] = m.end_t;
        obj["text"] = m.text;
        arr.push_back(obj);
    }
    return arr;
}

ordered_json history_to_json(const HistoryContext& history) {
    ordered_json obj;
    obj["prior_narrations"] = history.prior_narrations;
    if (history.last_feedback) {
        obj["last_feedback"] = *history.last_feedback;
    } else {
        obj["last_feedback"] = nullptr;
    }
    ordered_json scene = ordered_json::object();
    for (const auto& [key, value] : history.scene_metadata) scene[key] = value;
    obj["scene"] = scene;
    return obj;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open file: " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    // A trailing newline is not an extra (empty) narration.
    if (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

PromptTemplate template_for(const PipelineConfig& config) {
    if (config.gaze_template_path) {
        return load_prompt_template(*config.gaze_template_path,
                                    config.gaze_exemplars_path);
    }
    return default_gaze_template();
}

} // namespace

void SignalOptions::validate() const {
    if (smoothing_window < 1 || smoothing_window % 2 == 0) {
        throw ConfigError("smoothing_window must be odd and >= 1");
    }
}

void PipelineConfig::validate() const {
    parser.validate();
    signal.validate();
    if (window_size < 0) throw ConfigError("window_size must be >= 0");
    loop.validate();
    generation.validate();
    embedding.validate();
    segmentation.validate();
    if (generation.kind == ProviderKind::Remote && gaze_template_path &&
        !gaze_exemplars_path) {
        throw ConfigError("remote generation with a custom template requires "
                          "few-shot exemplars");
    }
}

namespace {

// Field extraction is separated so one catch turns every JSON type mismatch
// into a ConfigError.
void apply_config_fields(const ordered_json& doc,
                         const std::filesystem::path& base_dir,
                         PipelineConfig& config) {
    if (doc.contains("parser")) {
        const auto& p = doc["parser"];
        config.parser.v_low = p.value("v_low", config.parser.v_low);
        config.parser.v_high = p.value("v_high", config.parser.v_high);
        config.parser.min_fixation_duration =
            p.value("min_fixation_duration", config.parser.min_fixation_duration);
        config.parser.min_event_samples =
            p.value("min_event_samples", config.parser.min_event_samples);
        config.parser.merge_gap = p.value("merge_gap", config.parser.merge_gap);
        if (p.contains("bins")) {
            const auto& b = p["bins"];
            LabelBins& bins = config.parser.bins;
            bins.duration_brief_max = b.value("duration_brief_max", bins.duration_brief_max);
            bins.duration_normal_max =
                b.value("duration_normal_max", bins.duration_normal_max);
            bins.amplitude_small_max =
                b.value("amplitude_small_max", bins.amplitude_small_max);
            bins.amplitude_medium_max =
                b.value("amplitude_medium_max", bins.amplitude_medium_max);
            bins.velocity_slow_max = b.value("velocity_slow_max", bins.velocity_slow_max);
        }
    }
    if (doc.contains("signal")) {
        const auto& s = doc["signal"];
        const std::string policy = s.value("row_policy", "reject");
        if (policy == "reject") {
            config.signal.row_policy = RowPolicy::Reject;
        } else if (policy == "drop_invalid") {
            config.signal.row_policy = RowPolicy::DropInvalid;
        } else {
            throw ConfigError("row_policy must be 'reject' or 'drop_invalid'");
        }
        config.signal.smoothing_window =
            s.value("smoothing_window", config.signal.smoothing_window);
    }
    config.window_size = doc.value("window_size", config.window_size);
    if (doc.contains("loop")) {
        const auto& l = doc["loop"];
        config.loop.k_max = l.value("k_max", config.loop.k_max);
        if (l.contains("tau")) {
            if (l["tau"].is_number()) {
                config.loop.tau = {l["tau"].get<double>()};
            } else if (l["tau"].is_array()) {
                config.loop.tau = l["tau"].get<std::vector<double>>();
            } else {
                throw ConfigError("loop.tau must be a number or an array");
            }
        }
    }
    if (doc.contains("generation_provider")) {
        config.generation = provider_from_json(doc["generation_provider"]);
    }
    if (doc.contains("embedding_provider")) {
        config.embedding = provider_from_json(doc["embedding_provider"]);
    }
    if (doc.contains("prompts")) {
        const auto& p = doc["prompts"];
        if (p.contains("gaze_template")) {
            config.gaze_template_path =
                resolve(base_dir, p["gaze_template"].get<std::string>());
        }
        if (p.contains("gaze_exemplars")) {
            config.gaze_exemplars_path =
                resolve(base_dir, p["gaze_exemplars"].get<std::string>());
        }
    }
    if (doc.contains("lexicon")) {
        config.lexicon_path = resolve(base_dir, doc["lexicon"].get<std::string>());
    }
    if (doc.contains("segmentation")) {
        const auto& s = doc["segmentation"];
        const std::string policy = s.value("policy", "motion_intervals");
        if (policy == "motion_intervals") {
            config.segmentation.kind = SegmentationPolicy::Kind::MotionIntervals;
        } else if (policy == "fixed_window") {
            config.segmentation.kind = SegmentationPolicy::Kind::FixedWindow;
        } else {
            throw ConfigError("segmentation.policy must be 'motion_intervals' or "
                              "'fixed_window'");
        }
        config.segmentation.window_seconds =
            s.value("window_seconds", config.segmentation.window_seconds);
    }
    if (doc.contains("scene")) {
        for (const auto& [key, value] : doc["scene"].items()) {
            config.scene.emplace_back(key, value.get<std::string>());
        }
    }
    config.include_timing = doc.value("include_timing", config.include_timing);
    if (doc.contains("output_dir")) {
        config.output_dir = resolve(base_dir, doc["output_dir"].get<std::string>());
    }
}

} // namespace

PipelineConfig config_from_json(const std::string& json_text,
                                const std::filesystem::path& base_dir) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config root must be a JSON object");

    PipelineConfig config;
    try {
        apply_config_fields(doc, base_dir, config);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field has the wrong type: ") + e.what());
    }
    config.validate();
    return config;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return config_from_json(buffer.str(), path.parent_path());
}

std::string record_to_json_line(const PipelineRecord& record, const QualityRubric& gaze,
                                const QualityRubric& integrated, bool include_timing) {
    ordered_json obj;
    obj["segment_id"] = record.segment_id;
    obj["start_t"] = record.start_t;
    obj["end_t"] = record.end_t;
    obj["event_count"] = record.event_count;
    obj["serialized_events"] = record.serialized_events;

    ordered_json gaze_obj;
    gaze_obj["initial"] = record.gaze_initial;
    gaze_obj["final"] = record.gaze_final;
    gaze_obj["transcript"] = transcript_to_json(record.gaze_transcript, gaze);
    obj["gaze"] = gaze_obj;

    obj["motions"] = motions_to_json(record.motions);
    obj["history"] = history_to_json(record.history);

    ordered_json integ;
    integ["prompt"] = record.integrated_prompt;
    integ["initial"] = record.integrated_initial;
    integ["final"] = record.integrated_final;
    integ["transcript"] = transcript_to_json(record.integrated_transcript, integrated);
    integ["final_scores"] = scores_to_json(record.final_scores, integrated);
    integ["iterations"] = record.iterations;
    obj["integrated"] = integ;

    if (include_timing) {
        obj["timing"] = ordered_json{{"elapsed_ms", record.elapsed_ms}};
    }
    if (!record.error.empty()) obj["error"] = record.error;
    return obj.dump();
}

std::vector<PipelineRecord> run_pipeline(const GazeTrace& trace,
                                         const MotionNarrationSequence& motions,
                                         const PipelineConfig& config,
                                         Provider& generation,
                                         std::ostream& records_out) {
    config.validate();
    validate_trace(trace);
    motions.validate();

    GazeTrace working = config.signal.smoothing_window > 1
                            ? smooth_trace(trace, config.signal.smoothing_window)
                            : trace;
    const std::vector<SegmentInput> segments =
        align_segments(working, motions, config.segmentation);

    const PromptTemplate tmpl = template_for(config);
    if (config.generation.kind == ProviderKind::Remote && tmpl.exemplars.empty()) {
        throw ConfigError(
            "remote generation requires few-shot exemplars in the gaze template");
    }
    const QualityRubric rubric_gaze = gaze_rubric();
    const QualityRubric rubric_integrated = integrated_rubric();

    HistoryContext history;
    history.scene_metadata = config.scene;

    std::vector<PipelineRecord> records;
    for (const SegmentInput& segment : segments) {
        const auto started = std::chrono::steady_clock::now();
        PipelineRecord record;
        record.segment_id = segment.id;
        record.start_t = segment.start_t;
        record.end_t = segment.end_t;

        bool flushed = false;
        auto flush_partial = [&](const std::string& why) {
            record.error = why;
            records_out << record_to_json_line(record, rubric_gaze, rubric_integrated,
                                               config.include_timing)
                        << '\n';
            records_out.flush();
            flushed = true;
            log("run aborted at segment " + std::to_string(segment.id) + ": " + why);
        };

        try {
            const EventSequence events = parse(segment.trace, config.parser);
            record.event_count = events.events.size();
            record.serialized_events = serialize_events(events);

            const GazeNarration initial_gaze =
                narrate_gaze(events, tmpl, generation, segment.trace.source_id);
            record.gaze_initial = initial_gaze.text;

            const SelfCorrectResult gaze_result =
                self_correct(initial_gaze.text, rubric_gaze, config.loop,
                             initial_gaze.serialized_events, generation);
            record.gaze_transcript = gaze_result.transcript;
            record.gaze_final = gaze_result.text;
            if (!gaze_result.transcript.error.empty()) {
                flush_partial(gaze_result.transcript.error);
                throw BackendError(gaze_result.transcript.error);
            }

            GazeNarration corrected_gaze = initial_gaze;
            corrected_gaze.text = gaze_result.text;

            record.history = history;
            const std::string prompt =
                build_integrated_prompt(history, corrected_gaze, segment.motions);
            record.integrated_prompt = prompt;
            record.motions = segment.motions;

            const std::string initial_integrated = integrate(prompt, generation);
            record.integrated_initial = initial_integrated;

            const SelfCorrectResult integrated_result = self_correct(
                initial_integrated, rubric_integrated, config.loop, prompt, generation);
            record.integrated_transcript = integrated_result.transcript;
            record.integrated_final = integrated_result.text;
            if (!integrated_result.transcript.error.empty()) {
                flush_partial(integrated_result.transcript.error);
                throw BackendError(integrated_result.transcript.error);
            }

            const LoopTranscript& transcript = integrated_result.transcript;
            record.final_scores = transcript.iterations.back().scores;
            record.iterations = transcript.eval_calls;

            IntegratedNarration narration;
            narration.text = integrated_result.text;
            narration.segment_id = segment.id;
            narration.history = history;
            narration.final_scores = record.final_scores;
            narration.iterations = record.iterations;

            const std::string& last_critique =
                transcript.iterations.back().critique.text;
            const std::optional<std::string> feedback =
                last_critique.empty() ? std::nullopt
                                      : std::optional<std::string>(last_critique);
            history = update_history(history, narration, feedback, config.window_size);

            record.elapsed_ms =
                std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - started)
                    .count();
            records_out << record_to_json_line(record, rubric_gaze, rubric_integrated,
                                               config.include_timing)
                        << '\n';
            records_out.flush();
            records.push_back(std::move(record));
        } catch (const Error& e) {
            if (!flushed) flush_partial(e.what());
            throw;
        }
    }
    return records;
}

std::filesystem::path cmd_parse(const std::filesystem::path& trace_path,
                                const PipelineConfig& config) {
    config.validate();
    GazeTrace trace = load_trace(trace_path, trace_format_from_extension(trace_path),
                                 config.signal.row_policy);
    if (config.signal.smoothing_window > 1) {
        trace = smooth_trace(trace, config.signal.smoothing_window);
    }
    const EventSequence events = parse(trace, config.parser);

    std::filesystem::create_directories(config.output_dir);
    const std::filesystem::path out_path = config.output_dir / "events.jsonl";
    std::ofstream out(out_path);
    if (!out) throw InputError("cannot write events file: " + out_path.string());
    write_events_jsonl(events, out);
    log("parsed " + std::to_string(trace.sample_count()) + " samples into " +
        std::to_string(events.events.size()) + " events -> " + out_path.string());
    return out_path;
}

namespace {

std::filesystem::path run_one_pair(const std::filesystem::path& trace_path,
                                   const std::filesystem::path& motions_path,
                                   const PipelineConfig& config, Provider& generation,
                                   const std::filesystem::path& out_path) {
    const GazeTrace trace =
        load_trace(trace_path, trace_format_from_extension(trace_path),
                   config.signal.row_policy);
    const MotionNarrationSequence motions = load_motions_jsonl(motions_path);

    std::ofstream out(out_path);
    if (!out) throw InputError("cannot write records file: " + out_path.string());
    const auto records = run_pipeline(trace, motions, config, generation, out);
    log("wrote " + std::to_string(records.size()) + " records -> " + out_path.string());
    return out_path;
}

} // namespace

std::filesystem::path cmd_run(const std::filesystem::path& trace_path,
                              const std::filesystem::path& motions_path,
                              const PipelineConfig& config) {
    config.validate();
    const std::shared_ptr<Provider> generation = make_provider(config.generation);
    std::filesystem::create_directories(config.output_dir);
    return run_one_pair(trace_path, motions_path, config, *generation,
                        config.output_dir / "records.jsonl");
}

std::vector<std::filesystem::path> cmd_run_batch(const std::vector<RunPair>& pairs,
                                                 const PipelineConfig& config,
                                                 int jobs) {
    config.validate();
    if (pairs.empty()) throw InputError("no (trace, motions) pairs to run");
    if (jobs < 1) throw InputError("--jobs must be >= 1");
    if (pairs.size() == 1) {
        return {cmd_run(pairs[0].trace, pairs[0].motions, config)};
    }

    std::filesystem::create_directories(config.output_dir);
    std::vector<std::filesystem::path> outputs(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        outputs[i] = config.output_dir /
                     (pairs[i].trace.stem().string() + ".records.jsonl");
        for (std::size_t j = 0; j < i; ++j) {
            if (outputs[j] == outputs[i]) {
                throw InputError("record files collide for traces '" +
                                 pairs[j].trace.string() + "' and '" +
                                 pairs[i].trace.string() + "'");
            }
        }
    }

    const std::shared_ptr<Provider> generation = make_provider(config.generation);
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(pairs.size());
    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < pairs.size();
             i = next.fetch_add(1)) {
            try {
                run_one_pair(pairs[i].trace, pairs[i].motions, config, *generation,
                             outputs[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };

    const std::size_t worker_count =
        std::min<std::size_t>(static_cast<std::size_t>(jobs), pairs.size());
    std::vector<std::thread> workers;
    workers.reserve(worker_count);
    for (std::size_t i = 0; i < worker_count; ++i) workers.emplace_back(worker);
    for (std::thread& thread : workers) thread.join();

    for (const std::exception_ptr& error : errors) {
        if (error) std::rethrow_exception(error); // first pair's failure wins
    }
    return outputs;
}

std::filesystem::path cmd_eval(const std::filesystem::path& candidates_path,
                               const std::filesystem::path& references_path,
                               const PipelineConfig& config) {
    config.validate();
    const std::vector<std::string> candidates = read_lines(candidates_path);
    const std::vector<std::string> references = read_lines(references_path);
    const std::set<std::string> lexicon = config.lexicon_path
                                              ? load_lexicon(*config.lexicon_path)
                                              : default_action_lexicon();
    const std::shared_ptr<Provider> embedder = make_provider(config.embedding);
    const MetricReport report =
        evaluate_corpus(candidates, references, lexicon, *embedder);

    std::filesystem::create_directories(config.output_dir);
    const std::filesystem::path out_path = config.output_dir / "report.json";
    std::ofstream out(out_path);
    if (!out) throw InputError("cannot write report file: " + out_path.string());
    out << metric_report_to_json(report) << '\n';
    log("scored " + std::to_string(report.pairs.size()) + " pairs -> " +
        out_path.string());
    return out_path;
}

std::filesystem::path cmd_synth(const std::filesystem::path& script_path,
                                const PipelineConfig& config) {
    config.validate();
    const EventScript script = load_script(script_path);
    const SyntheticTrace synthetic = generate_trace(script, config.parser);

    std::filesystem::create_directories(config.output_dir);
    const std::string stem = script_path.stem().string();
    const std::filesystem::path trace_path =
        config.output_dir / (stem + ".trace.csv");
    const std::filesystem::path truth_path =
        config.output_dir / (stem + ".truth.jsonl");

    save_trace(synthetic.trace, trace_path, TraceFormat::Csv);
    std::ofstream truth(truth_path);
    if (!truth) throw InputError("cannot write truth file: " + truth_path.string());
    write_events_jsonl(synthetic.ground_truth, truth);

    log("synthesized " + std::to_string(synthetic.trace.sample_count()) +
        " samples -> " + trace_path.string());
    return trace_path;
}

} // namespace gaze
