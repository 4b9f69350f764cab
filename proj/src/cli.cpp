// SPDX-License-Identifier: Apache-2.0
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "gaze/errors.hpp"
#include "gaze/log.hpp"
#include "gaze/pipeline.hpp"

namespace gaze {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitBackend = 3;
constexpr int kExitInternal = 4;

void apply_provider_override(PipelineConfig& config, const std::string& name) {
    ProviderKind kind;
    if (name == "template") {
        kind = ProviderKind::Template;
    } else if (name == "remote") {
        kind = ProviderKind::Remote;
    } else {
        throw InputError("--provider must be 'template' or 'remote', got '" + name +
                         "'");
    }
    config.generation.kind = kind;
    config.embedding.kind = kind;
}

} // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"Gaze narration pipeline: parse gaze signals into symbolic "
                 "events, narrate them, and fuse them with body-motion "
                 "annotations."};
    app.require_subcommand(1);

    std::string config_path, out_dir, provider_name;
    app.add_option("--config", config_path, "Pipeline config JSON");
    app.add_option("--out", out_dir, "Output directory (overrides config)");
    app.add_option("--provider", provider_name,
                   "Provider override: template or remote");

    std::string trace_path, candidates_path, references_path, script_path,
        lexicon_path;
    std::vector<std::string> run_inputs;
    int jobs = 1;

    CLI::App* parse_cmd =
        app.add_subcommand("parse", "Parse a gaze trace into events JSONL");
    parse_cmd->add_option("trace", trace_path, "Trace file (.csv or .jsonl)")
        ->required();

    CLI::App* run_cmd = app.add_subcommand(
        "run", "Run the full narration pipeline over trace/motions pairs");
    run_cmd
        ->add_option("inputs", run_inputs,
                     "One or more <trace> <motions> pairs")
        ->required()
        ->expected(-2);
    run_cmd->add_option("--jobs", jobs, "Workers for independent pairs");

    CLI::App* eval_cmd = app.add_subcommand(
        "eval", "Score candidate narrations against references");
    eval_cmd->add_option("candidates", candidates_path, "Candidate lines")->required();
    eval_cmd->add_option("references", references_path, "Reference lines")->required();
    eval_cmd->add_option("--lexicon", lexicon_path, "Action keyword list");

    CLI::App* synth_cmd = app.add_subcommand(
        "synth", "Generate a synthetic trace plus ground-truth events");
    synth_cmd->add_option("script", script_path, "Event script JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        PipelineConfig config =
            config_path.empty() ? PipelineConfig{} : load_config(config_path);
        if (!out_dir.empty()) config.output_dir = out_dir;
        if (!provider_name.empty()) apply_provider_override(config, provider_name);
        if (!lexicon_path.empty()) config.lexicon_path = lexicon_path;

        if (parse_cmd->parsed()) {
            cmd_parse(trace_path, config);
        } else if (run_cmd->parsed()) {
            if (run_inputs.size() % 2 != 0) {
                throw InputError("run expects <trace> <motions> pairs, got an odd "
                                 "number of paths");
            }
            std::vector<RunPair> pairs;
            for (std::size_t i = 0; i < run_inputs.size(); i += 2) {
                pairs.push_back({run_inputs[i], run_inputs[i + 1]});
            }
            cmd_run_batch(pairs, config, jobs);
        } else if (eval_cmd->parsed()) {
            cmd_eval(candidates_path, references_path, config);
        } else if (synth_cmd->parsed()) {
            cmd_synth(script_path, config);
        }
        return kExitOk;
    } catch (const InputError& e) {
        log(std::string("error: ") + e.what());
        return kExitInput;
    } catch (const BackendError& e) {
        log(std::string("backend error: ") + e.what());
        return kExitBackend;
    } catch (const std::exception& e) {
        log(std::string("internal error: ") + e.what());
        return kExitInternal;
    }
}

} // namespace gaze
