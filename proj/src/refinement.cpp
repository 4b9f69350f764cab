// SPDX-License-Identifier: Apache-2.0
#include "gaze/refinement.hpp"

#include <algorithm>
#include <numeric>

#include <json.hpp>

#include "gaze/errors.hpp"

namespace gaze {

namespace {

using nlohmann::json;

std::string strip(const std::string& text) {
    const auto begin = text.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return {};
    const auto end = text.find_last_not_of(" \t\r\n");
    return text.substr(begin, end - begin + 1);
}

// Balanced {...} substrings in order of their opening brace, honoring string
// literals and escapes, so score blocks can be fished out of prose replies.
std::vector<std::string> candidate_json_blocks(const std::string& raw) {
    std::vector<std::string> blocks;
    for (std::size_t start = 0; start < raw.size(); ++start) {
        if (raw[start] != '{') continue;
        int depth = 0;
        bool in_string = false, escaped = false;
        for (std::size_t i = start; i < raw.size(); ++i) {
            const char c = raw[i];
            if (in_string) {
                if (escaped) {
                    escaped = false;
                } else if (c == '\\') {
                    escaped = true;
                } else if (c == '"') {
                    in_string = false;
                }
                continue;
            }
            if (c == '"') {
                in_string = true;
            } else if (c == '{') {
                ++depth;
            } else if (c == '}') {
                if (--depth == 0) {
                    blocks.push_back(raw.substr(start, i - start + 1));
                    break;
                }
            }
        }
    }
    return blocks;
}

} // namespace

std::string_view to_string(Termination t) {
    switch (t) {
    case Termination::ThresholdMet: return "threshold_met";
    case Termination::BudgetExhausted: return "budget_exhausted";
    }
    throw InternalError("unknown Termination value");
}

void QualityRubric::validate() const {
    const std::vector<std::string> expected =
        kind == RubricKind::Gaze
            ? std::vector<std::string>{"Continuity"}
            : std::vector<std::string>{"Match", "Temporal", "Completeness"};
    if (dimensions.size() != expected.size()) {
        throw ConfigError("rubric has wrong dimension count");
    }
    for (std::size_t i = 0; i < expected.size(); ++i) {
        if (dimensions[i].name != expected[i]) {
            throw ConfigError("rubric dimension " + std::to_string(i) + " must be '" +
                              expected[i] + "'");
        }
        if (dimensions[i].anchor_high.empty() || dimensions[i].anchor_low.empty()) {
            throw ConfigError("rubric anchors must be nonempty");
        }
    }
}

QualityRubric gaze_rubric() {
    QualityRubric rubric;
    rubric.kind = RubricKind::Gaze;
    rubric.dimensions = {
        {"Continuity", "Perfect gaze transitions with natural flow.",
         "Contains abrupt, illogical, or disjointed event descriptions."},
    };
    return rubric;
}

QualityRubric integrated_rubric() {
    QualityRubric rubric;
    rubric.kind = RubricKind::Integrated;
    rubric.dimensions = {
        {"Match", "Mutually supportive integration of modalities.",
         "Modalities are disconnected, redundant, or contradictory."},
        {"Temporal", "Clear, logical, chronological progression.",
         "Lacks a discernible temporal structure or causal flow."},
        {"Completeness", "Fully includes all key elements and actions.",
         "Essential information or key behavioral events are omitted."},
    };
    return rubric;
}

bool ScoreVector::meets(const std::vector<double>& tau) const {
    if (tau.size() != values.size()) {
        throw InternalError("threshold/score dimension mismatch");
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (static_cast<double>(values[i]) < tau[i]) return false;
    }
    return true;
}

int ScoreVector::total() const {
    return std::accumulate(values.begin(), values.end(), 0);
}

void LoopConfig::validate() const {
    if (k_max < 1) throw ConfigError("k_max must be >= 1");
    if (tau.empty()) throw ConfigError("tau must have at least one component");
    for (double t : tau) {
        if (t < 0.0 || t > 5.0) throw ConfigError("tau components must be in [0, 5]");
    }
}

std::vector<double> LoopConfig::resolve_tau(const QualityRubric& rubric) const {
    validate();
    if (tau.size() == 1) {
        return std::vector<double>(rubric.dimensions.size(), tau[0]);
    }
    if (tau.size() != rubric.dimensions.size()) {
        throw ConfigError("tau has " + std::to_string(tau.size()) +
                          " components but the rubric has " +
                          std::to_string(rubric.dimensions.size()) + " dimensions");
    }
    return tau;
}

std::pair<ScoreVector, Critique> parse_eval_output(const std::string& raw,
                                                   const QualityRubric& rubric) {
    rubric.validate();
    const auto blocks = candidate_json_blocks(raw);
    if (blocks.empty()) {
        throw EvalFormatError("evaluator reply contains no JSON object");
    }

    for (const std::string& block : blocks) {
        json obj;
        try {
            obj = json::parse(block);
        } catch (const json::exception&) {
            continue;
        }
        if (!obj.is_object()) continue;

        bool has_all = true;
        for (const RubricDimension& dim : rubric.dimensions) {
            if (!obj.contains(dim.name)) {
                has_all = false;
                break;
            }
        }
        if (!has_all) continue;

        ScoreVector scores;
        for (const RubricDimension& dim : rubric.dimensions) {
            const json& value = obj[dim.name];
            if (!value.is_number_integer()) {
                throw EvalFormatError("evaluator score for '" + dim.name +
                                      "' is not an integer");
            }
            const int score = value.get<int>();
            if (score < 0 || score > 5) {
                throw EvalRangeError("evaluator score for '" + dim.name + "' is " +
                                     std::to_string(score) + ", outside [0, 5]");
            }
            scores.values.push_back(score);
        }

        Critique critique;
        if (obj.contains("critique")) {
            if (!obj["critique"].is_string()) {
                throw EvalFormatError("evaluator critique is not a string");
            }
            critique.text = obj["critique"].get<std::string>();
        }
        return {std::move(scores), std::move(critique)};
    }
    throw EvalFormatError(
        "no JSON object in the evaluator reply carries the rubric dimensions");
}

std::string build_eval_prompt(const std::string& narration, const QualityRubric& rubric,
                              const std::string& context, bool reminder) {
    rubric.validate();
    const std::string kind = rubric.kind == RubricKind::Gaze ? "gaze" : "integrated";
    std::string prompt = std::string(prompts::kEvaluateTaskPrefix) + kind + "\n";
    prompt += std::string(prompts::kRubricHeader) + "\n";
    for (const RubricDimension& dim : rubric.dimensions) {
        prompt += "- " + dim.name + " | 5: " + dim.anchor_high + " | 0: " +
                  dim.anchor_low + "\n";
    }
    prompt += std::string(prompts::kNarrationHeader) + "\n" + narration + "\n";
    prompt += std::string(prompts::kContextHeader) + "\n" + context + "\n";
    prompt += std::string(prompts::kReplyFormatHeader) + "\n";
    prompt += "Reply with exactly one JSON object: {";
    for (const RubricDimension& dim : rubric.dimensions) {
        prompt += "\"" + dim.name + "\": <integer 0-5>, ";
    }
    prompt += "\"critique\": \"<specific feedback; empty only when every score is 5>\"}";
    if (reminder) {
        prompt += "\nREMINDER: the previous reply was unparseable; reply with the "
                  "JSON object only.";
    }
    return prompt;
}

std::string build_refine_prompt(const std::string& narration, const Critique& critique,
                                const std::string& context) {
    std::string prompt = std::string(prompts::kRefineTask) + "\n";
    prompt += std::string(prompts::kNarrationHeader) + "\n" + narration + "\n";
    prompt += std::string(prompts::kCritiqueHeader) + "\n" + critique.text + "\n";
    prompt += std::string(prompts::kContextHeader) + "\n" + context + "\n";
    prompt += std::string(prompts::kReplyFormatHeader) + "\n";
    prompt += "Rewrite the narration so it addresses the critique while staying "
              "faithful to the context. Reply with the revised narration only.";
    return prompt;
}

std::pair<ScoreVector, Critique> evaluate(const std::string& narration,
                                          const QualityRubric& rubric,
                                          const std::string& context,
                                          Provider& backend) {
    rubric.validate();
    GenerationRequest request;
    request.prompt = build_eval_prompt(narration, rubric, context);
    const std::string reply = backend.generate(request);
    try {
        return parse_eval_output(reply, rubric);
    } catch (const EvalRangeError&) {
        throw;
    } catch (const EvalFormatError&) {
        // One re-ask, then give up.
        request.prompt = build_eval_prompt(narration, rubric, context, true);
        const std::string retry_reply = backend.generate(request);
        return parse_eval_output(retry_reply, rubric);
    }
}

std::string refine(const std::string& narration, const Critique& critique,
                   const std::string& context, Provider& backend) {
    if (critique.text.empty()) {
        throw InputError("refine requires a nonempty critique");
    }
    GenerationRequest request;
    request.prompt = build_refine_prompt(narration, critique, context);
    std::string revised = strip(backend.generate(request));
    if (revised.empty()) {
        throw BackendError("refine backend returned empty output");
    }
    return revised;
}

SelfCorrectResult self_correct(const std::string& initial, const QualityRubric& rubric,
                               const LoopConfig& config, const std::string& context,
                               Provider& backend) {
    rubric.validate();
    const std::vector<double> tau = config.resolve_tau(rubric);

    SelfCorrectResult result;
    result.text = initial;
    std::string current = initial;

    auto best_so_far = [&]() -> std::string {
        // Highest score total among evaluated iterations; earliest on ties.
        // Before any evaluation succeeded, the initial narration stands.
        const IterationRecord* best = nullptr;
        for (const IterationRecord& it : result.transcript.iterations) {
            if (best == nullptr || it.scores.total() > best->scores.total()) {
                best = &it;
            }
        }
        return best ? best->narration : initial;
    };

    for (int k = 0; k < config.k_max; ++k) {
        ScoreVector scores;
        Critique critique;
        try {
            ++result.transcript.eval_calls;
            std::tie(scores, critique) = evaluate(current, rubric, context, backend);
        } catch (const Error& e) {
            result.transcript.error = e.what();
            result.text = best_so_far();
            return result;
        }
        result.transcript.iterations.push_back({current, scores, critique});

        if (scores.meets(tau)) {
            result.transcript.termination = Termination::ThresholdMet;
            result.text = current;
            return result;
        }
        if (critique.text.empty()) {
            // Sub-threshold scores demand feedback; a silent evaluator breaks
            // the refine contract, which is an evaluation failure.
            result.transcript.error =
                "evaluator returned sub-threshold scores without a critique";
            result.text = best_so_far();
            return result;
        }

        try {
            ++result.transcript.refine_calls;
            current = refine(current, critique, context, backend);
        } catch (const Error& e) {
            result.transcript.error = e.what();
            result.text = best_so_far();
            return result;
        }
        result.text = current;
    }

    result.transcript.termination = Termination::BudgetExhausted;
    result.text = current;
    return result;
}

} // namespace gaze
