// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gaze/backend.hpp"

namespace gaze {

enum class RubricKind { Gaze, Integrated };

struct RubricDimension {
    std::string name;
    std::string anchor_high; // what a 5 looks like
    std::string anchor_low;  // what a 0 looks like
};

// Gaze narrations are judged on Continuity; integrated narrations on Match,
// Temporal, and Completeness. Scores are integers 0..5 per dimension.
struct QualityRubric {
    RubricKind kind = RubricKind::Gaze;
    std::vector<RubricDimension> dimensions;

    void validate() const; // throws ConfigError
};

QualityRubric gaze_rubric();
QualityRubric integrated_rubric();

struct ScoreVector {
    std::vector<int> values; // aligned with the rubric's dimensions

    bool meets(const std::vector<double>& tau) const;
    int total() const;
};

struct Critique {
    std::string text;
};

struct LoopConfig {
    int k_max = 3;
    // Threshold vector; a single entry broadcasts across all dimensions.
    std::vector<double> tau = {4.5};

    void validate() const;
    std::vector<double> resolve_tau(const QualityRubric& rubric) const;
};

struct IterationRecord {
    std::string narration;
    ScoreVector scores;
    Critique critique;
};

enum class Termination { ThresholdMet, BudgetExhausted };

std::string_view to_string(Termination t);

struct LoopTranscript {
    std::vector<IterationRecord> iterations;
    int eval_calls = 0;
    int refine_calls = 0;
    Termination termination = Termination::BudgetExhausted;
    std::string error; // nonempty when the loop aborted on an evaluation failure
};

// Extracts the first well-formed JSON object whose keys cover the rubric's
// dimension names with integer values (an optional "critique" string rides
// along). Prose around the block is ignored; with several blocks the first
// match wins. Throws EvalFormatError when nothing matches, EvalRangeError
// when a matched score leaves [0, 5].
std::pair<ScoreVector, Critique> parse_eval_output(const std::string& raw,
                                                   const QualityRubric& rubric);

// Prompts the backend with the rubric anchors, the narration, and its source
// context, then parses the structured reply. One re-ask on a format failure;
// a second failure or any out-of-range score raises EvalFormatError /
// EvalRangeError.
std::pair<ScoreVector, Critique> evaluate(const std::string& narration,
                                          const QualityRubric& rubric,
                                          const std::string& context,
                                          Provider& backend);

// Asks the backend to revise the narration under the critique. The critique
// must be nonempty; an empty revision is a BackendError.
std::string refine(const std::string& narration, const Critique& critique,
                   const std::string& context, Provider& backend);

struct SelfCorrectResult {
    std::string text;
    LoopTranscript transcript;
};

// Evaluate-then-refine loop: up to k_max evaluations; returns immediately
// once every score meets its threshold, otherwise refines and continues and
// finally returns the last refinement. An evaluation failure aborts the loop
// and returns the best-scoring narration seen so far (highest score total,
// earliest on ties) with transcript.error set.
SelfCorrectResult self_correct(const std::string& initial, const QualityRubric& rubric,
                               const LoopConfig& config, const std::string& context,
                               Provider& backend);

// Prompt builders, exposed for the offline engine tests and auditing.
std::string build_eval_prompt(const std::string& narration, const QualityRubric& rubric,
                              const std::string& context, bool reminder = false);
std::string build_refine_prompt(const std::string& narration, const Critique& critique,
                                const std::string& context);

} // namespace gaze
