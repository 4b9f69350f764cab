// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <random>

#include "gaze/errors.hpp"
#include "gaze/refinement.hpp"
#include "support/loop_harness.hpp"
#include "support/scripted_provider.hpp"

using namespace gaze;
using test::ScriptedEvaluator;
using test::score_reply;

TEST_SUITE("refinement") {

TEST_CASE("rubrics: fixed dimensions with nonempty anchors") {
    const QualityRubric gaze = gaze_rubric();
    REQUIRE(gaze.dimensions.size() == 1);
    CHECK(gaze.dimensions[0].name == "Continuity");
    CHECK_NOTHROW(gaze.validate());

    const QualityRubric integrated = integrated_rubric();
    REQUIRE(integrated.dimensions.size() == 3);
    CHECK(integrated.dimensions[0].name == "Match");
    CHECK(integrated.dimensions[1].name == "Temporal");
    CHECK(integrated.dimensions[2].name == "Completeness");
    CHECK_NOTHROW(integrated.validate());

    QualityRubric broken = integrated;
    broken.dimensions[1].name = "Timing";
    CHECK_THROWS_AS(broken.validate(), ConfigError);
}

TEST_CASE("parse: clean reply and prose-wrapped reply") {
    const QualityRubric rubric = integrated_rubric();
    const auto [scores, critique] = parse_eval_output(
        R"({"Match":5,"Temporal":5,"Completeness":5,"critique":""})", rubric);
    CHECK(scores.values == std::vector<int>{5, 5, 5});
    CHECK(critique.text.empty());

    const auto [scores2, critique2] = parse_eval_output(
        "Sure! Here is my assessment:\n"
        R"({"Match": 4, "Temporal": 3, "Completeness": 5, "critique": "tie the clauses together"})"
        "\nHope this helps.",
        rubric);
    CHECK(scores2.values == std::vector<int>{4, 3, 5});
    CHECK(critique2.text == "tie the clauses together");
}

TEST_CASE("parse: first matching block wins") {
    const QualityRubric rubric = gaze_rubric();
    const auto [scores, critique] = parse_eval_output(
        R"(first {"Continuity": 2, "critique": "a"} second {"Continuity": 5, "critique": "b"})",
        rubric);
    CHECK(scores.values == std::vector<int>{2});
    CHECK(critique.text == "a");
}

TEST_CASE("parse: failures") {
    const QualityRubric rubric = integrated_rubric();
    CHECK_THROWS_AS(parse_eval_output("", rubric), EvalFormatError);
    CHECK_THROWS_AS(parse_eval_output("no json here", rubric), EvalFormatError);
    CHECK_THROWS_AS( // missing Temporal
        parse_eval_output(R"({"Match":5,"Completeness":5,"critique":""})", rubric),
        EvalFormatError);
    CHECK_THROWS_AS( // non-integer score
        parse_eval_output(R"({"Match":4.5,"Temporal":5,"Completeness":5})", rubric),
        EvalFormatError);
    CHECK_THROWS_AS( // out of range
        parse_eval_output(R"({"Continuity":7,"critique":""})", gaze_rubric()),
        EvalRangeError);
    CHECK_THROWS_AS(
        parse_eval_output(R"({"Continuity":-1})", gaze_rubric()), EvalRangeError);
}

TEST_CASE("evaluate: scripted reply parses directly") {
    test::ScriptedProvider backend(
        {R"({"Match":5,"Temporal":5,"Completeness":5,"critique":""})"});
    const auto [scores, critique] =
        evaluate("a narration", integrated_rubric(), "ctx", backend);
    CHECK(scores.values == std::vector<int>{5, 5, 5});
    CHECK(backend.calls() == 1);
    // The eval prompt carries the rubric anchors and the narration.
    CHECK(backend.prompts[0].find("Mutually supportive") != std::string::npos);
    CHECK(backend.prompts[0].find("a narration") != std::string::npos);
}

TEST_CASE("evaluate: one re-ask on a format failure, then success") {
    test::ScriptedProvider backend(
        {"garbage", R"({"Continuity": 4, "critique": "smooth the jump"})"});
    const auto [scores, critique] = evaluate("text", gaze_rubric(), "ctx", backend);
    CHECK(scores.values == std::vector<int>{4});
    CHECK(critique.text == "smooth the jump");
    CHECK(backend.calls() == 2);
    CHECK(backend.prompts[1].find("REMINDER") != std::string::npos);
}

TEST_CASE("evaluate: two format failures abort") {
    test::ScriptedProvider backend({"garbage", "still garbage"});
    CHECK_THROWS_AS(evaluate("text", gaze_rubric(), "ctx", backend), EvalFormatError);
    CHECK(backend.calls() == 2);
}

TEST_CASE("evaluate: out-of-range scores are not retried") {
    test::ScriptedProvider backend({R"({"Continuity": 7})", "unused"});
    CHECK_THROWS_AS(evaluate("text", gaze_rubric(), "ctx", backend), EvalRangeError);
    CHECK(backend.calls() == 1);
}

TEST_CASE("refine: offline engine appends a revision marker deterministically") {
    TemplateProvider backend;
    const Critique critique{"make the transition explicit"};
    const std::string revised = refine("The user looks left.", critique, "ctx", backend);
    CHECK(revised == "The user looks left. [revised]");
    CHECK(refine("The user looks left.", critique, "ctx", backend) == revised);
    CHECK(revised != "The user looks left.");
}

TEST_CASE("refine: empty critique violates the precondition") {
    TemplateProvider backend;
    CHECK_THROWS_AS(refine("text", Critique{""}, "ctx", backend), InputError);
}

TEST_CASE("refine: empty backend output is an error") {
    test::LambdaProvider backend([](const GenerationRequest&) { return ""; });
    CHECK_THROWS_AS(refine("text", Critique{"c"}, "ctx", backend), BackendError);
}

TEST_CASE("self_correct: immediate pass returns the initial text") {
    const QualityRubric rubric = integrated_rubric();
    ScriptedEvaluator backend({score_reply(rubric, {5, 5, 5}, "")});
    const SelfCorrectResult result =
        self_correct("initial", rubric, LoopConfig{}, "ctx", backend);
    CHECK(result.text == "initial");
    CHECK(result.transcript.eval_calls == 1);
    CHECK(result.transcript.refine_calls == 0);
    CHECK(result.transcript.termination == Termination::ThresholdMet);
    CHECK(result.transcript.error.empty());
}

TEST_CASE("self_correct: always-failing scores exhaust the budget") {
    const QualityRubric rubric = integrated_rubric();
    ScriptedEvaluator backend({score_reply(rubric, {0, 0, 0}, "all wrong"),
                               score_reply(rubric, {0, 0, 0}, "all wrong"),
                               score_reply(rubric, {0, 0, 0}, "all wrong")});
    const SelfCorrectResult result =
        self_correct("initial", rubric, LoopConfig{}, "ctx", backend);
    CHECK(result.transcript.eval_calls == 3);
    CHECK(result.transcript.refine_calls == 3);
    CHECK(result.transcript.termination == Termination::BudgetExhausted);
    CHECK(result.text == "revision 3"); // last refinement, never evaluated
    REQUIRE(result.transcript.iterations.size() == 3);
    CHECK(result.transcript.iterations[0].narration == "initial");
    CHECK(result.transcript.iterations[1].narration == "revision 1");
    CHECK(result.transcript.iterations[2].narration == "revision 2");
}

TEST_CASE("self_correct: hand-traced pass on the second evaluation") {
    const QualityRubric rubric = integrated_rubric();
    ScriptedEvaluator backend({score_reply(rubric, {3, 3, 3}, "needs work"),
                               score_reply(rubric, {5, 5, 5}, "")});
    const SelfCorrectResult result =
        self_correct("initial", rubric, LoopConfig{}, "ctx", backend);
    CHECK(result.transcript.eval_calls == 2);
    CHECK(result.transcript.refine_calls == 1);
    CHECK(result.transcript.termination == Termination::ThresholdMet);
    CHECK(result.text == "revision 1"); // first refinement passed
}

TEST_CASE("self_correct: k_max 1 with an always-passing evaluator is the identity") {
    const QualityRubric rubric = gaze_rubric();
    ScriptedEvaluator backend({score_reply(rubric, {5}, "")});
    LoopConfig config;
    config.k_max = 1;
    const SelfCorrectResult result =
        self_correct("untouched", rubric, config, "ctx", backend);
    CHECK(result.text == "untouched");
    CHECK(result.transcript.refine_calls == 0);
}

TEST_CASE("self_correct: evaluation failure returns the best narration with an error") {
    const QualityRubric rubric = gaze_rubric();
    // First eval scores 3 (with critique), refine happens, second eval emits
    // garbage twice (the re-ask also fails) -> loop aborts.
    ScriptedEvaluator backend(
        {score_reply(rubric, {3}, "add flow"), "garbage", "garbage again"});
    const SelfCorrectResult result =
        self_correct("initial", rubric, LoopConfig{}, "ctx", backend);
    CHECK(!result.transcript.error.empty());
    CHECK(result.text == "initial"); // only scored narration so far
    CHECK(result.transcript.eval_calls == 2);
    CHECK(result.transcript.refine_calls == 1);
}

TEST_CASE("self_correct: best-scoring narration wins after a late failure") {
    const QualityRubric rubric = gaze_rubric();
    ScriptedEvaluator backend({score_reply(rubric, {2}, "weak"),
                               score_reply(rubric, {4}, "closer"),
                               "garbage", "garbage"});
    LoopConfig config; // k_max 3
    const SelfCorrectResult result =
        self_correct("initial", rubric, config, "ctx", backend);
    CHECK(!result.transcript.error.empty());
    CHECK(result.text == "revision 1"); // scored 4, beats the initial's 2
}

TEST_CASE("self_correct: sub-threshold scores without a critique are a failure") {
    const QualityRubric rubric = gaze_rubric();
    ScriptedEvaluator backend({score_reply(rubric, {2}, "")});
    const SelfCorrectResult result =
        self_correct("initial", rubric, LoopConfig{}, "ctx", backend);
    CHECK(!result.transcript.error.empty());
    CHECK(result.transcript.refine_calls == 0);
}

TEST_CASE("self_correct: failure on the very first evaluation returns the initial") {
    const QualityRubric rubric = gaze_rubric();
    ScriptedEvaluator backend({"garbage", "garbage"});
    const SelfCorrectResult result =
        self_correct("initial", rubric, LoopConfig{}, "ctx", backend);
    CHECK(!result.transcript.error.empty());
    CHECK(result.text == "initial");
    CHECK(result.transcript.iterations.empty());
}

TEST_CASE("loop config validation and tau broadcast") {
    LoopConfig config;
    CHECK(config.resolve_tau(integrated_rubric()) ==
          std::vector<double>{4.5, 4.5, 4.5});

    config.tau = {5.0, 4.0, 3.0};
    CHECK(config.resolve_tau(integrated_rubric()) ==
          std::vector<double>{5.0, 4.0, 3.0});
    CHECK_THROWS_AS(config.resolve_tau(gaze_rubric()), ConfigError);

    config.tau = {6.0};
    CHECK_THROWS_AS(config.validate(), ConfigError);
    config = LoopConfig{};
    config.k_max = 0;
    CHECK_THROWS_AS(config.validate(), ConfigError);
}

TEST_CASE("property: random score scripts satisfy the loop invariants") {
    std::mt19937_64 rng(59);
    for (int round = 0; round < 60; ++round) {
        std::string why;
        const bool ok = test::check_loop_invariants_once(rng, &why);
        CHECK_MESSAGE(ok, why);
    }
}

} // TEST_SUITE
