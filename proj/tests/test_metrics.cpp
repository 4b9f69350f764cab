// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <json.hpp>

#include "gaze/backend.hpp"
#include "gaze/errors.hpp"
#include "gaze/metrics.hpp"

using namespace gaze;

namespace {

// Textbook recursive LCS, the oracle for the dynamic program.
std::size_t lcs_recursive(const std::vector<std::string>& a,
                          const std::vector<std::string>& b, std::size_t i,
                          std::size_t j) {
    if (i == 0 || j == 0) return 0;
    if (a[i - 1] == b[j - 1]) return 1 + lcs_recursive(a, b, i - 1, j - 1);
    return std::max(lcs_recursive(a, b, i - 1, j), lcs_recursive(a, b, i, j - 1));
}

} // namespace

TEST_SUITE("metrics") {

TEST_CASE("tokenize: lowercase, punctuation split, no empty tokens") {
    const TokenSequence seq = tokenize("The user, walking quickly -- looks UP!");
    CHECK(seq.tokens == std::vector<std::string>{"the", "user", "walking", "quickly",
                                                 "looks", "up"});
    CHECK(tokenize("...!?").tokens.empty());
    CHECK(tokenize("").tokens.empty());
    for (const std::string& t : tokenize("a--b  c..d").tokens) CHECK(!t.empty());
}

TEST_CASE("rouge_n: trivial and hand-counted cases") {
    const TokenSequence same = tokenize("the cat sat");
    CHECK(rouge_n(same, same, 1).f1 == 1.0);
    CHECK(rouge_n(same, same, 2).f1 == 1.0);

    CHECK(rouge_n(tokenize("alpha beta"), tokenize("gamma delta"), 1).f1 == 0.0);

    const auto prf = rouge_n(tokenize("the cat sat"), tokenize("the cat ran"), 1);
    CHECK(prf.precision == doctest::Approx(2.0 / 3.0));
    CHECK(prf.recall == doctest::Approx(2.0 / 3.0));
    CHECK(prf.f1 == doctest::Approx(2.0 / 3.0));

    // n larger than either side yields zeros.
    CHECK(rouge_n(tokenize("one"), tokenize("one"), 2).f1 == 0.0);
    CHECK_THROWS_AS(rouge_n(same, same, 0), InputError);
}

TEST_CASE("rouge_n: clipped counts respect duplicates") {
    // candidate has "the" twice, reference once: clipped overlap is 1 + cat = 2.
    const auto prf = rouge_n(tokenize("the the cat"), tokenize("the cat sat"), 1);
    CHECK(prf.precision == doctest::Approx(2.0 / 3.0));
    CHECK(prf.recall == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("rouge_l: the hand-evaluated fixture is exactly two thirds") {
    const auto prf = rouge_l(tokenize("the cat sat"), tokenize("the cat ran"));
    CHECK(prf.f1 == 2.0 / 3.0); // exact, not approximate
    CHECK(rouge_l(tokenize("the cat sat"), tokenize("the cat sat")).f1 == 1.0);
    CHECK(rouge_l(TokenSequence{}, tokenize("the cat")).f1 == 0.0);
    CHECK(rouge_l(tokenize("the cat"), TokenSequence{}).precision == 0.0);
}

TEST_CASE("rouge_l: swapping candidate and reference preserves f1") {
    std::mt19937_64 rng(3);
    const char* vocab[] = {"a", "b", "c", "d"};
    for (int round = 0; round < 50; ++round) {
        TokenSequence x, y;
        for (std::size_t i = 0; i < 1 + rng() % 8; ++i) x.tokens.push_back(vocab[rng() % 4]);
        for (std::size_t i = 0; i < 1 + rng() % 8; ++i) y.tokens.push_back(vocab[rng() % 4]);
        const auto xy = rouge_l(x, y);
        const auto yx = rouge_l(y, x);
        CHECK(xy.f1 == doctest::Approx(yx.f1).epsilon(1e-15));
        CHECK(xy.precision == yx.recall);
        CHECK(xy.f1 >= 0.0);
        CHECK(xy.f1 <= 1.0);
        CHECK(rouge_n(x, x, 1).f1 == 1.0); // nonempty by construction
        CHECK(rouge_l(x, x).f1 == 1.0);
    }
}

TEST_CASE("rouge_l: dynamic program matches the recursive oracle") {
    std::mt19937_64 rng(7);
    const char* vocab[] = {"x", "y", "z"};
    for (int round = 0; round < 200; ++round) {
        TokenSequence a, b;
        for (std::size_t i = 0; i < rng() % 11; ++i) a.tokens.push_back(vocab[rng() % 3]);
        for (std::size_t i = 0; i < rng() % 11; ++i) b.tokens.push_back(vocab[rng() % 3]);
        CHECK(lcs_length(a, b) ==
              lcs_recursive(a.tokens, b.tokens, a.tokens.size(), b.tokens.size()));
    }
}

TEST_CASE("action_f1: set arithmetic over the lexicon") {
    const std::set<std::string> lexicon = {"walk", "reach", "grasp", "sit"};
    CHECK(action_f1("the user walks... walk and reach", "walk reach", lexicon) == 1.0);
    CHECK(action_f1("walk and reach", "walk and grasp", lexicon) == 0.5);
    CHECK(action_f1("nothing here", "walk", lexicon) == 0.0);
    CHECK(action_f1("idle text", "more idle text", lexicon) == 1.0); // both empty
    CHECK_THROWS_AS(action_f1("a", "b", {}), InputError);
}

TEST_CASE("action_f1: invariant to word order and duplicate mentions") {
    const std::set<std::string> lexicon = {"walk", "reach", "sit"};
    const double base = action_f1("walk then reach", "reach walk", lexicon);
    CHECK(base == 1.0);
    CHECK(action_f1("reach then walk walk walk", "walk reach reach", lexicon) == base);
}

TEST_CASE("cosine: trivial and hand-computed values") {
    const std::vector<double> a = {1.0, 0.0};
    const std::vector<double> b = {1.0, 1.0};
    const std::vector<double> unit_y = {0.0, 1.0};
    const std::vector<double> longer = {1.0, 2.0, 3.0};
    const std::vector<double> zero = {0.0, 0.0};
    CHECK(cosine_similarity(a, a) == doctest::Approx(1.0));
    CHECK(cosine_similarity(a, unit_y) == 0.0);
    CHECK(cosine_similarity(a, b) == doctest::Approx(0.70711).epsilon(1e-5));

    CHECK_THROWS_AS(cosine_similarity(a, longer), InputError);
    CHECK_THROWS_AS(cosine_similarity(a, zero), InputError);
}

TEST_CASE("cosine: positive scaling leaves the similarity unchanged") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> value(0.0, 5.0);
    std::uniform_real_distribution<double> scale(0.1, 10.0);
    for (int round = 0; round < 30; ++round) {
        std::vector<double> a(8), b(8);
        for (int i = 0; i < 8; ++i) {
            a[i] = value(rng);
            b[i] = value(rng);
        }
        a[0] += 1.0; // keep both nonzero
        b[0] += 1.0;
        const double alpha = scale(rng);
        std::vector<double> scaled = a;
        for (double& v : scaled) v *= alpha;
        CHECK(cosine_similarity(scaled, b) ==
              doctest::Approx(cosine_similarity(a, b)).epsilon(1e-12));
    }
}

TEST_CASE("corpus evaluation: identical files score 1.0 everywhere") {
    const std::vector<std::string> lines = {"the user walks forward",
                                            "the user reaches for a mug"};
    TemplateProvider embedder;
    const MetricReport report =
        evaluate_corpus(lines, lines, default_action_lexicon(), embedder);
    REQUIRE(report.pairs.size() == 2);
    CHECK(report.means.rouge1_f1 == 1.0);
    CHECK(report.means.rougeL_f1 == 1.0);
    CHECK(report.means.action_f1 == 1.0);
    CHECK(report.means.cosine_similarity == doctest::Approx(1.0));

    CHECK_THROWS_AS(
        evaluate_corpus(lines, {"one line"}, default_action_lexicon(), embedder),
        InputError);
}

TEST_CASE("corpus evaluation: report JSON carries pairs and means") {
    TemplateProvider embedder;
    const MetricReport report = evaluate_corpus(
        {"the cat sat"}, {"the cat ran"}, default_action_lexicon(), embedder);
    const auto doc = nlohmann::json::parse(metric_report_to_json(report));
    REQUIRE(doc["pairs"].size() == 1);
    CHECK(doc["pairs"][0]["rougeL_f1"].get<double>() == doctest::Approx(2.0 / 3.0));
    CHECK(doc["means"].contains("cosine_similarity"));
    CHECK(!doc["means"].contains("bertscore_f1"));
}

TEST_CASE("lexicon loading skips comments and blanks") {
    const auto path = std::filesystem::temp_directory_path() / "lexicon_test.txt";
    {
        std::ofstream out(path);
        out << "# verbs\nwalk\n\nReach\ngrasp\n";
    }
    const auto lexicon = load_lexicon(path);
    CHECK(lexicon == std::set<std::string>{"walk", "reach", "grasp"});

    const auto empty_path = std::filesystem::temp_directory_path() / "lexicon_empty.txt";
    { std::ofstream out(empty_path); out << "# nothing\n"; }
    CHECK_THROWS_AS(load_lexicon(empty_path), InputError);
}

} // TEST_SUITE
