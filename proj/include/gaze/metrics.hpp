// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gaze {

class Provider;

// Lowercased tokens split on whitespace and punctuation; never empty strings.
struct TokenSequence {
    std::vector<std::string> tokens;
};

// Lowercase, split on non-alphanumerics. Bytes >= 0x80 are kept as token
// characters so UTF-8 words survive intact (no case mapping outside ASCII).
TokenSequence tokenize(std::string_view text);

struct PrecisionRecallF1 {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Clipped n-gram overlap. Either side with no n-grams yields all zeros.
PrecisionRecallF1 rouge_n(const TokenSequence& candidate, const TokenSequence& reference,
                          int n);

// Longest-common-subsequence variant. Either side empty yields all zeros.
PrecisionRecallF1 rouge_l(const TokenSequence& candidate, const TokenSequence& reference);

std::size_t lcs_length(const TokenSequence& a, const TokenSequence& b);

// Set-F1 over the lexicon terms present in each text. Equal sets (including
// both empty) score 1.0; an empty side against a nonempty one scores 0.0.
double action_f1(std::string_view candidate, std::string_view reference,
                 const std::set<std::string>& lexicon);

// dot(a, b) / (|a| |b|). Throws InputError on dimension mismatch or a zero
// vector.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

struct PairMetrics {
    double rouge1_f1 = 0.0;
    double rougeL_f1 = 0.0;
    double action_f1 = 0.0;
    double cosine_similarity = 0.0;
};

struct MetricReport {
    std::vector<PairMetrics> pairs;
    PairMetrics means;
};

// Line-aligned candidate/reference scoring; cosine uses the given provider's
// embedding. Throws InputError when the lists differ in length.
MetricReport evaluate_corpus(const std::vector<std::string>& candidates,
                             const std::vector<std::string>& references,
                             const std::set<std::string>& lexicon, Provider& embedder);

std::string metric_report_to_json(const MetricReport& report);

// One keyword per line, UTF-8; blank lines and '#' comments are skipped.
std::set<std::string> load_lexicon(const std::filesystem::path& path);
std::set<std::string> default_action_lexicon();

} // namespace gaze
