// SPDX-License-Identifier: Apache-2.0
#include "gaze/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>

#include <json.hpp>

#include "gaze/backend.hpp"
#include "gaze/errors.hpp"

namespace gaze {

namespace {

bool is_token_char(unsigned char c) {
    return std::isalnum(c) != 0 || c >= 0x80;
}

PrecisionRecallF1 prf(double precision, double recall) {
    PrecisionRecallF1 out;
    out.precision = precision;
    out.recall = recall;
    if (precision + recall > 0.0) {
        // Harmonic mean; the identity branch keeps equal P/R exact.
        out.f1 = precision == recall
                     ? precision
                     : 2.0 * precision * recall / (precision + recall);
    }
    return out;
}

std::map<std::vector<std::string_view>, std::size_t>
ngram_counts(const TokenSequence& seq, int n) {
    std::map<std::vector<std::string_view>, std::size_t> counts;
    if (static_cast<int>(seq.tokens.size()) < n) return counts;
    for (std::size_t i = 0; i + n <= seq.tokens.size(); ++i) {
        std::vector<std::string_view> gram;
        gram.reserve(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) gram.emplace_back(seq.tokens[i + k]);
        ++counts[std::move(gram)];
    }
    return counts;
}

std::set<std::string> lexicon_hits(std::string_view text,
                                   const std::set<std::string>& lexicon) {
    std::set<std::string> hits;
    for (const std::string& token : tokenize(text).tokens) {
        if (lexicon.count(token)) hits.insert(token);
    }
    return hits;
}

} // namespace

TokenSequence tokenize(std::string_view text) {
    TokenSequence seq;
    std::string current;
    for (unsigned char c : text) {
        if (is_token_char(c)) {
            current += static_cast<char>(std::tolower(c));
        } else if (!current.empty()) {
            seq.tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) seq.tokens.push_back(std::move(current));
    return seq;
}

PrecisionRecallF1 rouge_n(const TokenSequence& candidate, const TokenSequence& reference,
                          int n) {
    if (n < 1) throw InputError("rouge_n: n must be >= 1");
    const auto cand = ngram_counts(candidate, n);
    const auto ref = ngram_counts(reference, n);
    std::size_t cand_total = 0, ref_total = 0, overlap = 0;
    for (const auto& [gram, count] : cand) cand_total += count;
    for (const auto& [gram, count] : ref) ref_total += count;
    if (cand_total == 0 || ref_total == 0) return {};
    for (const auto& [gram, count] : cand) {
        const auto it = ref.find(gram);
        if (it != ref.end()) overlap += std::min(count, it->second);
    }
    return prf(static_cast<double>(overlap) / static_cast<double>(cand_total),
               static_cast<double>(overlap) / static_cast<double>(ref_total));
}

std::size_t lcs_length(const TokenSequence& a, const TokenSequence& b) {
    const std::size_t m = a.tokens.size(), n = b.tokens.size();
    if (m == 0 || n == 0) return 0;
    std::vector<std::size_t> prev(n + 1, 0), curr(n + 1, 0);
    for (std::size_t i = 1; i <= m; ++i) {
        for (std::size_t j = 1; j <= n; ++j) {
            curr[j] = a.tokens[i - 1] == b.tokens[j - 1]
                          ? prev[j - 1] + 1
                          : std::max(prev[j], curr[j - 1]);
        }
        std::swap(prev, curr);
    }
    return prev[n];
}

PrecisionRecallF1 rouge_l(const TokenSequence& candidate, const TokenSequence& reference) {
    if (candidate.tokens.empty() || reference.tokens.empty()) return {};
    const double lcs = static_cast<double>(lcs_length(candidate, reference));
    return prf(lcs / static_cast<double>(candidate.tokens.size()),
               lcs / static_cast<double>(reference.tokens.size()));
}

double action_f1(std::string_view candidate, std::string_view reference,
                 const std::set<std::string>& lexicon) {
    if (lexicon.empty()) throw InputError("action_f1: empty lexicon");
    const auto predicted = lexicon_hits(candidate, lexicon);
    const auto expected = lexicon_hits(reference, lexicon);
    if (predicted.empty() && expected.empty()) return 1.0;
    if (predicted.empty() || expected.empty()) return 0.0;
    std::size_t inter = 0;
    for (const std::string& term : predicted) inter += expected.count(term);
    const double p = static_cast<double>(inter) / static_cast<double>(predicted.size());
    const double r = static_cast<double>(inter) / static_cast<double>(expected.size());
    return prf(p, r).f1;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw InputError("cosine_similarity: dimension mismatch (" +
                         std::to_string(a.size()) + " vs " + std::to_string(b.size()) +
                         ")");
    }
    double dot = 0.0, norm_a = 0.0, norm_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        norm_a += a[i] * a[i];
        norm_b += b[i] * b[i];
    }
    if (norm_a == 0.0 || norm_b == 0.0) {
        throw InputError("cosine_similarity: zero vector");
    }
    return dot / (std::sqrt(norm_a) * std::sqrt(norm_b));
}

MetricReport evaluate_corpus(const std::vector<std::string>& candidates,
                             const std::vector<std::string>& references,
                             const std::set<std::string>& lexicon, Provider& embedder) {
    if (candidates.size() != references.size()) {
        throw InputError("candidate/reference line counts differ: " +
                         std::to_string(candidates.size()) + " vs " +
                         std::to_string(references.size()));
    }
    if (candidates.empty()) throw InputError("no candidate/reference pairs");

    MetricReport report;
    report.pairs.reserve(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const TokenSequence cand = tokenize(candidates[i]);
        const TokenSequence ref = tokenize(references[i]);
        PairMetrics pair;
        pair.rouge1_f1 = rouge_n(cand, ref, 1).f1;
        pair.rougeL_f1 = rouge_l(cand, ref).f1;
        pair.action_f1 = action_f1(candidates[i], references[i], lexicon);
        const auto a = embedder.embed(candidates[i]);
        const auto b = embedder.embed(references[i]);
        pair.cosine_similarity = cosine_similarity(a, b);
        report.pairs.push_back(pair);

        report.means.rouge1_f1 += pair.rouge1_f1;
        report.means.rougeL_f1 += pair.rougeL_f1;
        report.means.action_f1 += pair.action_f1;
        report.means.cosine_similarity += pair.cosine_similarity;
    }
    const double n = static_cast<double>(report.pairs.size());
    report.means.rouge1_f1 /= n;
    report.means.rougeL_f1 /= n;
    report.means.action_f1 /= n;
    report.means.cosine_similarity /= n;
    return report;
}

std::string metric_report_to_json(const MetricReport& report) {
    nlohmann::ordered_json doc;
    auto pair_json = [](const PairMetrics& p) {
        nlohmann::ordered_json obj;
        obj["rouge1_f1"] = p.rouge1_f1;
        obj["rougeL_f1"] = p.rougeL_f1;
        obj["action_f1"] = p.action_f1;
        obj["cosine_similarity"] = p.cosine_similarity;
        return obj;
    };
    doc["pairs"] = nlohmann::ordered_json::array();
    for (const PairMetrics& p : report.pairs) doc["pairs"].push_back(pair_json(p));
    doc["means"] = pair_json(report.means);
    return doc.dump(2);
}

std::set<std::string> load_lexicon(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open lexicon file: " + path.string());
    std::set<std::string> lexicon;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        for (const std::string& token : tokenize(line).tokens) lexicon.insert(token);
    }
    if (lexicon.empty()) throw InputError("lexicon file has no keywords: " + path.string());
    return lexicon;
}

std::set<std::string> default_action_lexicon() {
    return {
        "walk",  "walks",  "walking",  "run",    "runs",   "running",  "stand",
        "stands","standing","sit",     "sits",   "sitting","reach",    "reaches",
        "reaching","grasp","grasps",   "grasping","grab",  "grabs",    "grabbing",
        "pick",  "picks",  "picking",  "place",  "places", "placing",  "put",
        "puts",  "putting","open",     "opens",  "opening","close",    "closes",
        "closing","turn",  "turns",    "turning","look",   "looks",    "looking",
        "carry", "carries","carrying", "push",   "pushes", "pushing",  "pull",
        "pulls", "pulling","lift",     "lifts",  "lifting","hold",     "holds",
        "holding","step",  "steps",    "stepping","bend",  "bends",    "bending",
        "wipe",  "wipes",  "wiping",   "clean",  "cleans", "cleaning", "pour",
        "pours", "pouring","wash",     "washes", "washing","cut",      "cuts",
        "cutting","scan",  "scans",    "scanning","fixate","fixates",  "fixating",
        "glance","glances","glancing", "track",  "tracks", "tracking",
    };
}

} // namespace gaze
