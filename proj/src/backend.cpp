// SPDX-License-Identifier: Apache-2.0
#include "gaze/backend.hpp"

#include <chrono>
#include <cstdlib>
#include <memory>
#include <semaphore>
#include <thread>

#include <json.hpp>

#include "gaze/errors.hpp"
#include "gaze/log.hpp"
#include "gaze/metrics.hpp"

namespace gaze {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::size_t begin = 0;
    while (begin <= text.size()) {
        const std::size_t end = text.find('\n', begin);
        if (end == std::string_view::npos) {
            lines.emplace_back(text.substr(begin));
            break;
        }
        lines.emplace_back(text.substr(begin, end - begin));
        begin = end + 1;
    }
    return lines;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) out += sep;
        out += parts[i];
    }
    return out;
}

std::string_view first_line(std::string_view text) {
    const std::size_t end = text.find('\n');
    return end == std::string_view::npos ? text : text.substr(0, end);
}

// Lines strictly between the last `header` line and the next line equal to
// one of `enders` (or the end of the prompt).
std::vector<std::string> section_after_last(const std::vector<std::string>& lines,
                                            std::string_view header,
                                            std::initializer_list<std::string_view> enders) {
    std::size_t start = lines.size();
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i] == header) start = i;
    }
    std::vector<std::string> body;
    if (start == lines.size()) return body;
    for (std::size_t i = start + 1; i < lines.size(); ++i) {
        for (std::string_view ender : enders) {
            if (lines[i] == ender) return body;
        }
        body.push_back(lines[i]);
    }
    return body;
}

// --- event-line extraction for the narration rule -------------------------

// Pulls the text between `key` and the delimiter that closes it, e.g.
// field_text(line, "duration=", " ") on "... duration=1.000s (Long) ..."
// yields "1.000s".
std::string field_text(const std::string& line, std::string_view key,
                       std::string_view closer) {
    const std::size_t at = line.find(key);
    if (at == std::string::npos) return {};
    const std::size_t begin = at + key.size();
    const std::size_t end = line.find(closer, begin);
    if (end == std::string::npos) return line.substr(begin);
    return line.substr(begin, end - begin);
}

// Label in parentheses immediately following `key`'s value, if any.
std::string trailing_label(const std::string& line, std::string_view key) {
    const std::size_t at = line.find(key);
    if (at == std::string::npos) return {};
    const std::size_t paren = line.find(" (", at);
    const std::size_t next_field = line.find('=', at + key.size());
    if (paren == std::string::npos) return {};
    if (next_field != std::string::npos && paren > next_field) return {};
    const std::size_t close = line.find(')', paren);
    if (close == std::string::npos) return {};
    return line.substr(paren + 2, close - paren - 2);
}

std::string lowercase(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::string narrate_event_line(const std::string& line) {
    const std::string cls(first_line(line).substr(0, line.find(' ')));
    const std::string duration = field_text(line, "duration=", " ");
    const std::string amplitude = field_text(line, "amplitude=", " ");
    const std::string peak = field_text(line, "peak_velocity=", " ");
    const std::string centroid = field_text(line, "centroid=(", ")");

    if (cls == "Fixation") {
        return "fixates at (" + centroid + ") for " + duration;
    }
    if (cls == "Saccade") {
        const std::string label = lowercase(trailing_label(line, "amplitude="));
        const std::string kind = label.empty() ? "a saccade" : "a " + label + " saccade";
        return "makes " + kind + " of " + amplitude + " peaking at " + peak;
    }
    if (cls == "SmoothPursuit") {
        return "smoothly pursues a target for " + duration + " across " + amplitude;
    }
    throw BackendError("template provider: unrecognized event line: " + line);
}

std::string render_gaze_narration(const std::string& prompt) {
    const auto lines = split_lines(prompt);
    const auto events = section_after_last(lines, prompts::kInputHeader,
                                           {prompts::kOutputHeader});
    std::vector<std::string> clauses;
    for (const std::string& line : events) {
        if (line.empty()) continue;
        clauses.push_back(narrate_event_line(line));
    }
    if (clauses.empty()) {
        throw BackendError("template provider: narration prompt carries no event lines");
    }
    return "The user " + join(clauses, ", then ") + ".";
}

// --- integration rule ------------------------------------------------------

std::string render_integration(const std::string& prompt) {
    const auto lines = split_lines(prompt);

    std::vector<std::string> gaze_lines, motion_lines;
    bool has_history = false;
    enum { InCtx, InGaze, InMotion } state = InCtx;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i] == prompts::kGazeDelimiter) {
            state = InGaze;
            continue;
        }
        if (lines[i] == prompts::kMotionDelimiter) {
            state = InMotion;
            continue;
        }
        if (state == InCtx && lines[i].rfind("history[", 0) == 0) has_history = true;
        if (state == InGaze) gaze_lines.push_back(lines[i]);
        if (state == InMotion && !lines[i].empty()) motion_lines.push_back(lines[i]);
    }
    const std::string gaze = join(gaze_lines, "\n");
    if (gaze.empty()) {
        throw BackendError("template provider: integration prompt has an empty GAZE section");
    }

    std::vector<std::string> motions;
    for (const std::string& line : motion_lines) {
        const std::size_t close = line.find("] ");
        motions.push_back(close == std::string::npos ? line : line.substr(close + 2));
    }

    std::string out = has_history ? "Continuing the earlier activity, " : "";
    out += has_history ? lowercase(gaze.substr(0, 1)) + gaze.substr(1) : gaze;
    if (!motions.empty()) {
        out += " During this, the user " + join(motions, "; ") + ".";
    }
    return out;
}

// --- evaluation / refinement rules -----------------------------------------

std::string render_evaluation(const std::string& prompt) {
    const std::string kind(first_line(prompt).substr(prompts::kEvaluateTaskPrefix.size()));
    ordered_json reply;
    if (kind == "gaze") {
        reply["Continuity"] = 5;
    } else if (kind == "integrated") {
        reply["Match"] = 5;
        reply["Temporal"] = 5;
        reply["Completeness"] = 5;
    } else {
        throw BackendError("template provider: unknown evaluation kind '" + kind + "'");
    }
    reply["critique"] = "";
    return reply.dump();
}

std::string render_refinement(const std::string& prompt) {
    const auto lines = split_lines(prompt);
    const auto body = section_after_last(lines, prompts::kNarrationHeader,
                                         {prompts::kCritiqueHeader});
    const std::string narration = join(body, "\n");
    if (narration.empty()) {
        throw BackendError("template provider: refine prompt has an empty narration");
    }
    return narration + " [revised]";
}

// --- remote helpers ---------------------------------------------------------

bool is_retryable_status(int status) {
    return status == 408 || status == 429 || status >= 500;
}

std::string truncate(const std::string& s, std::size_t n = 200) {
    return s.size() <= n ? s : s.substr(0, n) + "...";
}

class ConcurrencyGuard {
public:
    explicit ConcurrencyGuard(std::counting_semaphore<>* sem) : sem_(sem) {
        if (sem_) sem_->acquire();
    }
    ~ConcurrencyGuard() {
        if (sem_) sem_->release();
    }
    ConcurrencyGuard(const ConcurrencyGuard&) = delete;
    ConcurrencyGuard& operator=(const ConcurrencyGuard&) = delete;

private:
    std::counting_semaphore<>* sem_;
};

} // namespace

void GenerationRequest::validate() const {
    if (prompt.empty()) throw InputError("generation request: empty prompt");
    if (max_output_tokens < 1)
        throw InputError("generation request: max_output_tokens must be >= 1");
    if (temperature < 0.0)
        throw InputError("generation request: temperature must be >= 0");
}

void ProviderConfig::validate() const {
    if (retry.max_attempts < 1) throw ConfigError("retry.max_attempts must be >= 1");
    if (retry.base_delay_ms < 0) throw ConfigError("retry.base_delay_ms must be >= 0");
    if (timeout_ms <= 0) throw ConfigError("timeout_ms must be > 0");
    if (embed_dim < 1) throw ConfigError("embed_dim must be >= 1");
    if (kind == ProviderKind::Remote) {
        if (endpoint.empty() || model.empty() || credential_env.empty()) {
            throw ConfigError(
                "remote provider requires endpoint, model, and credential_env");
        }
    }
}

std::vector<double> hashed_term_frequency_embedding(const std::string& text, int dim) {
    if (dim < 1) throw ConfigError("embedding dimension must be >= 1");
    const TokenSequence tokens = tokenize(text);
    std::vector<double> vec(static_cast<std::size_t>(dim), 0.0);
    for (const std::string& token : tokens.tokens) {
        std::uint64_t hash = 14695981039346656037ULL;
        for (unsigned char c : token) {
            hash ^= c;
            hash *= 1099511628211ULL;
        }
        vec[hash % static_cast<std::uint64_t>(dim)] += 1.0;
    }
    return vec;
}

std::string TemplateProvider::generate(const GenerationRequest& request) {
    request.validate();
    const std::string_view head = first_line(request.prompt);
    if (head == prompts::kGazeNarrationTask) {
        return render_gaze_narration(request.prompt);
    }
    if (head.rfind(prompts::kEvaluateTaskPrefix, 0) == 0) {
        return render_evaluation(request.prompt);
    }
    if (head == prompts::kRefineTask) {
        return render_refinement(request.prompt);
    }
    if (head.rfind(prompts::kCtxDelimiter, 0) == 0) {
        return render_integration(request.prompt);
    }
    throw BackendError("template provider: unrecognized prompt shape (first line: '" +
                       std::string(truncate(std::string(head), 60)) + "')");
}

std::vector<double> TemplateProvider::embed(const std::string& text) {
    if (text.empty()) throw InputError("embed: empty text");
    return hashed_term_frequency_embedding(text, embed_dim_);
}

RemoteProvider::RemoteProvider(ProviderConfig config, HttpTransport transport)
    : config_(std::move(config)),
      transport_(transport ? std::move(transport) : default_http_transport()) {
    config_.validate();
    if (config_.kind != ProviderKind::Remote) {
        throw ConfigError("RemoteProvider requires kind=remote");
    }
    if (config_.max_concurrent > 0) {
        throttle_ = std::make_unique<std::counting_semaphore<>>(config_.max_concurrent);
    }
}

std::string RemoteProvider::read_credential() const {
    const char* value = std::getenv(config_.credential_env.c_str());
    if (value == nullptr || *value == '\0') {
        throw AuthError("credential environment variable '" + config_.credential_env +
                        "' is unset or empty");
    }
    return value;
}

std::string RemoteProvider::post_with_retries(const std::string& url,
                                              const std::string& body,
                                              std::string_view what) {
    const std::string credential = read_credential();
    const ConcurrencyGuard guard(throttle_.get());
    const int max_attempts = config_.retry.max_attempts;
    std::string last_failure;
    last_attempts_ = 0;

    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        last_attempts_ = attempt;
        HttpRequest req;
        req.url = url;
        req.body = body;
        req.timeout_ms = config_.timeout_ms;
        req.headers = {{"Authorization", "Bearer " + credential},
                       {"Content-Type", "application/json"}};

        const HttpResponse resp = transport_(req);
        if (!resp.ok()) {
            last_failure = "transport error: " + resp.transport_error;
        } else if (resp.status == 200) {
            if (attempt > 1) {
                log("provider " + config_.model + ": " + std::string(what) +
                    " succeeded after " + std::to_string(attempt) + " attempts");
            }
            return resp.body;
        } else if (resp.status == 401 || resp.status == 403) {
            throw AuthError("provider " + config_.model + ": " + std::string(what) +
                            " rejected with status " + std::to_string(resp.status));
        } else if (is_retryable_status(resp.status)) {
            last_failure = "status " + std::to_string(resp.status);
        } else {
            throw BackendError("provider " + config_.model + ": " + std::string(what) +
                               " failed with status " + std::to_string(resp.status) +
                               ": " + truncate(resp.body));
        }

        log("provider " + config_.model + ": " + std::string(what) + " attempt " +
            std::to_string(attempt) + "/" + std::to_string(max_attempts) +
            " failed (" + last_failure + ")");
        if (attempt < max_attempts && config_.retry.base_delay_ms > 0) {
            const auto delay = std::chrono::milliseconds(
                config_.retry.base_delay_ms * (1L << (attempt - 1)));
            std::this_thread::sleep_for(delay);
        }
    }
    throw BackendError("provider " + config_.model + ": " + std::string(what) +
                       " exhausted " + std::to_string(max_attempts) +
                       " attempts; last failure: " + last_failure);
}

std::string RemoteProvider::generate(const GenerationRequest& request) {
    request.validate();
    ordered_json body;
    body["model"] = config_.model;
    body["messages"] = json::array({{{"role", "user"}, {"content", request.prompt}}});
    body["temperature"] = request.temperature;
    body["max_tokens"] = request.max_output_tokens;

    const std::string raw = post_with_retries(config_.endpoint, body.dump(), "generate");
    json reply;
    try {
        reply = json::parse(raw);
    } catch (const json::exception& e) {
        throw BackendError(std::string("provider reply is not JSON: ") + e.what());
    }
    try {
        return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception&) {
        throw BackendError("provider reply missing choices[0].message.content: " +
                           truncate(raw));
    }
}

std::vector<double> RemoteProvider::embed(const std::string& text) {
    if (text.empty()) throw InputError("embed: empty text");
    if (config_.embed_endpoint.empty()) {
        throw ConfigError("remote provider has no embed_endpoint configured");
    }
    ordered_json body;
    body["model"] = config_.model;
    body["input"] = text;

    const std::string raw =
        post_with_retries(config_.embed_endpoint, body.dump(), "embed");
    json reply;
    try {
        reply = json::parse(raw);
        return reply.at("data").at(0).at("embedding").get<std::vector<double>>();
    } catch (const json::exception&) {
        throw BackendError("provider embedding reply malformed: " + truncate(raw));
    }
}

std::shared_ptr<Provider> make_provider(const ProviderConfig& config) {
    config.validate();
    if (config.kind == ProviderKind::Template) {
        return std::make_shared<TemplateProvider>(config.embed_dim);
    }
    return std::make_shared<RemoteProvider>(config);
}

} // namespace gaze
