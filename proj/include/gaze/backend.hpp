// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <semaphore>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gaze {

// Markers the pipeline modules put into the prompts they build. The offline
// template provider dispatches on these; remote models just see them as part
// of the instructions.
namespace prompts {
inline constexpr std::string_view kGazeNarrationTask = "### TASK: GAZE_NARRATION";
inline constexpr std::string_view kEvaluateTaskPrefix = "### TASK: EVALUATE ";
inline constexpr std::string_view kRefineTask = "### TASK: REFINE";

inline constexpr std::string_view kCtxDelimiter = "CTX:";
inline constexpr std::string_view kGazeDelimiter = "GAZE:";
inline constexpr std::string_view kMotionDelimiter = "MOTION:";

inline constexpr std::string_view kRubricHeader = "RUBRIC:";
inline constexpr std::string_view kNarrationHeader = "NARRATION:";
inline constexpr std::string_view kCritiqueHeader = "CRITIQUE:";
inline constexpr std::string_view kContextHeader = "CONTEXT:";
inline constexpr std::string_view kReplyFormatHeader = "REPLY FORMAT:";

inline constexpr std::string_view kInputHeader = "Input:";
inline constexpr std::string_view kOutputHeader = "Output:";
} // namespace prompts

struct GenerationRequest {
    std::string prompt;
    int max_output_tokens = 1024;
    double temperature = 0.0;
    std::string provider_name; // routing tag, informational

    void validate() const; // throws InputError
};

struct RetryPolicy {
    int max_attempts = 3;
    int base_delay_ms = 250; // doubles per retry
};

enum class ProviderKind { Remote, Template };

struct ProviderConfig {
    ProviderKind kind = ProviderKind::Template;
    std::string endpoint;       // chat-completions URL, remote only
    std::string embed_endpoint; // embeddings URL, remote only
    std::string model;
    std::string credential_env; // name of the env var holding the API key
    RetryPolicy retry;
    int timeout_ms = 30000;
    int max_concurrent = 0; // 0 = unlimited in-flight remote calls
    int embed_dim = 4096;   // offline hashed term-frequency dimension

    void validate() const; // throws ConfigError
};

// One text-generation/embedding provider handle. Shareable across threads;
// implementations must tolerate concurrent calls.
class Provider {
public:
    virtual ~Provider() = default;
    virtual std::string generate(const GenerationRequest& request) = 0;
    virtual std::vector<double> embed(const std::string& text) = 0;
};

// Deterministic term-frequency embedding: tokens are lowercased, split on
// non-alphanumerics, and hashed (FNV-1a) into a fixed-dimension count vector.
// Fixed dimension keeps embeddings of independent texts directly comparable.
std::vector<double> hashed_term_frequency_embedding(const std::string& text, int dim);

// Rule-based offline engine. Recognizes the prompt shapes built by the
// pipeline (narration, integration, evaluation, refinement) and renders a
// deterministic completion; anything else fails loudly. Pure function of the
// prompt, so whole-pipeline runs are byte-reproducible.
class TemplateProvider : public Provider {
public:
    explicit TemplateProvider(int embed_dim = 4096) : embed_dim_(embed_dim) {}
    std::string generate(const GenerationRequest& request) override;
    std::vector<double> embed(const std::string& text) override;

private:
    int embed_dim_;
};

struct HttpRequest {
    std::string url;
    std::string body; // JSON
    std::vector<std::pair<std::string, std::string>> headers;
    int timeout_ms = 30000;
};

struct HttpResponse {
    int status = 0;
    std::string body;
    std::string transport_error; // nonempty means the request never completed

    bool ok() const { return transport_error.empty(); }
};

// POST seam so tests can script transport behavior without sockets.
using HttpTransport = std::function<HttpResponse(const HttpRequest&)>;

HttpTransport default_http_transport();

// Single-turn chat-completions client. Credential is read from the configured
// environment variable at call time, sent only in the Authorization header,
// and never logged or serialized. Transient failures (transport errors, 408,
// 429, 5xx) are retried with exponential backoff up to retry.max_attempts.
class RemoteProvider : public Provider {
public:
    explicit RemoteProvider(ProviderConfig config, HttpTransport transport = {});
    std::string generate(const GenerationRequest& request) override;
    std::vector<double> embed(const std::string& text) override;

    // Attempts consumed by the most recent call (for logging/tests).
    int last_attempt_count() const { return last_attempts_; }

private:
    std::string post_with_retries(const std::string& url, const std::string& body,
                                  std::string_view what);
    std::string read_credential() const;

    ProviderConfig config_;
    HttpTransport transport_;
    std::unique_ptr<std::counting_semaphore<>> throttle_; // when max_concurrent > 0
    std::atomic<int> last_attempts_ = 0;
};

std::shared_ptr<Provider> make_provider(const ProviderConfig& config);

} // namespace gaze
