#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "psynth/ingest.hpp"
#include "psynth/method.hpp"
#include "psynth/persona.hpp"
#include "psynth/schema.hpp"

namespace psynth {

// ---------------------------------------------------------------------------
// Prompt templates
//
// Placeholders:
//   {{question}}   question text
//   {{responses}}  the response options, quoted, in order
//   {{format}}     reply-format instruction (a JSON object keyed by option)
//   {{persona}}    "- Attribute: category" lines        (needs a persona)
//   {{stats}}      benchmark percentages per group       (needs statistics)
// A block {{?persona}}...{{/persona}} or {{?stats}}...{{/stats}} is rendered only when
// that context is present; outside such a block the placeholder is mandatory.
// ---------------------------------------------------------------------------

struct PromptTemplate {
    Method method = Method::naive;
    std::string text;
};

PromptTemplate default_template(Method method);

/// Throws TemplateError on an unknown placeholder, an unbalanced block, or a
/// mandatory placeholder whose context is missing.
std::string render_prompt(const PromptTemplate& tmpl, const AttributeSchema& schema,
                          const Persona* persona, const Question& question,
                          const GroupedDistribution* stats);

// ---------------------------------------------------------------------------
// Transport
// ---------------------------------------------------------------------------

struct HttpRequest {
    std::string base_url; ///< scheme://host[:port]
    std::string path;
    std::map<std::string, std::string> headers;
    std::string body;
};

struct HttpResponse {
    int status = 0;
    std::string body;
};

/// Performs one POST. Throws TransportError (status 0) on connection-level failure.
class Transport {
public:
    virtual ~Transport() = default;
    virtual HttpResponse post(const HttpRequest& request) = 0;
};

/// cpp-httplib backed transport (HTTPS when built with OpenSSL).
class HttpTransport final : public Transport {
public:
    explicit HttpTransport(std::chrono::seconds timeout = std::chrono::seconds(120));
    HttpResponse post(const HttpRequest& request) override;

private:
    std::chrono::seconds timeout_;
};

// ---------------------------------------------------------------------------
// Client
// ---------------------------------------------------------------------------

struct LlmSettings {
    std::string base_url = "https://api.openai.com";
    std::string path = "/v1/chat/completions";
    std::string model = "gpt-4o";
    double temperature = 0.7;
    int max_tokens = 400;
    int max_retries = 3;
    std::chrono::milliseconds backoff{500}; ///< first retry delay; doubles per retry
    std::size_t max_inflight = 4;
    std::string cache_dir; ///< empty disables the disk cache
    std::string api_key_env = "PERSONA_SYNTH_API_KEY";
};

struct LlmExchange {
    std::string request_hash;
    std::string prompt;
    std::string raw;          ///< assistant message text
    std::string parse_status = "unparsed";
    std::string timestamp;    ///< UTC, ISO 8601
    std::string model;
    int retries = 0;
    bool from_cache = false;
};

/// SHA-256 (hex) of model id, prompt and decoding parameters.
std::string request_hash(const LlmSettings& settings, std::string_view prompt);

class LlmClient {
public:
    LlmClient(LlmSettings settings, std::shared_ptr<Transport> transport);

    const LlmSettings& settings() const noexcept { return settings_; }

    /// Cached exchange when present, else a call with bounded retries and exponential
    /// backoff whose result is persisted. Throws ConfigError when the credential is
    /// absent (before any I/O) and TransportError on failure.
    LlmExchange complete(const std::string& prompt);

    /// complete() for every prompt with at most max_inflight calls outstanding.
    /// Duplicate prompts are sent once. Results follow input order.
    std::vector<LlmExchange> complete_all(const std::vector<std::string>& prompts);

    /// Rewrites the cached copy of an exchange with a new parse status.
    void record_parse_status(LlmExchange& exchange, std::string status);

private:
    std::string credential() const;
    std::string cache_path(const std::string& hash) const;
    bool load_cached(const std::string& hash, LlmExchange& out) const;
    void persist(const LlmExchange& exchange);

    LlmSettings settings_;
    std::shared_ptr<Transport> transport_;
    std::mutex persist_mutex_;
    std::size_t tmp_counter_ = 0;
};

/// Extracts one share per response option from a JSON object in `raw` (optionally
/// wrapped in prose or a code fence, or nested one level under a single key).
/// Percentages and fractions are both accepted; a total within 2 % of the unit is
/// renormalized, anything else is rejected. Throws ParseError carrying `raw`.
std::vector<double> parse_distribution(std::string_view raw, const Question& question);

} // namespace psynth
