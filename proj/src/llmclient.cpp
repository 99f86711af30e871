#include "psynth/llmclient.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "psynth/csv.hpp"
#include "psynth/digest.hpp"
#include "psynth/error.hpp"

namespace psynth {

namespace {

constexpr std::string_view kNaiveFragment =
    "Generate a population based on general demographic knowledge.";
constexpr std::string_view kCorrelationFragment =
    "Simulate mobility preferences while maintaining realistic correlations between age, "
    "household type and economic status based on MiD 2017 data.";

std::string percent_text(double fraction) {
    std::string s = fmt::format("{:.2f}", fraction * 100.0);
    while (s.back() == '0') {
        s.pop_back();
    }
    if (s.back() == '.') {
        s.pop_back();
    }
    return s;
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

bool retryable(int status) { return status == 0 || status == 408 || status == 429 || status >= 500; }

} // namespace

// ---------------------------------------------------------------------------
// Templates

PromptTemplate default_template(Method method) {
    const std::string shared_tail = "Survey question: {{question}}\n"
                                    "Response options: {{responses}}\n"
                                    "{{format}}\n";
    const std::string optional_persona =
        "{{?persona}}Answer for one member of that population with these characteristics:\n"
        "{{persona}}{{/persona}}";
    const std::string required_persona = "You are answering as the following persona:\n{{persona}}";
    const std::string stats = "Expected response statistics (percent of respondents per group):\n"
                              "{{stats}}"
                              "Keep the simulated responses consistent with these statistics.\n";
    const std::string structured_intro =
        "Generate a population for Germany in 2017 whose demographic structure follows the "
        "MiD 2017 benchmarks. " +
        std::string(kCorrelationFragment) + "\n";

    PromptTemplate t{method, {}};
    switch (method) {
    case Method::naive:
        t.text = std::string(kNaiveFragment) + "\n" + optional_persona + shared_tail;
        break;
    case Method::structured:
        t.text = structured_intro + optional_persona + shared_tail;
        break;
    case Method::guided:
        t.text = structured_intro + stats + optional_persona + shared_tail;
        break;
    case Method::naive_persona:
        t.text = std::string(kNaiveFragment) + "\n" + required_persona + shared_tail;
        break;
    case Method::structured_persona:
        t.text = structured_intro + required_persona + shared_tail;
        break;
    case Method::guided_persona:
        t.text = structured_intro + stats + required_persona + shared_tail;
        break;
    }
    return t;
}

std::string render_prompt(const PromptTemplate& tmpl, const AttributeSchema& schema,
                          const Persona* persona, const Question& question,
                          const GroupedDistribution* stats) {
    auto has = [&](std::string_view name) {
        return name == "persona" ? persona != nullptr : stats != nullptr;
    };
    auto value = [&](std::string_view name) -> std::string {
        if (name == "question") {
            return question.text;
        }
        if (name == "responses") {
            std::string out;
            for (std::size_t i = 0; i < question.size(); ++i) {
                out += (i ? ", \"" : "\"") + question.responses[i] + "\"";
            }
            return out;
        }
        if (name == "format") {
            std::string out = "Reply only with a JSON object that maps every response option to "
                              "the percentage of respondents choosing it (summing to 100), e.g. {";
            for (std::size_t i = 0; i < question.size(); ++i) {
                out += (i ? ", \"" : "\"") + question.responses[i] + "\": <percent>";
            }
            return out + "}.";
        }
        if (name == "persona") {
            if (persona == nullptr) {
                throw TemplateError("template needs a persona for {{persona}}");
            }
            if (persona->categories.size() != schema.attribute_count()) {
                throw TemplateError("persona does not match schema");
            }
            std::string out;
            for (std::size_t k = 0; k < schema.attribute_count(); ++k) {
                const auto& attr = schema.attribute(k);
                out += "- " + attr.name + ": " + attr.categories.at(persona->categories[k]) + "\n";
            }
            return out;
        }
        if (name == "stats") {
            if (stats == nullptr) {
                throw TemplateError("template needs response statistics for {{stats}}");
            }
            const auto& attr = schema.attribute(stats->group_index);
            std::string out;
            for (const auto& row : stats->groups) {
                out += "- " + attr.name + " " + attr.categories.at(row.category) + ":";
                for (std::size_t r = 0; r < row.shares.size(); ++r) {
                    out += (r ? ", " : " ") + question.responses.at(r) + " " +
                           percent_text(row.shares[r]) + "%";
                }
                out += "\n";
            }
            return out;
        }
        throw TemplateError("unknown placeholder {{" + std::string(name) + "}}");
    };
    auto known = [](std::string_view name) {
        return name == "question" || name == "responses" || name == "format" ||
               name == "persona" || name == "stats";
    };

    const std::string& text = tmpl.text;
    std::string out;
    std::vector<std::pair<std::string, bool>> blocks;
    auto active = [&] {
        return std::all_of(blocks.begin(), blocks.end(), [](const auto& b) { return b.second; });
    };
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t open = text.find("{{", pos);
        if (open == std::string::npos) {
            if (active()) {
                out.append(text, pos, std::string::npos);
            }
            break;
        }
        if (active()) {
            out.append(text, pos, open - pos);
        }
        const std::size_t close = text.find("}}", open + 2);
        if (close == std::string::npos) {
            throw TemplateError("unterminated placeholder in template");
        }
        const std::string token = text.substr(open + 2, close - open - 2);
        pos = close + 2;
        if (!token.empty() && token.front() == '?') {
            const std::string name = token.substr(1);
            if (name != "persona" && name != "stats") {
                throw TemplateError("unknown optional block {{" + token + "}}");
            }
            blocks.emplace_back(name, has(name));
        } else if (!token.empty() && token.front() == '/') {
            if (blocks.empty() || blocks.back().first != token.substr(1)) {
                throw TemplateError("unbalanced block close {{" + token + "}}");
            }
            blocks.pop_back();
        } else {
            if (!known(token)) {
                throw TemplateError("unknown placeholder {{" + token + "}}");
            }
            if (active()) {
                out += value(token);
            }
        }
    }
    if (!blocks.empty()) {
        throw TemplateError("unclosed block {{?" + blocks.back().first + "}}");
    }
    return out;
}

// ---------------------------------------------------------------------------
// Transport

HttpTransport::HttpTransport(std::chrono::seconds timeout) : timeout_(timeout) {}

HttpResponse HttpTransport::post(const HttpRequest& request) {
    httplib::Client client(request.base_url);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    httplib::Headers headers;
    for (const auto& [k, v] : request.headers) {
        headers.emplace(k, v);
    }
    auto result = client.Post(request.path, headers, request.body, "application/json");
    if (!result) {
        throw TransportError("request to " + request.base_url + request.path +
                             " failed: " + httplib::to_string(result.error()));
    }
    return {result->status, result->body};
}

// ---------------------------------------------------------------------------
// Client

std::string request_hash(const LlmSettings& settings, std::string_view prompt) {
    const nlohmann::json key = {{"model", settings.model},
                                {"prompt", prompt},
                                {"temperature", settings.temperature},
                                {"max_tokens", settings.max_tokens}};
    return sha256_hex(key.dump());
}

LlmClient::LlmClient(LlmSettings settings, std::shared_ptr<Transport> transport)
    : settings_(std::move(settings)), transport_(std::move(transport)) {
    if (!transport_) {
        throw ConfigError("LLM client needs a transport");
    }
    if (settings_.base_url.empty() || settings_.model.empty()) {
        throw ConfigError("LLM backend needs an endpoint base URL and a model name");
    }
    if (settings_.max_inflight == 0) {
        throw ConfigError("max_inflight must be at least 1");
    }
    if (!settings_.cache_dir.empty()) {
        std::filesystem::create_directories(settings_.cache_dir);
    }
}

std::string LlmClient::credential() const {
    const char* key = std::getenv(settings_.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
        throw ConfigError("environment variable " + settings_.api_key_env +
                          " is not set; the LLM backend needs an API key");
    }
    return key;
}

std::string LlmClient::cache_path(const std::string& hash) const {
    return (std::filesystem::path(settings_.cache_dir) / (hash + ".json")).string();
}

bool LlmClient::load_cached(const std::string& hash, LlmExchange& out) const {
    if (settings_.cache_dir.empty()) {
        return false;
    }
    std::ifstream in(cache_path(hash), std::ios::binary);
    if (!in) {
        return false;
    }
    nlohmann::json doc;
    try {
        in >> doc;
        out.request_hash = doc.at("request_hash").get<std::string>();
        out.prompt = doc.at("prompt").get<std::string>();
        out.raw = doc.at("response").get<std::string>();
        out.parse_status = doc.value("parse_status", "unparsed");
        out.timestamp = doc.value("timestamp", "");
        out.model = doc.value("model", settings_.model);
        out.retries = doc.value("retries", 0);
    } catch (const nlohmann::json::exception&) {
        return false; // a torn or foreign file is treated as a miss and overwritten
    }
    out.from_cache = true;
    return out.request_hash == hash;
}

void LlmClient::persist(const LlmExchange& exchange) {
    if (settings_.cache_dir.empty()) {
        return;
    }
    const nlohmann::json doc = {{"request_hash", exchange.request_hash},
                                {"model", exchange.model},
                                {"temperature", settings_.temperature},
                                {"max_tokens", settings_.max_tokens},
                                {"prompt", exchange.prompt},
                                {"response", exchange.raw},
                                {"parse_status", exchange.parse_status},
                                {"timestamp", exchange.timestamp},
                                {"retries", exchange.retries}};
    const std::string final_path = cache_path(exchange.request_hash);
    std::string tmp_path;
    {
        std::lock_guard lock(persist_mutex_);
        tmp_path = final_path + ".tmp" + std::to_string(tmp_counter_++);
    }
    {
        std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error("cannot write cache file '" + tmp_path + "'");
        }
        out << doc.dump(2) << '\n';
    }
    std::filesystem::rename(tmp_path, final_path);
}

LlmExchange LlmClient::complete(const std::string& prompt) {
    const std::string key = credential();
    LlmExchange ex;
    ex.request_hash = request_hash(settings_, prompt);
    if (load_cached(ex.request_hash, ex)) {
        return ex;
    }
    ex.prompt = prompt;
    ex.model = settings_.model;

    const nlohmann::json body = {
        {"model", settings_.model},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
        {"temperature", settings_.temperature},
        {"max_tokens", settings_.max_tokens}};
    HttpRequest request{settings_.base_url,
                        settings_.path,
                        {{"Authorization", "Bearer " + key}},
                        body.dump()};

    std::string last_error;
    int last_status = 0;
    for (int attempt = 0; attempt <= settings_.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(settings_.backoff * (1LL << (attempt - 1)));
        }
        HttpResponse response;
        try {
            response = transport_->post(request);
        } catch (const TransportError& e) {
            last_error = e.what();
            last_status = e.status();
            continue;
        }
        if (response.status < 200 || response.status >= 300) {
            last_status = response.status;
            last_error = "HTTP " + std::to_string(response.status) + ": " + response.body.substr(0, 200);
            if (!retryable(response.status)) {
                throw TransportError(last_error, response.status);
            }
            continue;
        }
        try {
            const auto doc = nlohmann::json::parse(response.body);
            ex.raw = doc.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw BackendError(std::string("unexpected completion payload: ") + e.what(),
                               response.body);
        }
        ex.retries = attempt;
        ex.timestamp = utc_timestamp();
        persist(ex);
        return ex;
    }
    throw TransportError("giving up after " + std::to_string(settings_.max_retries) +
                             " retries: " + last_error,
                         last_status);
}

std::vector<LlmExchange> LlmClient::complete_all(const std::vector<std::string>& prompts) {
    // Unique prompts in first-seen order.
    std::vector<std::size_t> slot(prompts.size());
    std::vector<const std::string*> unique;
    std::unordered_map<std::string_view, std::size_t> seen;
    for (std::size_t i = 0; i < prompts.size(); ++i) {
        auto [it, inserted] = seen.emplace(prompts[i], unique.size());
        if (inserted) {
            unique.push_back(&prompts[i]);
        }
        slot[i] = it->second;
    }

    credential();
    std::vector<LlmExchange> results(unique.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= unique.size()) {
                return;
            }
            {
                std::lock_guard lock(failure_mutex);
                if (failure) {
                    return;
                }
            }
            try {
                results[i] = complete(*unique[i]);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
            }
        }
    };
    const std::size_t n_threads = std::min(settings_.max_inflight, std::max<std::size_t>(unique.size(), 1));
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < n_threads; ++t) {
        threads.emplace_back(worker);
    }
    for (auto& t : threads) {
        t.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }

    std::vector<LlmExchange> out;
    out.reserve(prompts.size());
    for (std::size_t i = 0; i < prompts.size(); ++i) {
        out.push_back(results[slot[i]]);
    }
    return out;
}

void LlmClient::record_parse_status(LlmExchange& exchange, std::string status) {
    exchange.parse_status = std::move(status);
    persist(exchange);
}

// ---------------------------------------------------------------------------
// Parsing

std::vector<double> parse_distribution(std::string_view raw, const Question& question) {
    const std::size_t open = raw.find('{');
    const std::size_t close = raw.rfind('}');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
        throw ParseError("reply contains no JSON object", std::string(raw));
    }
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(raw.substr(open, close - open + 1));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("reply is not valid JSON: ") + e.what(), std::string(raw));
    }
    if (doc.is_object() && doc.size() == 1 && doc.begin().value().is_object()) {
        doc = doc.begin().value();
    }
    if (!doc.is_object()) {
        throw ParseError("reply is not a JSON object", std::string(raw));
    }

    std::vector<double> shares(question.size(), 0.0);
    std::vector<bool> present(question.size(), false);
    for (const auto& [label, node] : doc.items()) {
        const auto idx = question.find(label);
        if (!idx) {
            throw ParseError("reply has unknown option '" + label + "'", std::string(raw));
        }
        double v = 0.0;
        if (node.is_number()) {
            v = node.get<double>();
        } else if (node.is_string()) {
            std::string s = node.get<std::string>();
            if (!s.empty() && s.back() == '%') {
                s.pop_back();
            }
            try {
                v = csv::parse_double(s, "option '" + label + "'");
            } catch (const IngestError&) {
                throw ParseError("option '" + label + "' is not a number", std::string(raw));
            }
        } else {
            throw ParseError("option '" + label + "' is not a number", std::string(raw));
        }
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw ParseError("option '" + label + "' has a negative share", std::string(raw));
        }
        shares[*idx] = v;
        present[*idx] = true;
    }
    for (std::size_t i = 0; i < question.size(); ++i) {
        if (!present[i]) {
            throw ParseError("reply omits option '" + question.responses[i] + "'",
                             std::string(raw));
        }
    }
    double total = 0.0;
    for (double v : shares) {
        total += v;
    }
    const bool fraction = total >= 0.98 && total <= 1.02;
    const bool percent = total >= 98.0 && total <= 102.0;
    if (!fraction && !percent) {
        throw ParseError("shares total " + csv::format_exact(total) +
                             ", outside 1 +/- 0.02 (fractions) and 100 +/- 2 (percent)",
                         std::string(raw));
    }
    for (double& v : shares) {
        v /= total;
    }
    return shares;
}

} // namespace psynth
