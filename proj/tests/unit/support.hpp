#pragma once
// Shared helpers for the test binaries: random instances, brute-force references,
// a scripted mock transport and scratch directories.

#include <atomic>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "psynth/llmclient.hpp"
#include "psynth/persona.hpp"
#include "psynth/schema.hpp"

namespace testsupport {

inline psynth::AttributeSchema schema_with_sizes(const std::vector<std::size_t>& sizes,
                                                 std::vector<psynth::Question> questions = {}) {
    std::vector<psynth::Attribute> attrs;
    for (std::size_t a = 0; a < sizes.size(); ++a) {
        psynth::Attribute attr{"attr" + std::to_string(a), {}};
        for (std::size_t c = 0; c < sizes[a]; ++c) {
            attr.categories.push_back("c" + std::to_string(a) + "_" + std::to_string(c));
        }
        attrs.push_back(std::move(attr));
    }
    return psynth::AttributeSchema(std::move(attrs), std::move(questions));
}

inline psynth::Question question(std::string id, std::size_t k, std::string group) {
    psynth::Question q;
    q.id = std::move(id);
    q.text = "How much do you agree?";
    for (std::size_t r = 0; r < k; ++r) {
        q.responses.push_back("option " + std::to_string(r));
    }
    q.group_attribute = std::move(group);
    return q;
}

/// Random category counts with a product of at most `max_personas`.
inline std::vector<std::size_t> random_sizes(std::mt19937_64& rng, std::size_t max_attrs,
                                             std::size_t max_personas) {
    std::uniform_int_distribution<std::size_t> attr_count(1, max_attrs);
    const std::size_t n = attr_count(rng);
    std::vector<std::size_t> sizes;
    std::size_t product = 1;
    for (std::size_t a = 0; a < n; ++a) {
        const std::size_t cap = std::max<std::size_t>(1, max_personas / product);
        std::uniform_int_distribution<std::size_t> size(1, std::min<std::size_t>(cap, 6));
        sizes.push_back(size(rng));
        product *= sizes.back();
    }
    return sizes;
}

inline std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t k, double zero_rate = 0.0) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> v(k);
    double total = 0.0;
    for (auto& x : v) {
        x = u(rng) < zero_rate ? 0.0 : u(rng) + 1e-3;
        total += x;
    }
    if (total == 0.0) {
        v[0] = total = 1.0;
    }
    for (auto& x : v) {
        x /= total;
    }
    return v;
}

/// Each persona's density is the product of independent random factors; the marginals
/// of such a table are always feasible IPF targets for any positive seed.
inline std::vector<std::vector<double>> random_marginals(std::mt19937_64& rng,
                                                         const std::vector<std::size_t>& sizes) {
    std::vector<std::vector<double>> out;
    for (std::size_t k : sizes) {
        out.push_back(random_simplex(rng, k));
    }
    return out;
}

/// Brute-force per-category totals: decode every index by repeated division.
inline std::vector<double> brute_marginal(const std::vector<double>& density,
                                          const std::vector<std::size_t>& sizes, std::size_t attr) {
    std::vector<double> out(sizes[attr], 0.0);
    for (std::size_t i = 0; i < density.size(); ++i) {
        std::size_t rest = i;
        std::size_t cat = 0;
        for (std::size_t a = sizes.size(); a-- > 0;) {
            if (a == attr) {
                cat = rest % sizes[a];
            }
            rest /= sizes[a];
        }
        out[cat] += density[i];
    }
    return out;
}

/// Textbook IPF with no shared code: loop over attributes, rescale by target/current
/// per category, for a fixed number of sweeps.
inline std::vector<double> brute_ipf(std::vector<double> density, const std::vector<std::size_t>& sizes,
                                     const std::vector<std::vector<double>>& targets, int sweeps) {
    for (int s = 0; s < sweeps; ++s) {
        for (std::size_t attr = 0; attr < sizes.size(); ++attr) {
            const auto current = brute_marginal(density, sizes, attr);
            for (std::size_t i = 0; i < density.size(); ++i) {
                std::size_t rest = i;
                std::size_t cat = 0;
                for (std::size_t a = sizes.size(); a-- > 0;) {
                    if (a == attr) {
                        cat = rest % sizes[a];
                    }
                    rest /= sizes[a];
                }
                density[i] = current[cat] > 0 ? density[i] * targets[attr][cat] / current[cat] : 0.0;
            }
        }
    }
    return density;
}

/// Transport that replays scripted responses and counts calls.
class MockTransport : public psynth::Transport {
public:
    explicit MockTransport(std::string content = {}) : content_(std::move(content)) {}

    void push(psynth::HttpResponse response) {
        std::lock_guard lock(mutex_);
        script_.push_back(std::move(response));
    }

    psynth::HttpResponse post(const psynth::HttpRequest& request) override {
        const int now = ++inflight_;
        int seen = max_inflight_.load();
        while (now > seen && !max_inflight_.compare_exchange_weak(seen, now)) {
        }
        ++calls_;
        psynth::HttpResponse out;
        {
            std::lock_guard lock(mutex_);
            last_body_ = request.body;
            if (!script_.empty()) {
                out = script_.front();
                script_.pop_front();
            } else {
                out = ok(content_);
            }
        }
        --inflight_;
        return out;
    }

    static psynth::HttpResponse ok(const std::string& content) {
        nlohmann::json body = {{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}};
        return {200, body.dump()};
    }

    int calls() const { return calls_.load(); }
    int max_inflight() const { return max_inflight_.load(); }
    std::string last_body() const {
        std::lock_guard lock(mutex_);
        return last_body_;
    }

private:
    std::string content_;
    std::deque<psynth::HttpResponse> script_;
    mutable std::mutex mutex_;
    std::string last_body_;
    std::atomic<int> calls_{0};
    std::atomic<int> inflight_{0};
    std::atomic<int> max_inflight_{0};
};

/// Fresh directory under the system temp dir, removed on destruction.
class ScratchDir {
public:
    explicit ScratchDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("psynth_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~ScratchDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::string str() const { return path_.string(); }

private:
    std::filesystem::path path_;
};

} // namespace testsupport
