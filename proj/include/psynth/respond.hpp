#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "psynth/ingest.hpp"
#include "psynth/llmclient.hpp"
#include "psynth/method.hpp"
#include "psynth/persona.hpp"
#include "psynth/profile.hpp"
#include "psynth/schema.hpp"

namespace psynth {

enum class BackendKind { deterministic, llm };

struct BackendConfig {
    BackendKind kind = BackendKind::deterministic;
    std::optional<std::uint64_t> seed;
    Method method = Method::naive;
    LlmSettings llm;

    /// Deterministic needs a seed; llm needs an endpoint and model. Throws ConfigError.
    void validate() const;
    /// e.g. "deterministic" or "llm:gpt-4o".
    std::string id() const;
};

std::string_view to_string(BackendKind kind);
BackendKind backend_kind_from_string(std::string_view name);

/// Deterministic stand-in for a language model: a pure function of the persona's
/// category labels, the question id and the seed. Per response option, hashed
/// per-attribute terms plus a whole-persona interaction term form logits, a trend term
/// (question.trend) favors earlier options as the group category index rises, and a
/// softmax turns the logits into a distribution.
std::vector<double> deterministic_profile(const Persona& persona, const AttributeSchema& schema,
                                          const Question& question, std::uint64_t seed);

struct ProfileContext {
    LlmClient* client = nullptr;                ///< required by the llm backend
    const GroupedDistribution* stats = nullptr; ///< embedded in guided prompts
    /// Only query personas with positive density; others get an all-zero row.
    bool skip_zero_density = false;
    Exec exec = Exec::parallel;
};

/// One profile per persona for `question`. LLM replies that cannot be parsed into a
/// valid distribution raise BackendError carrying the raw reply.
ProfileSet generate_profiles(const PersonaTable& personas, const AttributeSchema& schema,
                             const Question& question, const BackendConfig& cfg,
                             const ProfileContext& ctx = {});

struct IndividualRecord {
    std::vector<std::size_t> categories; ///< per schema attribute
    std::vector<std::size_t> responses;  ///< per sampled question
    std::uint64_t draw = 0;              ///< counter used for this individual's draws

    bool operator==(const IndividualRecord&) const = default;
};

struct Population {
    std::vector<std::string> questions; ///< question ids, aligned with record responses
    std::vector<IndividualRecord> records;
    std::string backend;
    std::uint64_t seed = 0;

    bool operator==(const Population&) const = default;
};

using DensitySource = std::variant<const PersonaTable*, const MarginalTargets*>;

/// Draws `n` individuals. Attributes come jointly from persona densities (inverse CDF in
/// lexicographic persona order) or independently from marginals; responses come from the
/// matching persona's profile. Draw i depends only on (seed, i).
/// Throws BackendError when a sampled persona has no profile.
Population sample_individuals(std::size_t n, const DensitySource& source,
                              std::span<const ProfileSet> profiles, const BackendConfig& cfg,
                              Exec exec = Exec::parallel);

/// Header: attribute names, question ids, provenance.
std::string export_individuals(const Population& population, const AttributeSchema& schema);
Population import_individuals(std::string_view text, const AttributeSchema& schema);

} // namespace psynth
