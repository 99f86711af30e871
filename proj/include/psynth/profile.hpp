#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "psynth/persona.hpp"
#include "psynth/schema.hpp"

namespace psynth {

/// Response probabilities R_i(P) for every persona of a table, for one question.
/// Stored row-major: persona i occupies values[i*K, (i+1)*K).
struct ProfileSet {
    std::string question;
    std::size_t responses = 0;
    std::vector<double> values;

    ProfileSet() = default;
    ProfileSet(std::string question_id, std::size_t response_count, std::size_t personas)
        : question(std::move(question_id)), responses(response_count),
          values(response_count * personas, 0.0) {}

    std::size_t size() const noexcept { return responses ? values.size() / responses : 0; }
    std::span<const double> row(std::size_t persona) const {
        return std::span<const double>(values).subspan(persona * responses, responses);
    }
    std::span<double> row(std::size_t persona) {
        return std::span<double>(values).subspan(persona * responses, responses);
    }

    /// Every row non-negative with unit sum within 1e-9; throws BackendError naming the row.
    void validate() const;

    bool operator==(const ProfileSet&) const = default;
};

/// Header: attribute names then response labels. One row per persona.
std::string export_profiles(const ProfileSet& profiles, const PersonaTable& table,
                            const AttributeSchema& schema);
ProfileSet import_profiles(std::string_view text, const Question& question,
                           const AttributeSchema& schema);

} // namespace psynth
