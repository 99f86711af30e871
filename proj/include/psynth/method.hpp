#pragma once

#include <array>
#include <string_view>

namespace psynth {

enum class Tier { naive, structured, guided };

/// The six generation methods: three tiers, each individual-level or persona-based.
enum class Method {
    naive,
    structured,
    guided,
    naive_persona,
    structured_persona,
    guided_persona,
};

inline constexpr std::array<Method, 6> kAllMethods = {
    Method::naive,         Method::structured,         Method::guided,
    Method::naive_persona, Method::structured_persona, Method::guided_persona,
};

constexpr Tier tier_of(Method m) noexcept {
    switch (m) {
    case Method::naive:
    case Method::naive_persona:
        return Tier::naive;
    case Method::structured:
    case Method::structured_persona:
        return Tier::structured;
    default:
        return Tier::guided;
    }
}

constexpr bool is_persona_based(Method m) noexcept {
    return m == Method::naive_persona || m == Method::structured_persona ||
           m == Method::guided_persona;
}

std::string_view to_string(Method m);
std::string_view to_string(Tier t);
/// Display name used in reports, e.g. "Guided Persona-based AI Survey".
std::string_view display_name(Method m);
/// Accepts the CLI spellings: naive, structured, guided, naive-persona, ...
Method method_from_string(std::string_view name);

} // namespace psynth
