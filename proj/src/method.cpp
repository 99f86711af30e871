#include "psynth/method.hpp"

#include <string>

#include "psynth/error.hpp"

namespace psynth {

std::string_view to_string(Method m) {
    switch (m) {
    case Method::naive:
        return "naive";
    case Method::structured:
        return "structured";
    case Method::guided:
        return "guided";
    case Method::naive_persona:
        return "naive-persona";
    case Method::structured_persona:
        return "structured-persona";
    case Method::guided_persona:
        return "guided-persona";
    }
    return "?";
}

std::string_view to_string(Tier t) {
    switch (t) {
    case Tier::naive:
        return "naive";
    case Tier::structured:
        return "structured";
    case Tier::guided:
        return "guided";
    }
    return "?";
}

std::string_view display_name(Method m) {
    switch (m) {
    case Method::naive:
        return "Naive AI Survey";
    case Method::structured:
        return "Structured AI Survey";
    case Method::guided:
        return "Guided AI Survey";
    case Method::naive_persona:
        return "Naive Persona-based AI Survey";
    case Method::structured_persona:
        return "Structured Persona-based AI Survey";
    case Method::guided_persona:
        return "Guided Persona-based AI Survey";
    }
    return "?";
}

Method method_from_string(std::string_view name) {
    for (Method m : kAllMethods) {
        if (to_string(m) == name) {
            return m;
        }
    }
    throw ConfigError("unknown method '" + std::string(name) +
                      "' (naive|structured|guided|naive-persona|structured-persona|guided-persona)");
}

} // namespace psynth
