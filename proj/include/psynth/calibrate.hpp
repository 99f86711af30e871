#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "psynth/ingest.hpp"
#include "psynth/persona.hpp"
#include "psynth/profile.hpp"

namespace psynth {

struct CalibrationOptions {
    double tolerance = 1e-6;          ///< max absolute deviation per marginal or response cell
    std::size_t max_iterations = 1000;
    /// Seed density given to structurally empty categories that a target needs.
    /// 0 keeps such targets an error.
    double zero_floor = 0.0;
    Exec exec = Exec::parallel;

    /// Throws ConfigError.
    void validate() const;
};

struct CalibrationReport {
    /// Number of convergence checks performed. Every check except the last is followed
    /// by one full raking cycle, so a seed that already fits reports 1.
    std::size_t iterations = 0;
    double max_deviation = 0.0;
    bool converged = false;
    /// Deviation per check; one column per attribute (fit_densities_to_marginals, 0 for
    /// attributes without a target) or a single column (fit_responses_to_benchmark).
    std::vector<std::vector<double>> trace;

    nlohmann::json to_json() const;
    std::string to_text() const;
};

/// Cyclic raking (iterative proportional fitting) of persona densities onto the
/// one-dimensional attribute marginals. Attributes without a target are left free.
/// `schema`, when given, is used only to name categories in error messages.
std::pair<PersonaTable, CalibrationReport>
fit_densities_to_marginals(const PersonaTable& table, const MarginalTargets& targets,
                           const CalibrationOptions& opts = {},
                           const AttributeSchema* schema = nullptr);

enum class ResponseMode {
    per_group, ///< match every (group, response) cell of the target
    overall,   ///< match only the population-wide response shares
};

struct ResponseFit {
    ProfileSet profiles;
    CalibrationReport report;
};

/// Alternating multiplicative scaling of per-persona response profiles until the
/// density-weighted group aggregates match `target`. Groups absent from the target
/// are left untouched. Every returned profile is a distribution whether or not the
/// fit converged.
ResponseFit fit_responses_to_benchmark(const ProfileSet& profiles, const PersonaTable& table,
                                       const GroupedDistribution& target,
                                       const CalibrationOptions& opts = {},
                                       ResponseMode mode = ResponseMode::per_group);

std::string_view to_string(ResponseMode mode);
ResponseMode response_mode_from_string(std::string_view name);

} // namespace psynth
