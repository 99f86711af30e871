#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "psynth/calibrate.hpp"
#include "psynth/evaluate.hpp"
#include "psynth/ingest.hpp"
#include "psynth/method.hpp"
#include "psynth/persona.hpp"
#include "psynth/respond.hpp"

namespace psynth {

struct PipelineInputs {
    const AttributeSchema* schema = nullptr;
    const BenchmarkData* benchmark = nullptr; ///< required for structured and guided tiers
    const MarginalTargets* prior = nullptr;   ///< naive-tier marginals; uniform when null
};

struct PipelineOptions {
    Method method = Method::naive;
    BackendConfig backend;
    std::size_t n = 10000; ///< individuals drawn by the non-persona methods
    CalibrationOptions calibration;
    ResponseMode response_mode = ResponseMode::per_group;
    LlmClient* client = nullptr;
};

struct RunResult {
    Method method = Method::naive;
    PersonaTable personas;
    std::vector<ProfileSet> profiles; ///< one per schema question
    std::optional<Population> population;
    std::optional<CalibrationReport> density_report;
    std::vector<std::pair<std::string, CalibrationReport>> response_reports;
    std::vector<std::string> log;
};

/// Runs one generation method end to end:
///   naive      prior marginals -> sample n individuals
///   structured prior seed -> raking onto benchmark marginals -> sample
///   guided     structured + response calibration -> sample
///   *-persona  the same density and profile steps, kept at persona level
/// Throws ConfigError when a tier needs a benchmark that is absent.
RunResult run_method(const PipelineInputs& inputs, const PipelineOptions& options);

/// Synthetic grouped responses of a run for one question (persona aggregation or
/// individual counting, depending on the method).
GroupedDistribution synthetic_distribution(const RunResult& run, const AttributeSchema& schema,
                                           const Question& question);

/// Shares of the group attribute in the synthetic data of a run.
std::vector<double> synthetic_group_weights(const RunResult& run, const AttributeSchema& schema,
                                            std::size_t group_index);

/// Metrics of `synth` against every benchmark question it covers. Real group weights
/// come from the benchmark marginal of each question's group attribute.
MetricReport evaluate_against(const std::string& label,
                              const std::vector<std::pair<GroupedDistribution, std::vector<double>>>& synth,
                              const BenchmarkData& benchmark, const AttributeSchema& schema);

} // namespace psynth
