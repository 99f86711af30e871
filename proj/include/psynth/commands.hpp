#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "psynth/calibrate.hpp"
#include "psynth/evaluate.hpp"
#include "psynth/ingest.hpp"
#include "psynth/llmclient.hpp"
#include "psynth/method.hpp"
#include "psynth/respond.hpp"

namespace psynth {

/// Names the bundled synthetic benchmark wherever a benchmark path is accepted.
inline constexpr const char* kBundledFixture = "@fixture";

/// Everything that determines a run's outputs.
struct RunManifest {
    Method method = Method::naive;
    std::string schema_path;    ///< empty: bundled default schema
    std::string benchmark_path; ///< empty: none; "@fixture": bundled fixture
    std::string prior_path;     ///< empty: bundled naive prior
    BackendConfig backend;
    std::size_t n = 10000;
    std::string out_dir;
    std::string tool_version;
    std::map<std::string, std::string> input_hashes; ///< input name -> SHA-256
    ResponseMode response_mode = ResponseMode::per_group;
    CalibrationOptions calibration;
    MergeStrategy merge = MergeStrategy::argmax;

    nlohmann::json to_json() const;
    static RunManifest from_json(const nlohmann::json& doc);
};

std::string tool_version();

AttributeSchema load_schema_source(const std::string& path);
BenchmarkData load_benchmark_source(const std::string& path, const AttributeSchema& schema,
                                    MergeStrategy merge);

/// Runs the manifest's method and writes into out_dir:
///   manifest.json, log.txt, calibration.json, calibration.txt,
///   personas.csv and profiles_<question>.csv (persona methods) or
///   individuals.csv (individual methods).
/// Returns the text calibration report. `transport` overrides the HTTP transport of
/// the llm backend (tests pass a mock).
std::string cmd_generate(RunManifest manifest, std::shared_ptr<Transport> transport = nullptr);

/// Reads a run directory, compares it with the benchmark (override, else the manifest's)
/// and writes metrics.json, metrics.csv and plot_<question>.svg into the run directory.
MetricReport cmd_evaluate(const std::string& run_dir, const std::string& benchmark_override = {});

struct CompareOptions {
    std::string schema_path;
    std::string benchmark_path = kBundledFixture;
    std::string prior_path;
    std::uint64_t seed = 7;
    std::size_t n = 10000;
    std::string out_dir;
    ResponseMode response_mode = ResponseMode::per_group;
    CalibrationOptions calibration;
};

/// Runs all six methods with the deterministic backend into out_dir/<method>/, evaluates
/// each, and writes summary.csv, summary.json and plot_<question>.svg (every method as a
/// subplot) into out_dir. Returns the reports in method order.
std::vector<MetricReport> cmd_compare(const CompareOptions& options);

/// File-name-safe form of a question id.
std::string file_stem(const std::string& id);

} // namespace psynth
