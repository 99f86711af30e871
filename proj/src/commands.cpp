#include "psynth/commands.hpp"

#include <filesystem>
#include <sstream>

#include <fmt/format.h>

#include "psynth/bundled.hpp"
#include "psynth/csv.hpp"
#include "psynth/digest.hpp"
#include "psynth/error.hpp"
#include "psynth/persona.hpp"
#include "psynth/pipeline.hpp"
#include "psynth/plot.hpp"
#include "psynth/profile.hpp"

#ifndef PSYNTH_VERSION
#define PSYNTH_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;

namespace psynth {

namespace {

std::string schema_text(const std::string& path) {
    return path.empty() ? std::string(bundled::default_schema_json()) : csv::read_file(path);
}

std::string benchmark_text(const std::string& path) {
    return path == kBundledFixture ? std::string(bundled::benchmark_fixture_csv())
                                   : csv::read_file(path);
}

std::string prior_text(const std::string& path) {
    return path.empty() ? std::string(bundled::naive_prior_csv()) : csv::read_file(path);
}

void write(const fs::path& path, std::string_view contents) {
    csv::write_file_atomic(path.string(), contents);
}

std::string report_text(const RunResult& run) {
    std::ostringstream out;
    if (run.density_report) {
        out << "[density raking]\n" << run.density_report->to_text();
    }
    for (const auto& [qid, report] : run.response_reports) {
        out << "[response calibration: " << qid << "]\n" << report.to_text();
    }
    if (!run.density_report && run.response_reports.empty()) {
        out << "no calibration for this method\n";
    }
    return out.str();
}

struct LoadedRun {
    RunManifest manifest;
    AttributeSchema schema;
    RunResult run;
};

LoadedRun load_run(const std::string& run_dir) {
    const fs::path dir(run_dir);
    const fs::path manifest_path = dir / "manifest.json";
    if (!fs::exists(manifest_path)) {
        throw ConfigError("run directory '" + run_dir + "' is missing manifest.json");
    }
    LoadedRun loaded;
    try {
        loaded.manifest = RunManifest::from_json(nlohmann::json::parse(csv::read_file(manifest_path.string())));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed manifest.json: ") + e.what());
    }
    const std::string stext = schema_text(loaded.manifest.schema_path);
    if (auto it = loaded.manifest.input_hashes.find("schema");
        it != loaded.manifest.input_hashes.end() && it->second != sha256_hex(stext)) {
        throw ConfigError("schema '" + loaded.manifest.schema_path +
                          "' changed since the run was generated");
    }
    loaded.schema = load_schema_text(stext);

    const bool persona = is_persona_based(loaded.manifest.method);
    std::vector<std::string> needed;
    if (persona) {
        needed.push_back("personas.csv");
        for (const auto& q : loaded.schema.questions()) {
            needed.push_back("profiles_" + file_stem(q.id) + ".csv");
        }
    } else {
        needed.push_back("individuals.csv");
    }
    std::vector<std::string> absent;
    for (const auto& name : needed) {
        if (!fs::exists(dir / name)) {
            absent.push_back(name);
        }
    }
    if (!absent.empty()) {
        std::string list;
        for (const auto& name : absent) {
            list += (list.empty() ? "" : ", ") + name;
        }
        throw ConfigError("run directory '" + run_dir + "' is missing: " + list);
    }

    loaded.run.method = loaded.manifest.method;
    if (persona) {
        loaded.run.personas =
            import_persona_table(csv::read_file((dir / "personas.csv").string()), loaded.schema);
        for (const auto& q : loaded.schema.questions()) {
            loaded.run.profiles.push_back(import_profiles(
                csv::read_file((dir / ("profiles_" + file_stem(q.id) + ".csv")).string()), q,
                loaded.schema));
        }
    } else {
        loaded.run.population =
            import_individuals(csv::read_file((dir / "individuals.csv").string()), loaded.schema);
    }
    return loaded;
}

std::vector<std::pair<GroupedDistribution, std::vector<double>>>
synthetic_by_question(const RunResult& run, const AttributeSchema& schema) {
    std::vector<std::pair<GroupedDistribution, std::vector<double>>> out;
    for (const auto& q : schema.questions()) {
        const std::size_t g = schema.attribute_index(q.group_attribute);
        out.emplace_back(synthetic_distribution(run, schema, q), synthetic_group_weights(run, schema, g));
    }
    return out;
}

void write_metrics(const fs::path& dir, const std::vector<MetricReport>& reports) {
    nlohmann::json doc = nlohmann::json::array();
    std::string table = MetricReport::csv_header() + "\n";
    for (const auto& r : reports) {
        doc.push_back(r.to_json());
        table += r.csv_row() + "\n";
    }
    const bool single = reports.size() == 1;
    write(dir / (single ? "metrics.json" : "summary.json"), (single ? doc[0] : doc).dump(2) + "\n");
    write(dir / (single ? "metrics.csv" : "summary.csv"), table);
}

} // namespace

std::string file_stem(const std::string& id) {
    std::string out;
    for (char c : id) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                        c == '-' || c == '_';
        out.push_back(ok ? c : '_');
    }
    return out;
}

std::string tool_version() { return PSYNTH_VERSION; }

nlohmann::json RunManifest::to_json() const {
    nlohmann::json backend_doc = {{"kind", to_string(backend.kind)}};
    if (backend.seed) {
        backend_doc["seed"] = *backend.seed;
    }
    if (backend.kind == BackendKind::llm) {
        backend_doc["base_url"] = backend.llm.base_url;
        backend_doc["path"] = backend.llm.path;
        backend_doc["model"] = backend.llm.model;
        backend_doc["temperature"] = backend.llm.temperature;
        backend_doc["max_tokens"] = backend.llm.max_tokens;
        backend_doc["max_retries"] = backend.llm.max_retries;
        backend_doc["max_inflight"] = backend.llm.max_inflight;
        backend_doc["cache_dir"] = backend.llm.cache_dir;
    }
    return {{"method", to_string(method)},
            {"schema", schema_path},
            {"benchmark", benchmark_path},
            {"prior", prior_path},
            {"backend", backend_doc},
            {"n", n},
            {"out_dir", out_dir},
            {"tool_version", tool_version},
            {"input_hashes", input_hashes},
            {"response_mode", to_string(response_mode)},
            {"merge_strategy", to_string(merge)},
            {"calibration",
             {{"tolerance", calibration.tolerance},
              {"max_iterations", calibration.max_iterations},
              {"zero_floor", calibration.zero_floor}}}};
}

RunManifest RunManifest::from_json(const nlohmann::json& doc) {
    RunManifest m;
    m.method = method_from_string(doc.at("method").get<std::string>());
    m.schema_path = doc.value("schema", "");
    m.benchmark_path = doc.value("benchmark", "");
    m.prior_path = doc.value("prior", "");
    const auto& b = doc.at("backend");
    m.backend.kind = backend_kind_from_string(b.at("kind").get<std::string>());
    if (b.contains("seed")) {
        m.backend.seed = b.at("seed").get<std::uint64_t>();
    }
    m.backend.llm.base_url = b.value("base_url", m.backend.llm.base_url);
    m.backend.llm.path = b.value("path", m.backend.llm.path);
    m.backend.llm.model = b.value("model", m.backend.llm.model);
    m.backend.llm.temperature = b.value("temperature", m.backend.llm.temperature);
    m.backend.llm.max_tokens = b.value("max_tokens", m.backend.llm.max_tokens);
    m.backend.llm.max_retries = b.value("max_retries", m.backend.llm.max_retries);
    m.backend.llm.max_inflight = b.value("max_inflight", m.backend.llm.max_inflight);
    m.backend.llm.cache_dir = b.value("cache_dir", m.backend.llm.cache_dir);
    m.backend.method = m.method;
    m.n = doc.value("n", m.n);
    m.out_dir = doc.value("out_dir", "");
    m.tool_version = doc.value("tool_version", "");
    m.input_hashes = doc.value("input_hashes", std::map<std::string, std::string>{});
    m.response_mode = response_mode_from_string(doc.value("response_mode", "per-group"));
    m.merge = merge_strategy_from_string(doc.value("merge_strategy", "argmax"));
    if (doc.contains("calibration")) {
        const auto& c = doc.at("calibration");
        m.calibration.tolerance = c.value("tolerance", m.calibration.tolerance);
        m.calibration.max_iterations = c.value("max_iterations", m.calibration.max_iterations);
        m.calibration.zero_floor = c.value("zero_floor", m.calibration.zero_floor);
    }
    return m;
}

AttributeSchema load_schema_source(const std::string& path) {
    return path.empty() ? default_schema() : load_schema_file(path);
}

BenchmarkData load_benchmark_source(const std::string& path, const AttributeSchema& schema,
                                    MergeStrategy merge) {
    IngestOptions opts;
    opts.strategy = merge;
    return ingest_benchmark(benchmark_text(path), schema, opts);
}

std::string cmd_generate(RunManifest manifest, std::shared_ptr<Transport> transport) {
    if (manifest.out_dir.empty()) {
        throw ConfigError("generate needs an output directory (--out)");
    }
    manifest.backend.method = manifest.method;
    manifest.backend.validate();
    manifest.calibration.validate();
    if (tier_of(manifest.method) != Tier::naive && manifest.benchmark_path.empty()) {
        throw ConfigError(std::string("method '") + std::string(to_string(manifest.method)) +
                          "' needs a benchmark (--benchmark)");
    }

    const std::string stext = schema_text(manifest.schema_path);
    const AttributeSchema schema = load_schema_text(stext);
    const std::string ptext = prior_text(manifest.prior_path);
    IngestOptions ingest_opts;
    ingest_opts.strategy = manifest.merge;
    const BenchmarkData prior = ingest_benchmark(ptext, schema, ingest_opts);
    std::optional<BenchmarkData> benchmark;
    manifest.input_hashes.clear();
    manifest.input_hashes["schema"] = sha256_hex(stext);
    manifest.input_hashes["prior"] = sha256_hex(ptext);
    if (!manifest.benchmark_path.empty()) {
        const std::string btext = benchmark_text(manifest.benchmark_path);
        benchmark = ingest_benchmark(btext, schema, ingest_opts);
        manifest.input_hashes["benchmark"] = sha256_hex(btext);
    }
    manifest.tool_version = tool_version();

    std::unique_ptr<LlmClient> client;
    if (manifest.backend.kind == BackendKind::llm) {
        client = std::make_unique<LlmClient>(
            manifest.backend.llm, transport ? transport : std::make_shared<HttpTransport>());
    }

    PipelineInputs inputs{&schema, benchmark ? &*benchmark : nullptr, &prior.marginals};
    PipelineOptions opts;
    opts.method = manifest.method;
    opts.backend = manifest.backend;
    opts.n = manifest.n;
    opts.calibration = manifest.calibration;
    opts.response_mode = manifest.response_mode;
    opts.client = client.get();
    const RunResult run = run_method(inputs, opts);

    const fs::path dir(manifest.out_dir);
    fs::create_directories(dir);
    write(dir / "manifest.json", manifest.to_json().dump(2) + "\n");
    std::string log;
    for (const auto& line : run.log) {
        log += line + "\n";
    }
    write(dir / "log.txt", log);

    nlohmann::json calib = {{"density", nullptr}, {"responses", nlohmann::json::object()}};
    if (run.density_report) {
        calib["density"] = run.density_report->to_json();
    }
    for (const auto& [qid, report] : run.response_reports) {
        calib["responses"][qid] = report.to_json();
    }
    write(dir / "calibration.json", calib.dump(2) + "\n");
    const std::string text = report_text(run);
    write(dir / "calibration.txt", text);

    if (run.population) {
        write(dir / "individuals.csv", export_individuals(*run.population, schema));
    } else {
        write(dir / "personas.csv", export_persona_table(run.personas, schema));
        for (const auto& ps : run.profiles) {
            write(dir / ("profiles_" + file_stem(ps.question) + ".csv"),
                  export_profiles(ps, run.personas, schema));
        }
    }
    return text;
}

MetricReport cmd_evaluate(const std::string& run_dir, const std::string& benchmark_override) {
    const LoadedRun loaded = load_run(run_dir);
    const std::string bpath =
        benchmark_override.empty() ? loaded.manifest.benchmark_path : benchmark_override;
    if (bpath.empty()) {
        throw ConfigError("no benchmark to evaluate against; pass --benchmark");
    }
    const BenchmarkData benchmark = load_benchmark_source(bpath, loaded.schema, loaded.manifest.merge);
    const auto synth = synthetic_by_question(loaded.run, loaded.schema);
    MetricReport report = evaluate_against(std::string(display_name(loaded.manifest.method)), synth,
                                           benchmark, loaded.schema);

    const fs::path dir(run_dir);
    write_metrics(dir, {report});
    for (const auto& [dist, weights] : synth) {
        const GroupedDistribution* real = benchmark.find_response(dist.question);
        if (real == nullptr) {
            continue;
        }
        write(dir / ("plot_" + file_stem(dist.question) + ".svg"),
              render_comparison_svg(loaded.schema, loaded.schema.question(dist.question), *real,
                                    {{report.method, dist}}));
    }
    return report;
}

std::vector<MetricReport> cmd_compare(const CompareOptions& options) {
    if (options.out_dir.empty()) {
        throw ConfigError("compare needs an output directory (--out)");
    }
    std::vector<MetricReport> reports;
    std::map<std::string, std::vector<PlotPanel>> panels;
    for (Method m : kAllMethods) {
        RunManifest manifest;
        manifest.method = m;
        manifest.schema_path = options.schema_path;
        manifest.benchmark_path = options.benchmark_path;
        manifest.prior_path = options.prior_path;
        manifest.backend.kind = BackendKind::deterministic;
        manifest.backend.seed = options.seed;
        manifest.n = options.n;
        manifest.response_mode = options.response_mode;
        manifest.calibration = options.calibration;
        manifest.out_dir = (fs::path(options.out_dir) / std::string(to_string(m))).string();
        cmd_generate(manifest);
        reports.push_back(cmd_evaluate(manifest.out_dir));

        const LoadedRun loaded = load_run(manifest.out_dir);
        for (auto& [dist, weights] : synthetic_by_question(loaded.run, loaded.schema)) {
            panels[dist.question].push_back({std::string(display_name(m)), std::move(dist)});
        }
    }
    const fs::path dir(options.out_dir);
    write_metrics(dir, reports);

    const AttributeSchema schema = load_schema_source(options.schema_path);
    const BenchmarkData benchmark =
        load_benchmark_source(options.benchmark_path, schema, MergeStrategy::argmax);
    for (const auto& [qid, list] : panels) {
        if (const GroupedDistribution* real = benchmark.find_response(qid)) {
            write(dir / ("plot_" + file_stem(qid) + ".svg"),
                  render_comparison_svg(schema, schema.question(qid), *real, list));
        }
    }
    return reports;
}

} // namespace psynth
