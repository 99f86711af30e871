// persona-synth: generate, evaluate and compare synthetic survey populations.

#include <cstdlib>
#include <iostream>
#include <vector>
#include <string>

#include <CLI11.hpp>

#include "psynth/commands.hpp"
#include "psynth/error.hpp"

namespace {

const std::vector<std::string> kMethods = {"naive", "structured", "guided",
                                           "naive-persona", "structured-persona", "guided-persona"};

void add_calibration_flags(CLI::App* cmd, psynth::CalibrationOptions& c) {
    cmd->add_option("--tolerance", c.tolerance, "Max absolute deviation at convergence")
        ->capture_default_str();
    cmd->add_option("--max-iterations", c.max_iterations, "Raking iteration cap")->capture_default_str();
    cmd->add_option("--zero-floor", c.zero_floor, "Density substituted for structural zeros")
        ->capture_default_str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Synthetic survey populations from persona-based generation"};
    app.set_version_flag("--version", psynth::tool_version());
    app.require_subcommand(1);

    psynth::RunManifest gen;
    std::uint64_t gen_seed = 7;
    std::string method = "naive", backend = "deterministic", gen_mode = "per-group", merge = "argmax";
    auto* generate = app.add_subcommand("generate", "Run one method and write its artifacts");
    generate->add_option("--method", method, "Generation method")
        ->required()
        ->check(CLI::IsMember(kMethods));
    generate->add_option("--backend", backend, "Response backend")
        ->check(CLI::IsMember({"deterministic", "llm"}))
        ->capture_default_str();
    generate->add_option("--seed", gen_seed, "Seed for the deterministic backend and sampling")
        ->capture_default_str();
    generate->add_option("--n", gen.n, "Individuals drawn by non-persona methods")->capture_default_str();
    generate->add_option("--schema", gen.schema_path, "Schema JSON (default: bundled)");
    generate->add_option("--benchmark", gen.benchmark_path,
                         "Benchmark CSV, or @fixture for the bundled one");
    generate->add_option("--prior", gen.prior_path, "Naive prior CSV (default: bundled)");
    generate->add_option("--out", gen.out_dir, "Output directory")->required();
    generate->add_option("--cache-dir", gen.backend.llm.cache_dir, "LLM response cache directory");
    generate->add_option("--model", gen.backend.llm.model, "LLM model name")->capture_default_str();
    generate->add_option("--base-url", gen.backend.llm.base_url, "LLM endpoint base URL")
        ->capture_default_str();
    generate->add_option("--response-mode", gen_mode, "Response calibration mode")
        ->check(CLI::IsMember({"per-group", "overall"}))
        ->capture_default_str();
    generate->add_option("--merge", merge, "Handling of 'not specified' shares")
        ->check(CLI::IsMember({"argmax", "proportional"}))
        ->capture_default_str();
    add_calibration_flags(generate, gen.calibration);

    std::string eval_dir, eval_benchmark;
    auto* evaluate = app.add_subcommand("evaluate", "Score a run directory against a benchmark");
    evaluate->add_option("run_dir", eval_dir, "Directory written by generate")->required();
    evaluate->add_option("--benchmark", eval_benchmark,
                         "Benchmark CSV or @fixture (default: the run's benchmark)");

    psynth::CompareOptions cmp;
    std::string cmp_mode = "per-group";
    auto* compare = app.add_subcommand("compare", "Run and score all six methods");
    compare->add_option("--seed", cmp.seed, "Seed")->capture_default_str();
    compare->add_option("--n", cmp.n, "Individuals drawn by non-persona methods")->capture_default_str();
    compare->add_option("--schema", cmp.schema_path, "Schema JSON (default: bundled)");
    compare->add_option("--benchmark", cmp.benchmark_path, "Benchmark CSV or @fixture")
        ->capture_default_str();
    compare->add_option("--prior", cmp.prior_path, "Naive prior CSV (default: bundled)");
    compare->add_option("--out", cmp.out_dir, "Output directory")->required();
    compare->add_option("--response-mode", cmp_mode, "Response calibration mode")
        ->check(CLI::IsMember({"per-group", "overall"}))
        ->capture_default_str();
    add_calibration_flags(compare, cmp.calibration);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*generate) {
            gen.method = psynth::method_from_string(method);
            gen.backend.kind = psynth::backend_kind_from_string(backend);
            gen.backend.seed = gen_seed;
            gen.response_mode = psynth::response_mode_from_string(gen_mode);
            gen.merge = psynth::merge_strategy_from_string(merge);
            std::cout << psynth::cmd_generate(gen);
            std::cout << "wrote " << gen.out_dir << "\n";
        } else if (*evaluate) {
            const auto report = psynth::cmd_evaluate(eval_dir, eval_benchmark);
            std::cout << psynth::MetricReport::csv_header() << "\n" << report.csv_row() << "\n";
        } else if (*compare) {
            cmp.response_mode = psynth::response_mode_from_string(cmp_mode);
            const auto reports = psynth::cmd_compare(cmp);
            std::cout << psynth::MetricReport::csv_header() << "\n";
            for (const auto& r : reports) {
                std::cout << r.csv_row() << "\n";
            }
        }
    } catch (const psynth::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return EXIT_FAILURE;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return EXIT_FAILURE;
    }
    return EXIT_SUCCESS;
}
