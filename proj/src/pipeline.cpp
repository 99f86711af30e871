#include "psynth/pipeline.hpp"

#include <fmt/format.h>

#include "psynth/error.hpp"

namespace psynth {

namespace {

PersonaTable seed_densities(const AttributeSchema& schema, const MarginalTargets* prior,
                            Exec exec) {
    std::vector<std::vector<double>> marginals;
    for (std::size_t k = 0; k < schema.attribute_count(); ++k) {
        const std::size_t n = schema.attribute(k).size();
        if (prior != nullptr && k < prior->attribute_count() && prior->has(k)) {
            marginals.push_back(prior->shares(k));
        } else {
            marginals.emplace_back(n, 1.0 / static_cast<double>(n));
        }
    }
    return density_from_conditionals(enumerate_personas(schema),
                                     ConditionalTable::independent(marginals), exec);
}

} // namespace

RunResult run_method(const PipelineInputs& inputs, const PipelineOptions& options) {
    if (inputs.schema == nullptr) {
        throw ConfigError("pipeline needs a schema");
    }
    const AttributeSchema& schema = *inputs.schema;
    const Tier tier = tier_of(options.method);
    const bool persona_based = is_persona_based(options.method);
    const Exec exec = options.calibration.exec;
    options.backend.validate();
    if (tier != Tier::naive && inputs.benchmark == nullptr) {
        throw ConfigError(std::string("method '") + std::string(to_string(options.method)) +
                          "' needs a benchmark (--benchmark)");
    }

    RunResult run;
    run.method = options.method;
    run.log.push_back(fmt::format("method {} ({})", to_string(options.method),
                                  display_name(options.method)));

    run.personas = seed_densities(schema, inputs.prior, exec);
    run.log.push_back(fmt::format("enumerated {} personas; seed densities from {}",
                                  run.personas.size(), inputs.prior ? "naive prior" : "uniform"));

    if (tier != Tier::naive) {
        auto [fitted, report] = fit_densities_to_marginals(run.personas, inputs.benchmark->marginals,
                                                           options.calibration, &schema);
        run.log.push_back(fmt::format("density raking: {} checks, max deviation {:.3e}, {}",
                                      report.iterations, report.max_deviation,
                                      report.converged ? "converged" : "NOT converged"));
        run.personas = std::move(fitted);
        run.density_report = std::move(report);
    }

    PipelineOptions local = options;
    local.backend.method = options.method;
    for (const auto& question : schema.questions()) {
        const GroupedDistribution* target =
            inputs.benchmark ? inputs.benchmark->find_response(question.id) : nullptr;
        ProfileContext ctx;
        ctx.client = options.client;
        ctx.stats = target;
        ctx.skip_zero_density = options.backend.kind == BackendKind::llm;
        ctx.exec = exec;
        ProfileSet profiles = generate_profiles(run.personas, schema, question, local.backend, ctx);
        run.log.push_back(fmt::format("profiles for '{}' from backend {}", question.id,
                                      local.backend.id()));

        if (tier == Tier::guided && target != nullptr) {
            auto fit = fit_responses_to_benchmark(profiles, run.personas, *target,
                                                  options.calibration, options.response_mode);
            run.log.push_back(fmt::format("response calibration '{}' ({}): {} checks, max "
                                          "deviation {:.3e}, {}",
                                          question.id, to_string(options.response_mode),
                                          fit.report.iterations, fit.report.max_deviation,
                                          fit.report.converged ? "converged" : "NOT converged"));
            profiles = std::move(fit.profiles);
            run.response_reports.emplace_back(question.id, std::move(fit.report));
        } else if (tier == Tier::guided) {
            run.log.push_back(fmt::format("no benchmark responses for '{}'; left uncalibrated",
                                          question.id));
        }
        run.profiles.push_back(std::move(profiles));
    }

    if (!persona_based) {
        if (tier == Tier::naive) {
            MarginalTargets marginals(schema.attribute_count());
            for (std::size_t k = 0; k < schema.attribute_count(); ++k) {
                marginals.set(k, kernels::marginal(run.personas.densities(), run.personas.layout(),
                                                   k, Exec::serial));
            }
            run.population = sample_individuals(options.n, &marginals, run.profiles, options.backend, exec);
            run.log.push_back(fmt::format("sampled {} individuals independently from marginals",
                                          options.n));
        } else {
            run.population =
                sample_individuals(options.n, &run.personas, run.profiles, options.backend, exec);
            run.log.push_back(fmt::format("sampled {} individuals jointly from persona densities",
                                          options.n));
        }
    }
    return run;
}

GroupedDistribution synthetic_distribution(const RunResult& run, const AttributeSchema& schema,
                                           const Question& question) {
    if (run.population) {
        return aggregate_individuals(*run.population, schema, question, question.group_attribute);
    }
    for (const auto& ps : run.profiles) {
        if (ps.question == question.id) {
            return aggregate_personas(run.personas, ps, schema, question.group_attribute);
        }
    }
    throw EvaluationError("run has no profiles for '" + question.id + "'");
}

std::vector<double> synthetic_group_weights(const RunResult& run, const AttributeSchema& schema,
                                            std::size_t group_index) {
    if (run.population) {
        return group_weights(*run.population, group_index, schema.attribute(group_index).size());
    }
    return group_weights(run.personas, group_index);
}

MetricReport evaluate_against(const std::string& label,
                              const std::vector<std::pair<GroupedDistribution, std::vector<double>>>& synth,
                              const BenchmarkData& benchmark, const AttributeSchema& schema) {
    MetricReport report;
    report.method = label;
    for (const auto& [dist, synth_weights] : synth) {
        const GroupedDistribution* real = nullptr;
        for (const auto& candidate : benchmark.responses) {
            if (candidate.question == dist.question && candidate.group_index == dist.group_index) {
                real = &candidate;
            }
        }
        if (real == nullptr) {
            continue;
        }
        if (!benchmark.marginals.has(real->group_index)) {
            throw EvaluationError("benchmark has no marginal for '" +
                                  schema.attribute(real->group_index).name +
                                  "', needed to weight groups");
        }
        // Compare on the benchmark's groups; real weights renormalized over them.
        GroupedDistribution matched = dist;
        matched.groups.clear();
        std::vector<double> weights(benchmark.marginals.shares(real->group_index).size(), 0.0);
        double covered = 0.0;
        for (const auto& row : real->groups) {
            const GroupRow* s = dist.find(row.category);
            if (s == nullptr) {
                throw EvaluationError("synthetic data has no '" +
                                      schema.attribute(real->group_index).categories[row.category] +
                                      "' group for '" + real->question + "'");
            }
            matched.groups.push_back(*s);
            weights[row.category] = benchmark.marginals.shares(real->group_index)[row.category];
            covered += weights[row.category];
        }
        if (!(covered > 0.0)) {
            throw EvaluationError("benchmark groups of '" + real->question + "' carry no weight");
        }
        for (double& w : weights) {
            w /= covered;
        }
        const auto joint = joint_distribution(dist, synth_weights);
        report.questions.push_back(full_report(matched, *real, weights, joint));
    }
    if (report.questions.empty()) {
        throw EvaluationError("no synthetic question matches the benchmark");
    }
    pool(report);
    return report;
}

} // namespace psynth
