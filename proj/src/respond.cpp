#include "psynth/respond.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "psynth/csv.hpp"
#include "psynth/error.hpp"
#include "psynth/random.hpp"

namespace psynth {

namespace {

// Stream ids keep attribute, response and profile draws independent of each other.
constexpr std::uint64_t kJointStream = 0x10;
constexpr std::uint64_t kAttributeStream = 0x1000;
constexpr std::uint64_t kResponseStream = 0x2000;
constexpr std::uint64_t kSamplingSalt = 0x73616d706c65ULL;

constexpr double kAttributeWeight = 0.8;
constexpr double kInteractionWeight = 0.5;

double signed_unit(std::uint64_t h) {
    return static_cast<double>(h >> 11) * 0x1.0p-52 - 1.0;
}

std::size_t inverse_cdf(std::span<const double> weights, double u) {
    double total = 0.0;
    for (double w : weights) {
        total += w;
    }
    const double target = u * total;
    double acc = 0.0;
    std::size_t last_positive = weights.size();
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] > 0.0) {
            last_positive = i;
        }
        acc += weights[i];
        if (target < acc && weights[i] > 0.0) {
            return i;
        }
    }
    return last_positive; // rounding at the top end
}

std::string provenance(const Population& pop, const IndividualRecord& rec) {
    return pop.backend + ":seed=" + std::to_string(pop.seed) + ":draw=" + std::to_string(rec.draw);
}

} // namespace

void BackendConfig::validate() const {
    if (kind == BackendKind::deterministic && !seed) {
        throw ConfigError("the deterministic backend needs a seed");
    }
    if (kind == BackendKind::llm && (llm.base_url.empty() || llm.model.empty())) {
        throw ConfigError("the llm backend needs an endpoint base URL and a model name");
    }
}

std::string BackendConfig::id() const {
    return kind == BackendKind::deterministic ? "deterministic" : "llm:" + llm.model;
}

std::string_view to_string(BackendKind kind) {
    return kind == BackendKind::deterministic ? "deterministic" : "llm";
}

BackendKind backend_kind_from_string(std::string_view name) {
    if (name == "deterministic") {
        return BackendKind::deterministic;
    }
    if (name == "llm") {
        return BackendKind::llm;
    }
    throw ConfigError("unknown backend '" + std::string(name) + "' (deterministic|llm)");
}

std::vector<double> deterministic_profile(const Persona& persona, const AttributeSchema& schema,
                                          const Question& question, std::uint64_t seed) {
    const std::size_t k = question.size();
    const std::uint64_t base = rng::combine(seed, rng::hash_label(question.id));

    std::uint64_t persona_key = 0;
    std::vector<std::uint64_t> labels(schema.attribute_count());
    for (std::size_t a = 0; a < schema.attribute_count(); ++a) {
        const auto& attr = schema.attribute(a);
        labels[a] = rng::combine(rng::hash_label(attr.name),
                                 rng::hash_label(attr.categories.at(persona.categories.at(a))));
        persona_key = rng::combine(persona_key, labels[a]);
    }

    double trend_position = 0.0;
    if (question.trend != 0.0) {
        const std::size_t g = schema.attribute_index(question.group_attribute);
        const std::size_t n = schema.attribute(g).size();
        trend_position = n > 1 ? 2.0 * static_cast<double>(persona.categories[g]) /
                                         static_cast<double>(n - 1) -
                                     1.0
                               : 0.0;
    }

    std::vector<double> logits(k, 0.0);
    for (std::size_t r = 0; r < k; ++r) {
        double z = 0.0;
        for (std::size_t a = 0; a < labels.size(); ++a) {
            z += kAttributeWeight * signed_unit(rng::bits(base, labels[a], r));
        }
        z += kInteractionWeight * signed_unit(rng::bits(base, persona_key, r));
        // Option 0 is the most favorable answer; +1 at the first option, -1 at the last.
        const double option_position = 1.0 - 2.0 * static_cast<double>(r) / static_cast<double>(k - 1);
        z += question.trend * trend_position * option_position;
        logits[r] = z;
    }
    const double top = *std::max_element(logits.begin(), logits.end());
    double total = 0.0;
    for (double& z : logits) {
        z = std::exp(z - top);
        total += z;
    }
    for (double& z : logits) {
        z /= total;
    }
    return logits;
}

ProfileSet generate_profiles(const PersonaTable& personas, const AttributeSchema& schema,
                             const Question& question, const BackendConfig& cfg,
                             const ProfileContext& ctx) {
    cfg.validate();
    if (personas.layout().radices() != schema.radices()) {
        throw BackendError("persona table does not match schema");
    }
    ProfileSet out(question.id, question.size(), personas.size());
    auto wanted = [&](std::size_t i) { return !ctx.skip_zero_density || personas.density(i) > 0.0; };

    if (cfg.kind == BackendKind::deterministic) {
        kernels::for_each_index(
            personas.size(),
            [&](std::size_t i) {
                if (!wanted(i)) {
                    return;
                }
                const auto p = deterministic_profile(personas.persona(i), schema, question, *cfg.seed);
                std::copy(p.begin(), p.end(), out.row(i).begin());
            },
            ctx.exec);
        return out;
    }

    if (ctx.client == nullptr) {
        throw ConfigError("the llm backend needs an LLM client");
    }
    const PromptTemplate tmpl = default_template(cfg.method);
    const GroupedDistribution* stats = tier_of(cfg.method) == Tier::guided ? ctx.stats : nullptr;
    std::vector<std::size_t> indices;
    std::vector<std::string> prompts;
    for (std::size_t i = 0; i < personas.size(); ++i) {
        if (!wanted(i)) {
            continue;
        }
        const Persona p = personas.persona(i);
        indices.push_back(i);
        prompts.push_back(render_prompt(tmpl, schema, &p, question, stats));
    }
    auto exchanges = ctx.client->complete_all(prompts);
    for (std::size_t j = 0; j < indices.size(); ++j) {
        auto& ex = exchanges[j];
        std::vector<double> shares;
        try {
            shares = parse_distribution(ex.raw, question);
        } catch (const ParseError& e) {
            if (!ex.from_cache || ex.parse_status != "error") {
                ctx.client->record_parse_status(ex, "error");
            }
            throw BackendError("persona " + std::to_string(indices[j]) + ", request " +
                                   ex.request_hash + ": " + e.what(),
                               ex.raw);
        }
        if (ex.parse_status != "ok") {
            ctx.client->record_parse_status(ex, "ok");
        }
        std::copy(shares.begin(), shares.end(), out.row(indices[j]).begin());
    }
    return out;
}

Population sample_individuals(std::size_t n, const DensitySource& source,
                              std::span<const ProfileSet> profiles, const BackendConfig& cfg,
                              Exec exec) {
    cfg.validate();
    if (n == 0) {
        throw ConfigError("sample size must be at least 1");
    }
    const std::uint64_t seed = rng::combine(cfg.seed.value_or(0), kSamplingSalt);

    const PersonaTable* const* table_ptr = std::get_if<const PersonaTable*>(&source);
    const PersonaTable* table = table_ptr ? *table_ptr : nullptr;
    const MarginalTargets* marginals =
        table ? nullptr : *std::get_if<const MarginalTargets*>(&source);
    if ((table == nullptr && marginals == nullptr)) {
        throw ConfigError("sample_individuals needs a density source");
    }

    std::vector<std::size_t> radices;
    if (table) {
        radices = table->layout().radices();
    } else {
        for (std::size_t k = 0; k < marginals->attribute_count(); ++k) {
            if (!marginals->has(k)) {
                throw ConfigError("independent sampling needs a marginal for every attribute");
            }
            radices.push_back(marginals->shares(k).size());
        }
    }
    const kernels::Layout layout(radices);
    for (const auto& ps : profiles) {
        if (ps.size() != layout.size()) {
            throw BackendError("profile set '" + ps.question + "' does not cover the persona grid");
        }
    }

    // Cumulative persona weights for joint sampling.
    std::vector<double> cdf;
    if (table) {
        cdf.resize(table->size());
        double acc = 0.0;
        for (std::size_t i = 0; i < table->size(); ++i) {
            acc += table->density(i);
            cdf[i] = acc;
        }
        if (!(acc > 0.0)) {
            throw ConfigError("persona table has no mass to sample from");
        }
    }

    Population pop;
    pop.backend = cfg.id();
    pop.seed = cfg.seed.value_or(0);
    for (const auto& ps : profiles) {
        pop.questions.push_back(ps.question);
    }
    pop.records.resize(n);

    std::vector<char> missing(n, 0);
    kernels::for_each_index(
        n,
        [&](std::size_t i) {
            IndividualRecord& rec = pop.records[i];
            rec.draw = i;
            std::size_t persona = 0;
            if (table) {
                const double u = rng::uniform(seed, kJointStream, i) * cdf.back();
                auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
                persona = std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()),
                                                cdf.size() - 1);
                // upper_bound skips zero-density personas, since their cdf equals the previous one.
                rec.categories = layout.decode(persona);
            } else {
                rec.categories.resize(radices.size());
                for (std::size_t k = 0; k < radices.size(); ++k) {
                    rec.categories[k] = inverse_cdf(marginals->shares(k),
                                                    rng::uniform(seed, kAttributeStream + k, i));
                }
                persona = layout.encode(rec.categories);
            }
            rec.responses.resize(profiles.size());
            for (std::size_t q = 0; q < profiles.size(); ++q) {
                const auto row = profiles[q].row(persona);
                double total = 0.0;
                for (double p : row) {
                    total += p;
                }
                if (!(total > 0.0)) {
                    missing[i] = 1;
                    return;
                }
                rec.responses[q] = inverse_cdf(row, rng::uniform(seed, kResponseStream + q, i));
            }
        },
        exec);

    for (std::size_t i = 0; i < n; ++i) {
        if (missing[i]) {
            throw BackendError("no profile for the persona sampled by draw " + std::to_string(i));
        }
    }
    return pop;
}

std::string export_individuals(const Population& population, const AttributeSchema& schema) {
    std::vector<const Question*> questions;
    std::vector<std::string> fields;
    for (const auto& attr : schema.attributes()) {
        fields.push_back(attr.name);
    }
    for (const auto& id : population.questions) {
        questions.push_back(&schema.question(id));
        fields.push_back(id);
    }
    fields.push_back("provenance");
    std::string out = csv::join(fields) + "\n";
    for (const auto& rec : population.records) {
        fields.clear();
        for (std::size_t k = 0; k < schema.attribute_count(); ++k) {
            fields.push_back(schema.attribute(k).categories.at(rec.categories.at(k)));
        }
        for (std::size_t q = 0; q < questions.size(); ++q) {
            fields.push_back(questions[q]->responses.at(rec.responses.at(q)));
        }
        fields.push_back(provenance(population, rec));
        out += csv::join(fields);
        out += '\n';
    }
    return out;
}

Population import_individuals(std::string_view text, const AttributeSchema& schema) {
    const auto rows = csv::parse(text);
    const std::size_t n_attr = schema.attribute_count();
    if (rows.empty() || rows.front().fields.size() < n_attr + 1 ||
        rows.front().fields.back() != "provenance") {
        throw BackendError("individual table header does not match schema");
    }
    const auto& header = rows.front().fields;
    for (std::size_t k = 0; k < n_attr; ++k) {
        if (header[k] != schema.attribute(k).name) {
            throw BackendError("individual table column '" + header[k] + "' does not match schema");
        }
    }
    Population pop;
    std::vector<const Question*> questions;
    for (std::size_t j = n_attr; j + 1 < header.size(); ++j) {
        questions.push_back(&schema.question(header[j]));
        pop.questions.push_back(header[j]);
    }
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        const std::string tag = "line " + std::to_string(row.line);
        if (row.fields.size() != header.size()) {
            throw BackendError(tag + ": wrong column count");
        }
        IndividualRecord rec;
        for (std::size_t k = 0; k < n_attr; ++k) {
            auto c = schema.attribute(k).find(row.fields[k]);
            if (!c) {
                throw BackendError(tag + ": unknown category '" + row.fields[k] + "'");
            }
            rec.categories.push_back(*c);
        }
        for (std::size_t q = 0; q < questions.size(); ++q) {
            auto idx = questions[q]->find(row.fields[n_attr + q]);
            if (!idx) {
                throw BackendError(tag + ": unknown response '" + row.fields[n_attr + q] + "'");
            }
            rec.responses.push_back(*idx);
        }
        // provenance is "<backend>:seed=<seed>:draw=<i>"
        const std::string& prov = row.fields.back();
        const auto seed_pos = prov.find(":seed=");
        const auto draw_pos = prov.find(":draw=");
        if (seed_pos == std::string::npos || draw_pos == std::string::npos || draw_pos < seed_pos) {
            throw BackendError(tag + ": malformed provenance '" + prov + "'");
        }
        try {
            rec.draw = std::stoull(prov.substr(draw_pos + 6));
            if (r == 1) {
                pop.backend = prov.substr(0, seed_pos);
                pop.seed = std::stoull(prov.substr(seed_pos + 6, draw_pos - seed_pos - 6));
            }
        } catch (const std::logic_error&) {
            throw BackendError(tag + ": malformed provenance '" + prov + "'");
        }
        pop.records.push_back(std::move(rec));
    }
    return pop;
}

} // namespace psynth
