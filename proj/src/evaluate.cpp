#include "psynth/evaluate.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "psynth/error.hpp"

namespace psynth {

namespace {

void require_aligned(const GroupedDistribution& synth, const GroupedDistribution& real) {
    if (synth.groups.size() != real.groups.size()) {
        throw EvaluationError("'" + real.question + "': synthetic has " +
                              std::to_string(synth.groups.size()) + " groups, benchmark has " +
                              std::to_string(real.groups.size()));
    }
    for (std::size_t g = 0; g < real.groups.size(); ++g) {
        if (synth.groups[g].category != real.groups[g].category) {
            throw EvaluationError("'" + real.question + "': group sets differ");
        }
        if (synth.groups[g].shares.size() != real.groups[g].shares.size()) {
            throw EvaluationError("'" + real.question + "': response counts differ");
        }
    }
    if (real.groups.empty()) {
        throw EvaluationError("'" + real.question + "': nothing to compare");
    }
}

void require_weights(const GroupedDistribution& real, std::span<const double> weights) {
    double total = 0.0;
    for (const auto& row : real.groups) {
        if (row.category >= weights.size()) {
            throw EvaluationError("group weight missing for category " + std::to_string(row.category));
        }
        if (!(weights[row.category] >= 0.0)) {
            throw EvaluationError("negative group weight");
        }
        total += weights[row.category];
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw EvaluationError("group weights over the compared groups sum to " +
                              fmt::format("{}", total) + ", expected 1");
    }
}

GroupedDistribution normalized_groups(std::string question, const std::string& attribute,
                                      std::size_t attr_index, std::span<const double> sums,
                                      std::size_t groups, std::size_t k,
                                      const AttributeSchema& schema) {
    GroupedDistribution out;
    out.question = std::move(question);
    out.group_attribute = attribute;
    out.group_index = attr_index;
    for (std::size_t g = 0; g < groups; ++g) {
        double total = 0.0;
        for (std::size_t r = 0; r < k; ++r) {
            total += sums[g * k + r];
        }
        if (!(total > 0.0)) {
            out.warnings.push_back("group '" + schema.attribute(attr_index).categories[g] +
                                   "' has no mass and was omitted");
            continue;
        }
        GroupRow row{g, std::vector<double>(k)};
        for (std::size_t r = 0; r < k; ++r) {
            row.shares[r] = sums[g * k + r] / total;
        }
        out.groups.push_back(std::move(row));
    }
    return out;
}

} // namespace

GroupedDistribution aggregate_personas(const PersonaTable& table, const ProfileSet& profiles,
                                       const AttributeSchema& schema,
                                       std::string_view group_attribute, Exec exec) {
    const std::size_t attr = schema.attribute_index(group_attribute);
    if (table.layout().radices() != schema.radices()) {
        throw EvaluationError("persona table does not match schema");
    }
    if (profiles.size() != table.size()) {
        throw EvaluationError("profiles do not cover the persona table");
    }
    const std::size_t k = profiles.responses;
    for (std::size_t i = 0; i < table.size(); ++i) {
        if (table.density(i) > 0.0) {
            double total = 0.0;
            for (double p : profiles.row(i)) {
                total += p;
            }
            if (!(total > 0.0)) {
                throw EvaluationError("persona " + std::to_string(i) +
                                      " has positive density but no profile");
            }
        }
    }
    const auto sums =
        kernels::group_response_sums(table.densities(), profiles.values, k, table.layout(), attr, exec);
    return normalized_groups(profiles.question, std::string(group_attribute), attr, sums,
                             table.layout().radix(attr), k, schema);
}

GroupedDistribution aggregate_individuals(const Population& population,
                                          const AttributeSchema& schema, const Question& question,
                                          std::string_view group_attribute) {
    if (population.records.empty()) {
        throw EvaluationError("no individual records");
    }
    const auto q_it = std::find(population.questions.begin(), population.questions.end(), question.id);
    if (q_it == population.questions.end()) {
        throw EvaluationError("population has no responses for '" + question.id + "'");
    }
    const std::size_t q = static_cast<std::size_t>(q_it - population.questions.begin());
    const std::size_t attr = schema.attribute_index(group_attribute);
    const std::size_t groups = schema.attribute(attr).size();
    const std::size_t k = question.size();
    std::vector<double> counts(groups * k, 0.0);
    for (const auto& rec : population.records) {
        counts[rec.categories.at(attr) * k + rec.responses.at(q)] += 1.0;
    }
    return normalized_groups(question.id, std::string(group_attribute), attr, counts, groups, k,
                             schema);
}

std::vector<double> group_weights(const PersonaTable& table, std::size_t group_index) {
    return kernels::marginal(table.densities(), table.layout(), group_index, Exec::serial);
}

std::vector<double> group_weights(const Population& population, std::size_t group_index,
                                  std::size_t group_count) {
    std::vector<double> w(group_count, 0.0);
    for (const auto& rec : population.records) {
        w.at(rec.categories.at(group_index)) += 1.0;
    }
    for (double& v : w) {
        v /= static_cast<double>(population.records.size());
    }
    return w;
}

ErrorPair mae_rmse(const GroupedDistribution& synth, const GroupedDistribution& real) {
    require_aligned(synth, real);
    double abs_sum = 0.0;
    double sq_sum = 0.0;
    std::size_t cells = 0;
    for (std::size_t g = 0; g < real.groups.size(); ++g) {
        const auto& s = synth.groups[g].shares;
        const auto& r = real.groups[g].shares;
        for (std::size_t i = 0; i < r.size(); ++i) {
            const double d = 100.0 * (s[i] - r[i]);
            abs_sum += std::abs(d);
            sq_sum += d * d;
            ++cells;
        }
    }
    const double n = static_cast<double>(cells);
    return {abs_sum / n, std::sqrt(sq_sum / n)};
}

double entropy(std::span<const double> dist) {
    double h = 0.0;
    for (double p : dist) {
        if (p > 0.0) {
            h -= p * std::log2(p);
        }
    }
    return std::max(h, 0.0);
}

double js_distance(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) {
        throw EvaluationError("js_distance: support sizes differ");
    }
    double div = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double m = 0.5 * (p[i] + q[i]);
        if (p[i] > 0.0) {
            div += 0.5 * p[i] * std::log2(p[i] / m);
        }
        if (q[i] > 0.0) {
            div += 0.5 * q[i] * std::log2(q[i] / m);
        }
    }
    return std::sqrt(std::clamp(div, 0.0, 1.0));
}

double js_distance(const GroupedDistribution& synth, const GroupedDistribution& real,
                   std::span<const double> weights) {
    require_aligned(synth, real);
    require_weights(real, weights);
    double total = 0.0;
    for (std::size_t g = 0; g < real.groups.size(); ++g) {
        total += weights[real.groups[g].category] *
                 js_distance(synth.groups[g].shares, real.groups[g].shares);
    }
    return total;
}

double conditional_entropy(const GroupedDistribution& dist, std::span<const double> weights) {
    require_weights(dist, weights);
    double h = 0.0;
    for (const auto& row : dist.groups) {
        h += weights[row.category] * entropy(row.shares);
    }
    return h;
}

double conditional_entropy_gap(const GroupedDistribution& synth, const GroupedDistribution& real,
                               std::span<const double> weights) {
    require_aligned(synth, real);
    return std::abs(conditional_entropy(synth, weights) - conditional_entropy(real, weights));
}

std::vector<double> comonotone_coupling(std::span<const double> real, std::span<const double> synth) {
    if (real.size() != synth.size()) {
        throw EvaluationError("coupling needs two distributions over the same scale");
    }
    const std::size_t k = real.size();
    std::vector<double> table(k * k, 0.0);
    std::size_t i = 0;
    std::size_t j = 0;
    double left_r = k ? real[0] : 0.0;
    double left_s = k ? synth[0] : 0.0;
    while (i < k && j < k) {
        const double m = std::min(left_r, left_s);
        table[i * k + j] += m;
        left_r -= m;
        left_s -= m;
        // Advance whichever side is exhausted; both on an exact tie, which keeps identical
        // inputs on the diagonal.
        const bool next_i = left_r <= left_s;
        const bool next_j = left_s <= left_r;
        if (next_i && ++i < k) {
            left_r = real[i];
        }
        if (next_j && ++j < k) {
            left_s = synth[j];
        }
    }
    return table;
}

double cramers_v_from_table(std::span<const double> table, std::size_t rows, std::size_t cols) {
    if (table.size() != rows * cols) {
        throw EvaluationError("contingency table has the wrong size");
    }
    double total = 0.0;
    for (double v : table) {
        if (!(v >= 0.0)) {
            throw EvaluationError("contingency table has a negative cell");
        }
        total += v;
    }
    if (!(total > 0.0)) {
        throw EvaluationError("contingency table is empty");
    }
    std::vector<double> t(table.begin(), table.end());
    for (double& v : t) {
        v /= total;
    }
    std::vector<double> row_sum(rows, 0.0);
    std::vector<double> col_sum(cols, 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            row_sum[i] += t[i * cols + j];
            col_sum[j] += t[i * cols + j];
        }
    }
    const auto live_rows = static_cast<std::size_t>(
        std::count_if(row_sum.begin(), row_sum.end(), [](double v) { return v > 0.0; }));
    const auto live_cols = static_cast<std::size_t>(
        std::count_if(col_sum.begin(), col_sum.end(), [](double v) { return v > 0.0; }));
    const std::size_t dim = std::min(live_rows, live_cols);
    if (dim < 2) {
        return live_rows == live_cols ? 1.0 : 0.0;
    }
    // phi^2 = sum O^2 / E - 1; this form makes a diagonal table come out as exactly dim - 1.
    double phi2 = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            const double o = t[i * cols + j];
            if (o > 0.0) {
                phi2 += (o * o) / (row_sum[i] * col_sum[j]);
            }
        }
    }
    phi2 -= 1.0;
    return std::clamp(std::sqrt(std::max(phi2, 0.0) / static_cast<double>(dim - 1)), 0.0, 1.0);
}

double cramers_v(const GroupedDistribution& synth, const GroupedDistribution& real,
                 std::span<const double> weights) {
    require_aligned(synth, real);
    require_weights(real, weights);
    const std::size_t k = real.response_count();
    std::vector<double> table(k * k, 0.0);
    for (std::size_t g = 0; g < real.groups.size(); ++g) {
        const double w = weights[real.groups[g].category];
        const auto coupled = comonotone_coupling(real.groups[g].shares, synth.groups[g].shares);
        for (std::size_t c = 0; c < table.size(); ++c) {
            table[c] += w * coupled[c];
        }
    }
    return cramers_v_from_table(table, k, k);
}

std::vector<double> joint_distribution(const GroupedDistribution& dist,
                                       std::span<const double> weights) {
    std::vector<double> joint;
    double total = 0.0;
    for (const auto& row : dist.groups) {
        const double w = row.category < weights.size() ? weights[row.category] : 0.0;
        for (double p : row.shares) {
            joint.push_back(w * p);
            total += w * p;
        }
    }
    if (total > 0.0) {
        for (double& v : joint) {
            v /= total;
        }
    }
    return joint;
}

QuestionMetrics full_report(const GroupedDistribution& synth, const GroupedDistribution& real,
                            std::span<const double> weights, std::span<const double> joint_synth) {
    QuestionMetrics m;
    m.question = real.question;
    const auto err = mae_rmse(synth, real);
    m.mae = err.mae;
    m.rmse = err.rmse;
    m.js = js_distance(synth, real, weights);
    m.entropy = entropy(joint_synth);
    m.entropy_gap = conditional_entropy_gap(synth, real, weights);
    m.cramers_v = cramers_v(synth, real, weights);
    return m;
}

void pool(MetricReport& report) {
    QuestionMetrics p;
    p.question = "pooled";
    if (!report.questions.empty()) {
        const double n = static_cast<double>(report.questions.size());
        for (const auto& q : report.questions) {
            p.mae += q.mae / n;
            p.rmse += q.rmse / n;
            p.js += q.js / n;
            p.entropy += q.entropy / n;
            p.entropy_gap += q.entropy_gap / n;
            p.cramers_v += q.cramers_v / n;
        }
    }
    report.pooled = p;
}

namespace {

nlohmann::json metrics_json(const QuestionMetrics& m) {
    return {{"question", m.question},
            {"mae", m.mae},
            {"rmse", m.rmse},
            {"js_distance", m.js},
            {"entropy", m.entropy},
            {"conditional_entropy_gap", m.entropy_gap},
            {"cramers_v", m.cramers_v}};
}

} // namespace

nlohmann::json MetricReport::to_json() const {
    nlohmann::json doc;
    doc["method"] = method;
    doc["questions"] = nlohmann::json::array();
    for (const auto& q : questions) {
        doc["questions"].push_back(metrics_json(q));
    }
    doc["pooled"] = metrics_json(pooled);
    return doc;
}

std::string MetricReport::csv_header() {
    return "Survey Type,MAE,RMSE,JS Distance,Entropy,|Conditional Entropy|,Cramér's V";
}

std::string MetricReport::csv_row() const {
    return fmt::format("{},{:.4f},{:.4f},{:.6f},{:.4f},{:.6f},{:.4f}", method, pooled.mae,
                       pooled.rmse, pooled.js, pooled.entropy, pooled.entropy_gap, pooled.cramers_v);
}

} // namespace psynth
