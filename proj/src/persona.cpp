#include "psynth/persona.hpp"

#include <atomic>
#include <cmath>
#include <limits>

#include "psynth/csv.hpp"
#include "psynth/error.hpp"

namespace psynth {

namespace {

constexpr double kUnitSumTolerance = 1e-9;

void check_distribution(std::span<const double> probs, const std::string& context) {
    double total = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0)) {
            throw PersonaError(context + ": negative or NaN probability");
        }
        total += p;
    }
    if (std::abs(total - 1.0) > kUnitSumTolerance) {
        throw PersonaError(context + ": probabilities sum to " + csv::format_exact(total));
    }
}

} // namespace

PersonaTable::PersonaTable(kernels::Layout layout, std::vector<double> density)
    : layout_(std::move(layout)), density_(std::move(density)) {
    if (density_.size() != layout_.size()) {
        throw PersonaError("density count does not match the persona grid");
    }
}

ConditionalTable::ConditionalTable(std::vector<std::size_t> radices)
    : radices_(std::move(radices)), factors_(radices_.size()) {}

std::uint64_t ConditionalTable::prefix_code(std::size_t factor,
                                            std::span<const std::size_t> prefix) const {
    if (factor >= radices_.size()) {
        throw PersonaError("factor index out of range");
    }
    if (prefix.size() != factor) {
        throw PersonaError("factor " + std::to_string(factor) + " needs a prefix of length " +
                           std::to_string(factor));
    }
    std::uint64_t code = 0;
    for (std::size_t k = 0; k < factor; ++k) {
        if (prefix[k] >= radices_[k]) {
            throw PersonaError("prefix category out of range");
        }
        code = code * radices_[k] + prefix[k];
    }
    return code;
}

void ConditionalTable::set(std::size_t factor, std::span<const std::size_t> prefix,
                           std::vector<double> probs) {
    const auto code = prefix_code(factor, prefix);
    if (probs.size() != radices_[factor]) {
        throw PersonaError("factor " + std::to_string(factor) + " expects " +
                           std::to_string(radices_[factor]) + " probabilities");
    }
    check_distribution(probs, "factor " + std::to_string(factor));
    factors_[factor][code] = std::move(probs);
}

const std::vector<double>* ConditionalTable::find(std::size_t factor,
                                                  std::span<const std::size_t> prefix) const {
    return find_code(factor, prefix_code(factor, prefix));
}

const std::vector<double>* ConditionalTable::find_code(std::size_t factor,
                                                       std::uint64_t code) const {
    const auto& map = factors_.at(factor);
    auto it = map.find(code);
    return it == map.end() ? nullptr : &it->second;
}

ConditionalTable ConditionalTable::independent(const std::vector<std::vector<double>>& marginals) {
    std::vector<std::size_t> radices;
    for (const auto& m : marginals) {
        radices.push_back(m.size());
    }
    ConditionalTable table(radices);
    std::uint64_t prefixes = 1;
    for (std::size_t k = 0; k < marginals.size(); ++k) {
        check_distribution(marginals[k], "marginal " + std::to_string(k));
        for (std::uint64_t code = 0; code < prefixes; ++code) {
            table.factors_[k].emplace(code, marginals[k]);
        }
        prefixes *= radices[k];
    }
    return table;
}

PersonaTable enumerate_personas(const AttributeSchema& schema) {
    kernels::Layout layout(schema.radices());
    const std::size_t n = layout.size();
    return PersonaTable(std::move(layout), std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

PersonaTable density_from_conditionals(const PersonaTable& table, const ConditionalTable& cond,
                                       Exec exec) {
    const auto& layout = table.layout();
    if (cond.radices() != layout.radices()) {
        throw PersonaError("conditional table does not match the persona grid");
    }
    constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
    std::atomic<std::size_t> first_missing{kNone};
    std::vector<double> density(layout.size());

    kernels::for_each_index(
        layout.size(),
        [&](std::size_t i) {
            double p = 1.0;
            std::uint64_t code = 0;
            for (std::size_t k = 0; k < layout.attribute_count(); ++k) {
                if (p == 0.0) {
                    break;
                }
                const auto* probs = cond.find_code(k, code);
                const std::size_t c = layout.category(i, k);
                if (probs == nullptr) {
                    // Keep the smallest offending index so the error is order independent.
                    std::size_t seen = first_missing.load();
                    while (i < seen && !first_missing.compare_exchange_weak(seen, i)) {
                    }
                    p = 0.0;
                    break;
                }
                p *= (*probs)[c];
                code = code * layout.radix(k) + c;
            }
            density[i] = p;
        },
        exec);

    if (const std::size_t bad = first_missing.load(); bad != kNone) {
        const auto cats = layout.decode(bad);
        std::string tuple;
        for (std::size_t k = 0; k < cats.size(); ++k) {
            tuple += (k ? "," : "") + std::to_string(cats[k]);
        }
        throw PersonaError("missing conditional entry on the chain of persona (" + tuple +
                           ") whose prefix has positive probability");
    }
    const double total = kernels::sum(density, exec);
    if (!(total > 0.0)) {
        throw PersonaError("conditional table assigns zero mass to every persona");
    }
    kernels::scale(density, 1.0 / total, exec);
    return PersonaTable(layout, std::move(density));
}

std::string export_persona_table(const PersonaTable& table, const AttributeSchema& schema) {
    if (table.layout().radices() != schema.radices()) {
        throw PersonaError("persona table does not match schema");
    }
    std::vector<std::string> fields;
    for (const auto& attr : schema.attributes()) {
        fields.push_back(attr.name);
    }
    fields.push_back("density");
    std::string out = csv::join(fields) + "\n";
    for (std::size_t i = 0; i < table.size(); ++i) {
        fields.clear();
        for (std::size_t k = 0; k < schema.attribute_count(); ++k) {
            fields.push_back(schema.attribute(k).categories[table.category(i, k)]);
        }
        fields.push_back(csv::format_exact(table.density(i)));
        out += csv::join(fields);
        out += '\n';
    }
    return out;
}

PersonaTable import_persona_table(std::string_view text, const AttributeSchema& schema) {
    const auto rows = csv::parse(text);
    const std::size_t width = schema.attribute_count() + 1;
    if (rows.empty() || rows.front().fields.size() != width) {
        throw PersonaError("persona table header does not match schema");
    }
    for (std::size_t k = 0; k < schema.attribute_count(); ++k) {
        if (rows.front().fields[k] != schema.attribute(k).name) {
            throw PersonaError("persona table column " + std::to_string(k) + " is '" +
                               rows.front().fields[k] + "', expected '" +
                               schema.attribute(k).name + "'");
        }
    }
    kernels::Layout layout(schema.radices());
    if (rows.size() - 1 != layout.size()) {
        throw PersonaError("persona table has " + std::to_string(rows.size() - 1) +
                           " rows, expected " + std::to_string(layout.size()));
    }
    std::vector<double> density(layout.size(), 0.0);
    std::vector<bool> seen(layout.size(), false);
    std::vector<std::size_t> cats(schema.attribute_count());
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        const std::string tag = "line " + std::to_string(row.line);
        if (row.fields.size() != width) {
            throw PersonaError(tag + ": wrong column count");
        }
        for (std::size_t k = 0; k < schema.attribute_count(); ++k) {
            auto c = schema.attribute(k).find(row.fields[k]);
            if (!c) {
                throw PersonaError(tag + ": unknown category '" + row.fields[k] + "'");
            }
            cats[k] = *c;
        }
        const std::size_t idx = layout.encode(cats);
        if (seen[idx]) {
            throw PersonaError(tag + ": duplicate persona");
        }
        seen[idx] = true;
        density[idx] = csv::parse_double(row.fields.back(), tag);
    }
    return PersonaTable(std::move(layout), std::move(density));
}

} // namespace psynth
