#include "psynth/profile.hpp"

#include <cmath>

#include "psynth/csv.hpp"
#include "psynth/error.hpp"

namespace psynth {

void ProfileSet::validate() const {
    if (responses == 0 || values.size() % responses != 0) {
        throw BackendError("profile set for '" + question + "' has a ragged shape");
    }
    for (std::size_t i = 0; i < size(); ++i) {
        double total = 0.0;
        for (double p : row(i)) {
            if (!(p >= 0.0)) {
                throw BackendError("profile " + std::to_string(i) + " of '" + question +
                                   "' has a negative entry");
            }
            total += p;
        }
        if (std::abs(total - 1.0) > 1e-9) {
            throw BackendError("profile " + std::to_string(i) + " of '" + question +
                               "' sums to " + csv::format_exact(total));
        }
    }
}

std::string export_profiles(const ProfileSet& profiles, const PersonaTable& table,
                            const AttributeSchema& schema) {
    const Question& q = schema.question(profiles.question);
    if (profiles.size() != table.size() || profiles.responses != q.size()) {
        throw BackendError("profile set does not match persona table");
    }
    std::vector<std::string> fields;
    for (const auto& attr : schema.attributes()) {
        fields.push_back(attr.name);
    }
    fields.insert(fields.end(), q.responses.begin(), q.responses.end());
    std::string out = csv::join(fields) + "\n";
    for (std::size_t i = 0; i < table.size(); ++i) {
        fields.clear();
        for (std::size_t k = 0; k < schema.attribute_count(); ++k) {
            fields.push_back(schema.attribute(k).categories[table.category(i, k)]);
        }
        for (double p : profiles.row(i)) {
            fields.push_back(csv::format_exact(p));
        }
        out += csv::join(fields);
        out += '\n';
    }
    return out;
}

ProfileSet import_profiles(std::string_view text, const Question& question,
                           const AttributeSchema& schema) {
    const auto rows = csv::parse(text);
    const std::size_t n_attr = schema.attribute_count();
    const std::size_t width = n_attr + question.size();
    if (rows.empty() || rows.front().fields.size() != width) {
        throw BackendError("profile table header does not match schema and question");
    }
    for (std::size_t j = 0; j < question.size(); ++j) {
        if (rows.front().fields[n_attr + j] != question.responses[j]) {
            throw BackendError("profile table response column '" + rows.front().fields[n_attr + j] +
                               "' does not match question '" + question.id + "'");
        }
    }
    kernels::Layout layout(schema.radices());
    if (rows.size() - 1 != layout.size()) {
        throw BackendError("profile table has " + std::to_string(rows.size() - 1) +
                           " rows, expected " + std::to_string(layout.size()));
    }
    ProfileSet out(question.id, question.size(), layout.size());
    std::vector<std::size_t> cats(n_attr);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        const std::string tag = "line " + std::to_string(row.line);
        if (row.fields.size() != width) {
            throw BackendError(tag + ": wrong column count");
        }
        for (std::size_t k = 0; k < n_attr; ++k) {
            auto c = schema.attribute(k).find(row.fields[k]);
            if (!c) {
                throw BackendError(tag + ": unknown category '" + row.fields[k] + "'");
            }
            cats[k] = *c;
        }
        auto dest = out.row(layout.encode(cats));
        for (std::size_t j = 0; j < question.size(); ++j) {
            dest[j] = csv::parse_double(row.fields[n_attr + j], tag);
        }
    }
    out.validate();
    return out;
}

} // namespace psynth
