#include "psynth/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "psynth/csv.hpp"
#include "psynth/error.hpp"

namespace psynth {

namespace {

constexpr double kUnitSumTolerance = 1e-9;

const std::vector<std::string> kColumns = {"kind",     "attribute", "category",
                                           "question", "response",  "share_percent"};

std::string row_tag(std::size_t line) { return "line " + std::to_string(line); }

// Raw percentages of one block (an attribute's marginal, or one group of one question),
// indexed by label position with the not-specified entry appended last.
struct Block {
    std::vector<double> percent;
    std::vector<bool> seen;
    std::size_t first_line = 0;
};

std::vector<double> finalize_block(const Block& block, std::size_t labelled, bool has_ns,
                                   const IngestOptions& opts, const std::string& what) {
    const double total = std::accumulate(block.percent.begin(), block.percent.end(), 0.0) / 100.0;
    if (std::abs(total - 1.0) > opts.total_band) {
        throw IngestError(what + " (from " + row_tag(block.first_line) + ") sums to " +
                          std::to_string(total * 100.0) + "%, outside 100% +/- " +
                          std::to_string(opts.total_band * 100.0));
    }
    std::vector<double> fractions(block.percent.size());
    for (std::size_t i = 0; i < fractions.size(); ++i) {
        fractions[i] = block.percent[i] / 100.0 / total;
    }
    if (!has_ns) {
        fractions.resize(labelled);
        return fractions;
    }
    try {
        return merge_not_specified(fractions, labelled, opts.strategy);
    } catch (const IngestError& e) {
        throw IngestError(what + ": " + e.what());
    }
}

} // namespace

const std::vector<double>& MarginalTargets::shares(std::size_t attribute) const {
    const auto& entry = shares_.at(attribute);
    if (!entry) {
        throw IngestError("no marginal target for attribute " + std::to_string(attribute));
    }
    return *entry;
}

void MarginalTargets::set(std::size_t attribute, std::vector<double> shares) {
    double sum = 0.0;
    for (double s : shares) {
        if (!(s >= 0.0)) {
            throw IngestError("negative or NaN marginal share");
        }
        sum += s;
    }
    if (std::abs(sum - 1.0) > kUnitSumTolerance) {
        throw IngestError("marginal shares sum to " + csv::format_exact(sum));
    }
    shares_.at(attribute) = std::move(shares);
}

const GroupRow* GroupedDistribution::find(std::size_t category) const {
    for (const auto& row : groups) {
        if (row.category == category) {
            return &row;
        }
    }
    return nullptr;
}

void GroupedDistribution::validate() const {
    for (const auto& row : groups) {
        double sum = 0.0;
        for (double s : row.shares) {
            if (!(s >= 0.0)) {
                throw IngestError("question '" + question + "': negative share");
            }
            sum += s;
        }
        if (std::abs(sum - 1.0) > kUnitSumTolerance) {
            throw IngestError("question '" + question + "': group " + std::to_string(row.category) +
                              " sums to " + csv::format_exact(sum));
        }
    }
}

const GroupedDistribution* BenchmarkData::find_response(std::string_view question) const {
    for (const auto& dist : responses) {
        if (dist.question == question) {
            return &dist;
        }
    }
    return nullptr;
}

std::vector<double> merge_not_specified(std::span<const double> shares, std::size_t not_specified,
                                        MergeStrategy strategy) {
    if (not_specified >= shares.size()) {
        throw IngestError("not-specified index out of range");
    }
    std::vector<double> out;
    out.reserve(shares.size() - 1);
    for (std::size_t i = 0; i < shares.size(); ++i) {
        if (shares[i] < 0.0) {
            throw IngestError("negative share");
        }
        if (i != not_specified) {
            out.push_back(shares[i]);
        }
    }
    const double mass = shares[not_specified];
    const double rest = std::accumulate(out.begin(), out.end(), 0.0);
    if (out.empty() || rest <= 0.0) {
        throw IngestError("all mass is on the not-specified option; nothing to merge into");
    }
    switch (strategy) {
    case MergeStrategy::argmax: {
        // max_element returns the first maximum, which gives the earlier response on ties.
        auto it = std::max_element(out.begin(), out.end());
        *it += mass;
        break;
    }
    case MergeStrategy::proportional:
        for (double& s : out) {
            s += mass * (s / rest);
        }
        break;
    }
    return out;
}

BenchmarkData ingest_benchmark(std::string_view text, const AttributeSchema& schema,
                               const IngestOptions& opts) {
    const auto rows = csv::parse(text);
    if (rows.empty() || rows.front().fields != kColumns) {
        throw IngestError("benchmark table must start with the header "
                          "'kind,attribute,category,question,response,share_percent'");
    }

    const std::size_t n_attr = schema.attribute_count();
    std::map<std::size_t, Block> marginal_blocks;
    // (question index, group attribute, group category) -> block
    std::map<std::tuple<std::size_t, std::size_t, std::size_t>, Block> response_blocks;

    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        const std::string tag = row_tag(row.line);
        if (row.fields.size() != kColumns.size()) {
            throw IngestError(tag + ": expected 6 columns, found " + std::to_string(row.fields.size()));
        }
        const auto& kind = row.fields[0];
        const auto& attr_name = row.fields[1];
        const auto& category = row.fields[2];
        const double percent = csv::parse_double(row.fields[5], tag);
        if (percent < 0.0) {
            throw IngestError(tag + ": negative share");
        }
        const auto attr_idx = schema.find_attribute(attr_name);
        if (!attr_idx) {
            throw IngestError(tag + ": unknown attribute '" + attr_name + "'");
        }
        const Attribute& attr = schema.attribute(*attr_idx);

        auto category_slot = [&](bool allow_ns) -> std::size_t {
            if (auto c = attr.find(category)) {
                return *c;
            }
            if (allow_ns && category == opts.not_specified_label) {
                return attr.size();
            }
            throw IngestError(tag + ": unknown category '" + category + "' for attribute '" +
                              attr_name + "'");
        };

        auto store = [&](Block& block, std::size_t slot, std::size_t width) {
            if (block.percent.empty()) {
                block.percent.assign(width, 0.0);
                block.seen.assign(width, false);
                block.first_line = row.line;
            }
            if (block.seen[slot]) {
                throw IngestError(tag + ": duplicate entry");
            }
            block.seen[slot] = true;
            block.percent[slot] = percent;
        };

        if (kind == "marginal") {
            const std::size_t slot = category_slot(opts.merge_marginals);
            store(marginal_blocks[*attr_idx], slot, attr.size() + 1);
        } else if (kind == "response") {
            const std::size_t group = category_slot(false);
            const auto& qid = row.fields[3];
            const Question* q = schema.find_question(qid);
            if (!q) {
                throw IngestError(tag + ": unknown question '" + qid + "'");
            }
            const std::size_t q_idx = static_cast<std::size_t>(q - schema.questions().data());
            const auto& response = row.fields[4];
            std::size_t slot = 0;
            if (auto idx = q->find(response)) {
                slot = *idx;
            } else if (opts.merge_responses && response == opts.not_specified_label) {
                slot = q->size();
            } else {
                throw IngestError(tag + ": unknown response '" + response + "' for question '" +
                                  qid + "'");
            }
            store(response_blocks[{q_idx, *attr_idx, group}], slot, q->size() + 1);
        } else {
            throw IngestError(tag + ": unknown kind '" + kind + "' (expected marginal|response)");
        }
    }

    BenchmarkData out;
    out.marginals = MarginalTargets(n_attr);
    for (const auto& [attr_idx, block] : marginal_blocks) {
        const Attribute& attr = schema.attribute(attr_idx);
        const bool has_ns = block.seen.back();
        out.marginals.set(attr_idx, finalize_block(block, attr.size(), has_ns, opts,
                                                   "marginal '" + attr.name + "'"));
    }

    for (const auto& [key, block] : response_blocks) {
        const auto [q_idx, attr_idx, group] = key;
        const Question& q = schema.questions()[q_idx];
        const Attribute& attr = schema.attribute(attr_idx);
        if (out.responses.empty() || out.responses.back().question != q.id ||
            out.responses.back().group_index != attr_idx) {
            GroupedDistribution dist;
            dist.question = q.id;
            dist.group_attribute = attr.name;
            dist.group_index = attr_idx;
            out.responses.push_back(std::move(dist));
        }
        const bool has_ns = block.seen.back();
        out.responses.back().groups.push_back(
            {group, finalize_block(block, q.size(), has_ns, opts,
                                   "question '" + q.id + "' group '" + attr.categories[group] + "'")});
    }
    for (const auto& dist : out.responses) {
        dist.validate();
    }
    return out;
}

BenchmarkData ingest_benchmark_file(const std::string& path, const AttributeSchema& schema,
                                    const IngestOptions& options) {
    return ingest_benchmark(csv::read_file(path), schema, options);
}

std::string_view to_string(MergeStrategy strategy) {
    return strategy == MergeStrategy::argmax ? "argmax" : "proportional";
}

MergeStrategy merge_strategy_from_string(std::string_view name) {
    if (name == "argmax") {
        return MergeStrategy::argmax;
    }
    if (name == "proportional") {
        return MergeStrategy::proportional;
    }
    throw ConfigError("unknown merge strategy '" + std::string(name) + "'");
}

} // namespace psynth
