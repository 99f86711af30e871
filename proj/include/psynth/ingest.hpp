#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "psynth/schema.hpp"

namespace psynth {

/// Benchmark shares per attribute category, as fractions. An attribute may be absent
/// (no target); a present attribute covers every schema category and sums to 1.
class MarginalTargets {
public:
    MarginalTargets() = default;
    explicit MarginalTargets(std::size_t attribute_count) : shares_(attribute_count) {}

    std::size_t attribute_count() const noexcept { return shares_.size(); }
    bool has(std::size_t attribute) const { return shares_.at(attribute).has_value(); }
    const std::vector<double>& shares(std::size_t attribute) const;

    /// Validates non-negativity and a unit sum within 1e-9; throws IngestError.
    void set(std::size_t attribute, std::vector<double> shares);

    bool operator==(const MarginalTargets&) const = default;

private:
    std::vector<std::optional<std::vector<double>>> shares_;
};

struct GroupRow {
    std::size_t category = 0; ///< index into the group attribute's categories
    std::vector<double> shares; ///< aligned to the question's response order

    bool operator==(const GroupRow&) const = default;
};

/// Response shares per category of one grouping attribute.
struct GroupedDistribution {
    std::string question;
    std::string group_attribute;
    std::size_t group_index = 0; ///< attribute index in the schema
    std::vector<GroupRow> groups; ///< ascending by category, groups may be missing
    std::vector<std::string> warnings;

    const GroupRow* find(std::size_t category) const;
    std::size_t response_count() const { return groups.empty() ? 0 : groups.front().shares.size(); }
    /// Every row non-negative with unit sum within 1e-9; throws IngestError.
    void validate() const;

    bool operator==(const GroupedDistribution& other) const {
        return question == other.question && group_attribute == other.group_attribute &&
               group_index == other.group_index && groups == other.groups;
    }
};

enum class MergeStrategy {
    argmax,       ///< all "not specified" mass goes to the single largest share, earliest on ties
    proportional, ///< mass is spread over the remaining options in proportion to their shares
};

struct IngestOptions {
    std::string not_specified_label = "not specified";
    MergeStrategy strategy = MergeStrategy::argmax;
    bool merge_marginals = true;
    bool merge_responses = true;
    /// Allowed deviation of a block's raw total from 100 % before renormalization.
    double total_band = 0.02;
};

struct BenchmarkData {
    MarginalTargets marginals;
    std::vector<GroupedDistribution> responses;

    const GroupedDistribution* find_response(std::string_view question) const;

    bool operator==(const BenchmarkData&) const = default;
};

/// Removes entry `not_specified` and folds its mass into the remaining entries.
/// The result omits that entry and preserves the total. Throws IngestError when
/// no other entry has mass.
std::vector<double> merge_not_specified(std::span<const double> shares, std::size_t not_specified,
                                        MergeStrategy strategy = MergeStrategy::argmax);

/// Parses the benchmark table. Columns, with a mandatory header line:
///
///     kind,attribute,category,question,response,share_percent
///
/// `kind` is `marginal` (question/response left empty) or `response`, where
/// attribute/category name the group. Shares are percentages. Lines starting
/// with '#' are comments.
BenchmarkData ingest_benchmark(std::string_view text, const AttributeSchema& schema,
                               const IngestOptions& options = {});
BenchmarkData ingest_benchmark_file(const std::string& path, const AttributeSchema& schema,
                                    const IngestOptions& options = {});

std::string_view to_string(MergeStrategy strategy);
MergeStrategy merge_strategy_from_string(std::string_view name);

} // namespace psynth
