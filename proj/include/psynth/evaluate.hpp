#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "psynth/ingest.hpp"
#include "psynth/persona.hpp"
#include "psynth/profile.hpp"
#include "psynth/respond.hpp"

namespace psynth {

/// Density-weighted group responses R_i(a) = sum over personas in group a of
/// pi_P * R_i(P), normalized per group. Groups with no density are omitted and
/// noted in `warnings`. Throws EvaluationError when a persona with positive
/// density has no profile.
GroupedDistribution aggregate_personas(const PersonaTable& table, const ProfileSet& profiles,
                                       const AttributeSchema& schema,
                                       std::string_view group_attribute,
                                       Exec exec = Exec::parallel);

/// Empirical response frequencies per group. Empty groups are omitted with a warning.
GroupedDistribution aggregate_individuals(const Population& population,
                                          const AttributeSchema& schema, const Question& question,
                                          std::string_view group_attribute);

/// Share of each group category in the persona table or the population.
std::vector<double> group_weights(const PersonaTable& table, std::size_t group_index);
std::vector<double> group_weights(const Population& population, std::size_t group_index,
                                  std::size_t group_count);

struct ErrorPair {
    double mae = 0.0;  ///< percentage points
    double rmse = 0.0; ///< percentage points
};

/// Element-wise over every (group, response) cell, in percentage points.
/// Throws EvaluationError when the groups or response counts differ.
ErrorPair mae_rmse(const GroupedDistribution& synth, const GroupedDistribution& real);

/// Shannon entropy in bits; 0 log 0 = 0.
double entropy(std::span<const double> dist);

/// sqrt of the base-2 Jensen-Shannon divergence, in [0, 1].
double js_distance(std::span<const double> p, std::span<const double> q);
/// Per-group distances averaged with `weights` (indexed by group category).
double js_distance(const GroupedDistribution& synth, const GroupedDistribution& real,
                   std::span<const double> weights);

/// H(R | A) = sum_a w_a H(R | A = a).
double conditional_entropy(const GroupedDistribution& dist, std::span<const double> weights);
/// |H_synth(R|A) - H_real(R|A)| with the same weights on both sides.
double conditional_entropy_gap(const GroupedDistribution& synth, const GroupedDistribution& real,
                               std::span<const double> weights);

/// Comonotone (quantile) coupling of two distributions over the same ordered scale:
/// a row-major K x K mass table with rows for `real` and columns for `synth`.
std::vector<double> comonotone_coupling(std::span<const double> real, std::span<const double> synth);

/// Cramér's V of a rows x cols mass table. Empty rows and columns are dropped; a table
/// with a single remaining row or column scores 1 when it is 1 x 1 and 0 otherwise.
double cramers_v_from_table(std::span<const double> table, std::size_t rows, std::size_t cols);

/// Cramér's V of the group-weighted sum of per-group comonotone couplings.
double cramers_v(const GroupedDistribution& synth, const GroupedDistribution& real,
                 std::span<const double> weights);

/// Joint (group, response) distribution: weights[a] * R_i(a), flattened group-major.
std::vector<double> joint_distribution(const GroupedDistribution& dist,
                                       std::span<const double> weights);

struct QuestionMetrics {
    std::string question;
    double mae = 0.0;
    double rmse = 0.0;
    double js = 0.0;
    double entropy = 0.0;         ///< of the synthetic (group, response) joint, bits
    double entropy_gap = 0.0;     ///< |conditional entropy| column, bits
    double cramers_v = 0.0;
};

struct MetricReport {
    std::string method;
    std::vector<QuestionMetrics> questions;
    QuestionMetrics pooled; ///< mean over questions

    nlohmann::json to_json() const;
    /// "Survey Type,MAE,RMSE,JS Distance,Entropy,|Conditional Entropy|,Cramér's V"
    static std::string csv_header();
    std::string csv_row() const;
};

/// All metrics for one question. `weights` are the real group shares.
QuestionMetrics full_report(const GroupedDistribution& synth, const GroupedDistribution& real,
                            std::span<const double> weights, std::span<const double> joint_synth);

/// Sets `pooled` to the per-metric mean over `questions`.
void pool(MetricReport& report);

} // namespace psynth
