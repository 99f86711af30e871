#include "psynth/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "psynth/csv.hpp"
#include "psynth/error.hpp"

namespace psynth {

namespace {

std::string category_name(const AttributeSchema* schema, std::size_t attr, std::size_t cat) {
    if (schema != nullptr && attr < schema->attribute_count() &&
        cat < schema->attribute(attr).size()) {
        return "'" + schema->attribute(attr).name + "' = '" +
               schema->attribute(attr).categories[cat] + "'";
    }
    return "attribute " + std::to_string(attr) + " category " + std::to_string(cat);
}

} // namespace

void CalibrationOptions::validate() const {
    if (!(tolerance > 0.0)) {
        throw ConfigError("calibration tolerance must be positive");
    }
    if (max_iterations < 1) {
        throw ConfigError("calibration needs at least one iteration");
    }
    if (!(zero_floor >= 0.0)) {
        throw ConfigError("zero_floor must be non-negative");
    }
}

nlohmann::json CalibrationReport::to_json() const {
    return {{"iterations", iterations},
            {"max_deviation", max_deviation},
            {"converged", converged},
            {"trace", trace}};
}

std::string CalibrationReport::to_text() const {
    std::ostringstream out;
    out << "iterations: " << iterations << "\n"
        << "converged: " << (converged ? "yes" : "no") << "\n"
        << "max deviation: " << csv::format_exact(max_deviation) << "\n";
    for (std::size_t i = 0; i < trace.size(); ++i) {
        out << "  check " << (i + 1) << ":";
        for (double d : trace[i]) {
            out << ' ' << csv::format_exact(d);
        }
        out << '\n';
    }
    return out.str();
}

std::pair<PersonaTable, CalibrationReport>
fit_densities_to_marginals(const PersonaTable& table, const MarginalTargets& targets,
                           const CalibrationOptions& opts, const AttributeSchema* schema) {
    opts.validate();
    const auto& layout = table.layout();
    const std::size_t n_attr = layout.attribute_count();
    if (targets.attribute_count() != n_attr) {
        throw CalibrationError("marginal targets do not match the persona grid");
    }
    for (std::size_t k = 0; k < n_attr; ++k) {
        if (targets.has(k) && targets.shares(k).size() != layout.radix(k)) {
            throw CalibrationError("target for attribute " + std::to_string(k) +
                                   " has the wrong number of categories");
        }
    }

    PersonaTable out = table;
    auto density = out.densities();
    const double seed_total = kernels::sum(density, opts.exec);
    if (std::abs(seed_total - 1.0) > 1e-9) {
        throw CalibrationError("seed densities sum to " + csv::format_exact(seed_total));
    }

    // Structural zeros: a target that asks for mass the seed cannot provide.
    bool floored = false;
    for (std::size_t k = 0; k < n_attr; ++k) {
        if (!targets.has(k)) {
            continue;
        }
        const auto m = kernels::marginal(density, layout, k, opts.exec);
        const auto& t = targets.shares(k);
        for (std::size_t c = 0; c < m.size(); ++c) {
            if (t[c] > 0.0 && m[c] == 0.0) {
                if (opts.zero_floor == 0.0) {
                    throw InfeasibleError("target needs mass on " + category_name(schema, k, c) +
                                          " but every seed persona there has density 0");
                }
                kernels::for_each_index(
                    density.size(),
                    [&](std::size_t i) {
                        if (layout.category(i, k) == c && density[i] == 0.0) {
                            density[i] = opts.zero_floor;
                        }
                    },
                    opts.exec);
                floored = true;
            }
        }
    }
    if (floored) {
        kernels::scale(density, 1.0 / kernels::sum(density, opts.exec), opts.exec);
    }

    CalibrationReport report;
    std::vector<double> factors;
    for (std::size_t it = 1; it <= opts.max_iterations; ++it) {
        std::vector<double> deviation(n_attr, 0.0);
        for (std::size_t k = 0; k < n_attr; ++k) {
            if (!targets.has(k)) {
                continue;
            }
            const auto m = kernels::marginal(density, layout, k, opts.exec);
            const auto& t = targets.shares(k);
            for (std::size_t c = 0; c < m.size(); ++c) {
                deviation[k] = std::max(deviation[k], std::abs(m[c] - t[c]));
            }
        }
        report.iterations = it;
        report.max_deviation = *std::max_element(deviation.begin(), deviation.end());
        report.trace.push_back(std::move(deviation));
        if (report.max_deviation <= opts.tolerance) {
            report.converged = true;
            break;
        }
        if (it == opts.max_iterations) {
            break;
        }
        for (std::size_t k = 0; k < n_attr; ++k) {
            if (!targets.has(k)) {
                continue;
            }
            const auto m = kernels::marginal(density, layout, k, opts.exec);
            const auto& t = targets.shares(k);
            factors.assign(m.size(), 0.0);
            for (std::size_t c = 0; c < m.size(); ++c) {
                // A category emptied by another attribute's zero target stays empty; the
                // resulting miss shows up as converged = false.
                factors[c] = m[c] > 0.0 ? t[c] / m[c] : 0.0;
            }
            kernels::scale_by_category(density, layout, k, factors, opts.exec);
        }
    }
    return {std::move(out), std::move(report)};
}

ResponseFit fit_responses_to_benchmark(const ProfileSet& profiles, const PersonaTable& table,
                                       const GroupedDistribution& target,
                                       const CalibrationOptions& opts, ResponseMode mode) {
    opts.validate();
    const auto& layout = table.layout();
    const std::size_t k = profiles.responses;
    if (profiles.size() != table.size()) {
        throw CalibrationError("profile set does not cover the persona table");
    }
    if (target.group_index >= layout.attribute_count()) {
        throw CalibrationError("target groups by an attribute outside the persona grid");
    }
    if (target.groups.empty()) {
        throw CalibrationError("target for '" + target.question + "' has no groups");
    }
    if (target.response_count() != k) {
        throw CalibrationError("target for '" + target.question + "' has " +
                               std::to_string(target.response_count()) + " responses, profiles have " +
                               std::to_string(k));
    }
    target.validate();

    const std::size_t attr = target.group_index;
    const std::size_t n_groups = layout.radix(attr);
    const auto weights = kernels::marginal(table.densities(), layout, attr, opts.exec);
    for (const auto& row : target.groups) {
        if (row.category >= n_groups) {
            throw CalibrationError("target group index out of range");
        }
        if (!(weights[row.category] > 0.0)) {
            throw CalibrationError("group " + std::to_string(row.category) + " of '" +
                                   target.question + "' has a target but zero persona weight");
        }
    }

    // Effective target rows: one per group (per_group) or the population mix (overall).
    std::vector<std::size_t> groups;
    std::vector<std::vector<double>> goals;
    if (mode == ResponseMode::per_group) {
        for (const auto& row : target.groups) {
            groups.push_back(row.category);
            goals.push_back(row.shares);
        }
    } else {
        std::vector<double> mix(k, 0.0);
        double total = 0.0;
        for (const auto& row : target.groups) {
            total += weights[row.category];
            for (std::size_t r = 0; r < k; ++r) {
                mix[r] += weights[row.category] * row.shares[r];
            }
        }
        for (double& v : mix) {
            v /= total;
        }
        goals.push_back(std::move(mix));
    }

    ResponseFit fit{profiles, {}};
    auto& values = fit.profiles.values;

    // Aggregate per effective target row.
    auto aggregate = [&]() {
        const auto sums =
            kernels::group_response_sums(table.densities(), values, k, layout, attr, opts.exec);
        std::vector<std::vector<double>> agg;
        if (mode == ResponseMode::per_group) {
            for (std::size_t g : groups) {
                std::vector<double> a(sums.begin() + static_cast<std::ptrdiff_t>(g * k),
                                      sums.begin() + static_cast<std::ptrdiff_t>((g + 1) * k));
                double w = 0.0;
                for (double v : a) {
                    w += v;
                }
                for (double& v : a) {
                    v /= w;
                }
                agg.push_back(std::move(a));
            }
        } else {
            std::vector<double> a(k, 0.0);
            double w = 0.0;
            for (const auto& row : target.groups) {
                for (std::size_t r = 0; r < k; ++r) {
                    a[r] += sums[row.category * k + r];
                    w += sums[row.category * k + r];
                }
            }
            for (double& v : a) {
                v /= w;
            }
            agg.push_back(std::move(a));
        }
        return agg;
    };

    std::vector<double> factors(n_groups * k, 1.0);
    for (std::size_t it = 1; it <= opts.max_iterations; ++it) {
        const auto agg = aggregate();
        double dev = 0.0;
        for (std::size_t j = 0; j < goals.size(); ++j) {
            for (std::size_t r = 0; r < k; ++r) {
                if (goals[j][r] > 0.0 && agg[j][r] == 0.0) {
                    const std::string where =
                        mode == ResponseMode::per_group ? "group " + std::to_string(groups[j])
                                                        : std::string("the population");
                    throw InfeasibleError("'" + target.question + "' response " + std::to_string(r) +
                                          " has a positive target in " + where +
                                          " but zero probability for every persona there");
                }
                dev = std::max(dev, std::abs(agg[j][r] - goals[j][r]));
            }
        }
        fit.report.iterations = it;
        fit.report.max_deviation = dev;
        fit.report.trace.push_back({dev});
        if (dev <= opts.tolerance) {
            fit.report.converged = true;
            break;
        }
        if (it == opts.max_iterations) {
            break;
        }
        for (std::size_t j = 0; j < goals.size(); ++j) {
            for (std::size_t r = 0; r < k; ++r) {
                const double f = agg[j][r] > 0.0 ? goals[j][r] / agg[j][r] : 0.0;
                if (mode == ResponseMode::per_group) {
                    factors[groups[j] * k + r] = f;
                } else {
                    for (const auto& row : target.groups) {
                        factors[row.category * k + r] = f;
                    }
                }
            }
        }
        kernels::rescale_profiles(values, k, layout, attr, factors, opts.exec);
    }
    return fit;
}

std::string_view to_string(ResponseMode mode) {
    return mode == ResponseMode::per_group ? "per-group" : "overall";
}

ResponseMode response_mode_from_string(std::string_view name) {
    if (name == "per-group") {
        return ResponseMode::per_group;
    }
    if (name == "overall") {
        return ResponseMode::overall;
    }
    throw ConfigError("unknown response mode '" + std::string(name) + "' (per-group|overall)");
}

} // namespace psynth
