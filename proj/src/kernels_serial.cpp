// Serial reference kernels. Straightforward loops; kept for testing and benchmarking.
#include "psynth/kernels.hpp"

#include "kernels_impl.hpp"

namespace psynth::kernels::serial {

double sum(std::span<const double> values) {
    double total = 0.0;
    for (double v : values) {
        total += v;
    }
    return total;
}

void scale(std::span<double> values, double factor) {
    for (double& v : values) {
        v *= factor;
    }
}

std::vector<double> marginal(std::span<const double> density, const Layout& layout,
                             std::size_t attr) {
    std::vector<double> out(layout.radix(attr), 0.0);
    for (std::size_t i = 0; i < density.size(); ++i) {
        out[layout.category(i, attr)] += density[i];
    }
    return out;
}

void scale_by_category(std::span<double> density, const Layout& layout, std::size_t attr,
                       std::span<const double> factors) {
    for (std::size_t i = 0; i < density.size(); ++i) {
        density[i] *= factors[layout.category(i, attr)];
    }
}

std::vector<double> group_response_sums(std::span<const double> density,
                                        std::span<const double> profiles, std::size_t k,
                                        const Layout& layout, std::size_t attr) {
    std::vector<double> out(layout.radix(attr) * k, 0.0);
    for (std::size_t i = 0; i < density.size(); ++i) {
        const std::size_t g = layout.category(i, attr);
        for (std::size_t r = 0; r < k; ++r) {
            out[g * k + r] += density[i] * profiles[i * k + r];
        }
    }
    return out;
}

void rescale_profiles(std::span<double> profiles, std::size_t k, const Layout& layout,
                      std::size_t attr, std::span<const double> factors) {
    const std::size_t n = profiles.size() / k;
    std::vector<double> row(k);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t g = layout.category(i, attr);
        double total = 0.0;
        for (std::size_t r = 0; r < k; ++r) {
            row[r] = profiles[i * k + r] * factors[g * k + r];
            total += row[r];
        }
        if (total > 0.0) {
            for (std::size_t r = 0; r < k; ++r) {
                profiles[i * k + r] = row[r] / total;
            }
        }
    }
}

} // namespace psynth::kernels::serial
