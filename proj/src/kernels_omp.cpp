// OpenMP kernels. Reductions go through per-block partials combined in block order.
#include "psynth/kernels.hpp"

#include <algorithm>
#include <cstdint>

#include "kernels_impl.hpp"

namespace psynth::kernels::omp {

namespace {

std::size_t block_count(std::size_t n) { return (n + kBlock - 1) / kBlock; }

// Computes `width` partial sums per block with body(begin, end, partial) and adds the
// blocks up in order.
template <typename Body>
std::vector<double> blocked_reduce(std::size_t n, std::size_t width, Body&& body) {
    const std::size_t blocks = block_count(n);
    std::vector<double> partials(blocks * width, 0.0);
    const auto count = static_cast<std::int64_t>(blocks);
#pragma omp parallel for schedule(static)
    for (std::int64_t b = 0; b < count; ++b) {
        const std::size_t begin = static_cast<std::size_t>(b) * kBlock;
        const std::size_t end = std::min(n, begin + kBlock);
        body(begin, end, partials.data() + static_cast<std::size_t>(b) * width);
    }
    std::vector<double> out(width, 0.0);
    for (std::size_t b = 0; b < blocks; ++b) {
        for (std::size_t j = 0; j < width; ++j) {
            out[j] += partials[b * width + j];
        }
    }
    return out;
}

} // namespace

double sum(std::span<const double> values) {
    return blocked_reduce(values.size(), 1, [&](std::size_t begin, std::size_t end, double* acc) {
        for (std::size_t i = begin; i < end; ++i) {
            acc[0] += values[i];
        }
    })[0];
}

void scale(std::span<double> values, double factor) {
    const auto n = static_cast<std::int64_t>(values.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        values[static_cast<std::size_t>(i)] *= factor;
    }
}

std::vector<double> marginal(std::span<const double> density, const Layout& layout,
                             std::size_t attr) {
    return blocked_reduce(density.size(), layout.radix(attr),
                          [&](std::size_t begin, std::size_t end, double* acc) {
                              for (std::size_t i = begin; i < end; ++i) {
                                  acc[layout.category(i, attr)] += density[i];
                              }
                          });
}

void scale_by_category(std::span<double> density, const Layout& layout, std::size_t attr,
                       std::span<const double> factors) {
    const auto n = static_cast<std::int64_t>(density.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        density[idx] *= factors[layout.category(idx, attr)];
    }
}

std::vector<double> group_response_sums(std::span<const double> density,
                                        std::span<const double> profiles, std::size_t k,
                                        const Layout& layout, std::size_t attr) {
    return blocked_reduce(density.size(), layout.radix(attr) * k,
                          [&](std::size_t begin, std::size_t end, double* acc) {
                              for (std::size_t i = begin; i < end; ++i) {
                                  const std::size_t g = layout.category(i, attr);
                                  for (std::size_t r = 0; r < k; ++r) {
                                      acc[g * k + r] += density[i] * profiles[i * k + r];
                                  }
                              }
                          });
}

void rescale_profiles(std::span<double> profiles, std::size_t k, const Layout& layout,
                      std::size_t attr, std::span<const double> factors) {
    const auto n = static_cast<std::int64_t>(profiles.size() / k);
#pragma omp parallel
    {
        std::vector<double> row(k);
#pragma omp for schedule(static)
        for (std::int64_t ii = 0; ii < n; ++ii) {
            const auto i = static_cast<std::size_t>(ii);
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
}

} // namespace psynth::kernels::omp
