#pragma once

// Data-parallel primitives over the persona grid. Every kernel has a plain serial
// reference and an OpenMP version; tests hold the two to a relative 1e-12 and the
// benchmark target times them side by side.
//
// Reductions in the parallel versions are computed per fixed-size block and combined
// in block order, so results do not depend on the thread count or schedule.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace psynth::kernels {

enum class Exec { serial, parallel };

/// Persona count per reduction block in the parallel kernels.
inline constexpr std::size_t kBlock = 2048;

/// Mixed-radix layout of the persona grid; the last attribute varies fastest, which
/// makes flat index order the lexicographic order of category tuples.
class Layout {
public:
    Layout() = default;
    explicit Layout(std::vector<std::size_t> radices);

    const std::vector<std::size_t>& radices() const noexcept { return radices_; }
    std::size_t attribute_count() const noexcept { return radices_.size(); }
    std::size_t size() const noexcept { return size_; }
    std::size_t radix(std::size_t attr) const { return radices_[attr]; }
    std::size_t stride(std::size_t attr) const { return strides_[attr]; }

    std::size_t category(std::size_t index, std::size_t attr) const {
        return (index / strides_[attr]) % radices_[attr];
    }
    std::vector<std::size_t> decode(std::size_t index) const;
    std::size_t encode(std::span<const std::size_t> categories) const;

    bool operator==(const Layout&) const = default;

private:
    std::vector<std::size_t> radices_;
    std::vector<std::size_t> strides_;
    std::size_t size_ = 0;
};

/// Sum of `values`.
double sum(std::span<const double> values, Exec exec);

/// values *= factor.
void scale(std::span<double> values, double factor, Exec exec);

/// Per-category totals of `density` for one attribute.
std::vector<double> marginal(std::span<const double> density, const Layout& layout,
                             std::size_t attr, Exec exec);

/// density[i] *= factors[category(i, attr)].
void scale_by_category(std::span<double> density, const Layout& layout, std::size_t attr,
                       std::span<const double> factors, Exec exec);

/// Unnormalized grouped responses: out[g*K + r] = sum over personas in group g of
/// density[i] * profiles[i*K + r]. `profiles` is row-major N x K.
std::vector<double> group_response_sums(std::span<const double> density,
                                        std::span<const double> profiles, std::size_t responses,
                                        const Layout& layout, std::size_t attr, Exec exec);

/// Multiplies each profile row by the factor row of its group (factors is G x K), then
/// renormalizes the row to sum to 1. Rows whose scaled mass is 0 are left as they were.
void rescale_profiles(std::span<double> profiles, std::size_t responses, const Layout& layout,
                      std::size_t attr, std::span<const double> factors, Exec exec);

/// Invokes fn(i) for i in [0, n). fn must be safe to call concurrently for distinct i.
template <typename Fn>
void for_each_index(std::size_t n, Fn&& fn, Exec exec) {
    if (exec == Exec::serial) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < count; ++i) {
        fn(static_cast<std::size_t>(i));
    }
}

} // namespace psynth::kernels
