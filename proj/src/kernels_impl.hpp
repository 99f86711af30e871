#pragma once

#include "psynth/kernels.hpp"

namespace psynth::kernels {

namespace serial {
double sum(std::span<const double> values);
void scale(std::span<double> values, double factor);
std::vector<double> marginal(std::span<const double> density, const Layout& layout,
                             std::size_t attr);
void scale_by_category(std::span<double> density, const Layout& layout, std::size_t attr,
                       std::span<const double> factors);
std::vector<double> group_response_sums(std::span<const double> density,
                                        std::span<const double> profiles, std::size_t k,
                                        const Layout& layout, std::size_t attr);
void rescale_profiles(std::span<double> profiles, std::size_t k, const Layout& layout,
                      std::size_t attr, std::span<const double> factors);
} // namespace serial

namespace omp {
double sum(std::span<const double> values);
void scale(std::span<double> values, double factor);
std::vector<double> marginal(std::span<const double> density, const Layout& layout,
                             std::size_t attr);
void scale_by_category(std::span<double> density, const Layout& layout, std::size_t attr,
                       std::span<const double> factors);
std::vector<double> group_response_sums(std::span<const double> density,
                                        std::span<const double> profiles, std::size_t k,
                                        const Layout& layout, std::size_t attr);
void rescale_profiles(std::span<double> profiles, std::size_t k, const Layout& layout,
                      std::size_t attr, std::span<const double> factors);
} // namespace omp

} // namespace psynth::kernels
