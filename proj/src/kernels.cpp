#include "psynth/kernels.hpp"

#include <stdexcept>

#include "kernels_impl.hpp"

namespace psynth::kernels {

Layout::Layout(std::vector<std::size_t> radices)
    : radices_(std::move(radices)), strides_(radices_.size()) {
    size_ = 1;
    for (std::size_t k = radices_.size(); k-- > 0;) {
        if (radices_[k] == 0) {
            throw std::invalid_argument("layout radix must be positive");
        }
        strides_[k] = size_;
        size_ *= radices_[k];
    }
}

std::vector<std::size_t> Layout::decode(std::size_t index) const {
    std::vector<std::size_t> out(radices_.size());
    for (std::size_t k = 0; k < radices_.size(); ++k) {
        out[k] = category(index, k);
    }
    return out;
}

std::size_t Layout::encode(std::span<const std::size_t> categories) const {
    if (categories.size() != radices_.size()) {
        throw std::invalid_argument("category tuple length does not match layout");
    }
    std::size_t index = 0;
    for (std::size_t k = 0; k < radices_.size(); ++k) {
        if (categories[k] >= radices_[k]) {
            throw std::out_of_range("category index out of range");
        }
        index += categories[k] * strides_[k];
    }
    return index;
}

double sum(std::span<const double> values, Exec exec) {
    return exec == Exec::serial ? serial::sum(values) : omp::sum(values);
}

void scale(std::span<double> values, double factor, Exec exec) {
    exec == Exec::serial ? serial::scale(values, factor) : omp::scale(values, factor);
}

std::vector<double> marginal(std::span<const double> density, const Layout& layout,
                             std::size_t attr, Exec exec) {
    return exec == Exec::serial ? serial::marginal(density, layout, attr)
                                : omp::marginal(density, layout, attr);
}

void scale_by_category(std::span<double> density, const Layout& layout, std::size_t attr,
                       std::span<const double> factors, Exec exec) {
    exec == Exec::serial ? serial::scale_by_category(density, layout, attr, factors)
                         : omp::scale_by_category(density, layout, attr, factors);
}

std::vector<double> group_response_sums(std::span<const double> density,
                                        std::span<const double> profiles, std::size_t responses,
                                        const Layout& layout, std::size_t attr, Exec exec) {
    return exec == Exec::serial
               ? serial::group_response_sums(density, profiles, responses, layout, attr)
               : omp::group_response_sums(density, profiles, responses, layout, attr);
}

void rescale_profiles(std::span<double> profiles, std::size_t responses, const Layout& layout,
                      std::size_t attr, std::span<const double> factors, Exec exec) {
    exec == Exec::serial ? serial::rescale_profiles(profiles, responses, layout, attr, factors)
                         : omp::rescale_profiles(profiles, responses, layout, attr, factors);
}

} // namespace psynth::kernels
