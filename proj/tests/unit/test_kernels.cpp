#include <algorithm>
#include <doctest.h>

#include <omp.h>

#include <random>

#include "psynth/kernels.hpp"
#include "support.hpp"

using namespace psynth::kernels;

namespace {

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) {
        x = u(rng);
    }
    return v;
}

void check_close(const std::vector<double>& a, const std::vector<double>& b, double tol = 1e-12) {
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(std::abs(a[i] - b[i]) <= tol * std::max(1.0, std::abs(b[i])));
    }
}

} // namespace

TEST_CASE("layout decodes lexicographically with the last attribute fastest") {
    const Layout layout({2, 2});
    CHECK(layout.size() == 4);
    CHECK(layout.decode(0) == std::vector<std::size_t>{0, 0});
    CHECK(layout.decode(1) == std::vector<std::size_t>{0, 1});
    CHECK(layout.decode(2) == std::vector<std::size_t>{1, 0});
    CHECK(layout.decode(3) == std::vector<std::size_t>{1, 1});
    const Layout big({9, 4, 8, 5, 11});
    for (std::size_t i = 0; i < big.size(); i += 97) {
        CHECK(big.encode(big.decode(i)) == i);
    }
}

TEST_CASE("serial and parallel kernels agree across thread counts") {
    std::mt19937_64 rng(17);
    const Layout layout({9, 4, 8, 5, 11});
    const auto density = random_vector(rng, layout.size());
    const std::size_t k = 5;
    const auto profiles = random_vector(rng, layout.size() * k);

    const double ref_sum = sum(density, Exec::serial);
    for (int threads : {1, 2, 3, 4}) {
        omp_set_num_threads(threads);
        CAPTURE(threads);
        CHECK(std::abs(sum(density, Exec::parallel) - ref_sum) <= 1e-12 * ref_sum);
        for (std::size_t attr = 0; attr < layout.attribute_count(); ++attr) {
            check_close(marginal(density, layout, attr, Exec::serial),
                        marginal(density, layout, attr, Exec::parallel));

            const auto factors = random_vector(rng, layout.radix(attr));
            auto a = density;
            auto b = density;
            scale_by_category(a, layout, attr, factors, Exec::serial);
            scale_by_category(b, layout, attr, factors, Exec::parallel);
            CHECK(a == b);

            check_close(group_response_sums(density, profiles, k, layout, attr, Exec::serial),
                        group_response_sums(density, profiles, k, layout, attr, Exec::parallel));

            const auto gfactors = random_vector(rng, layout.radix(attr) * k);
            auto pa = profiles;
            auto pb = profiles;
            rescale_profiles(pa, k, layout, attr, gfactors, Exec::serial);
            rescale_profiles(pb, k, layout, attr, gfactors, Exec::parallel);
            CHECK(pa == pb);
        }
        auto s1 = density;
        auto s2 = density;
        scale(s1, 0.37, Exec::serial);
        scale(s2, 0.37, Exec::parallel);
        CHECK(s1 == s2);
    }
}

TEST_CASE("parallel reductions are identical for every thread count") {
    std::mt19937_64 rng(23);
    const Layout layout({7, 6, 5, 4, 3, 2});
    const auto density = random_vector(rng, layout.size());
    omp_set_num_threads(1);
    const double one = sum(density, Exec::parallel);
    const auto m1 = marginal(density, layout, 2, Exec::parallel);
    for (int threads : {2, 3, 5}) {
        omp_set_num_threads(threads);
        CHECK(sum(density, Exec::parallel) == one);
        CHECK(marginal(density, layout, 2, Exec::parallel) == m1);
    }
}

TEST_CASE("marginal matches a brute-force decode") {
    std::mt19937_64 rng(29);
    const std::vector<std::size_t> sizes = {3, 4, 2};
    const Layout layout(sizes);
    const auto density = random_vector(rng, layout.size());
    for (std::size_t attr = 0; attr < sizes.size(); ++attr) {
        check_close(marginal(density, layout, attr, Exec::parallel),
                    testsupport::brute_marginal(density, sizes, attr), 1e-14);
    }
}

TEST_CASE("rescale_profiles renormalizes rows and keeps zero-mass rows") {
    const Layout layout({2});
    std::vector<double> profiles = {0.5, 0.5, 0.2, 0.8};
    const std::vector<double> factors = {2.0, 1.0, 0.0, 0.0};
    rescale_profiles(profiles, 2, layout, 0, factors, Exec::serial);
    CHECK(profiles[0] == doctest::Approx(2.0 / 3.0));
    CHECK(profiles[1] == doctest::Approx(1.0 / 3.0));
    CHECK(profiles[2] == 0.2);
    CHECK(profiles[3] == 0.8);
}

TEST_CASE("for_each_index visits every index once") {
    std::vector<int> hits(10007, 0);
    for_each_index(hits.size(), [&](std::size_t i) { hits[i] += 1; }, Exec::parallel);
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
}
