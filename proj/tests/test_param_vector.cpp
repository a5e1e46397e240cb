#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "fedsim/errors.hpp"
#include "fedsim/param_vector.hpp"
#include "fedsim/rng.hpp"

using namespace fedsim;

namespace {

ParameterVector pv(std::vector<double> v) { return ParameterVector(std::move(v)); }

ParameterVector random_vec(Rng& rng, std::size_t dim, double scale = 3.0) {
    std::vector<double> v(dim);
    for (auto& x : v) x = scale * rng.normal();
    return ParameterVector(std::move(v));
}

} // namespace

TEST_SUITE("param_core") {

TEST_CASE("weighted_sum examples") {
    const std::vector<ParameterVector> a = {pv({1, 3}), pv({3, 5})};
    const std::vector<double> w_half = {0.5, 0.5};
    CHECK(weighted_sum(a, w_half) == pv({2, 4}));

    const std::vector<ParameterVector> single = {pv({4, 4})};
    const std::vector<double> one = {1.0};
    CHECK(weighted_sum(single, one) == pv({4, 4}));

    const std::vector<ParameterVector> b = {pv({0, 0}), pv({4, 4})};
    const std::vector<double> w = {0.25, 0.75};
    CHECK(weighted_sum(b, w) == pv({3, 3}));
}

TEST_CASE("weighted_sum errors") {
    const std::vector<ParameterVector> mismatched = {pv({1, 2}), pv({1, 2, 3})};
    const std::vector<double> w = {0.5, 0.5};
    CHECK_THROWS_AS((void)weighted_sum(mismatched, w), StructuralError);

    const std::vector<ParameterVector> empty;
    const std::vector<double> no_w;
    CHECK_THROWS_AS((void)weighted_sum(empty, no_w), UsageError);

    const std::vector<ParameterVector> two = {pv({1}), pv({2})};
    const std::vector<double> one_w = {1.0};
    CHECK_THROWS_AS((void)weighted_sum(two, one_w), UsageError);
}

TEST_CASE("l2_dist_sq examples") {
    CHECK(l2_dist_sq(pv({1, 1}), pv({1, 1})) == 0.0);
    CHECK(l2_dist_sq(pv({0, 0}), pv({3, 4})) == 25.0);
    CHECK(l2_dist_sq(pv({1, 2, 3}), pv({2, 0, 3})) == 5.0);
    CHECK_THROWS_AS((void)l2_dist_sq(pv({1}), pv({1, 2})), StructuralError);
}

TEST_CASE("axpy examples") {
    CHECK(axpy(pv({1, 1}), 0.0, pv({9, 9})) == pv({1, 1}));
    CHECK(axpy(pv({1, 1}), -1.0, pv({1, 1})) == pv({0, 0}));
    CHECK(axpy(pv({2, 4}), 0.5, pv({2, 2})) == pv({3, 5}));
    CHECK_THROWS_AS((void)axpy(pv({1}), 1.0, pv({1, 2})), StructuralError);
}

TEST_CASE("non-finite entries rejected at construction") {
    CHECK_THROWS_AS(pv({1.0, std::nan("")}), ValidationError);
    CHECK_THROWS_AS(pv({std::numeric_limits<double>::infinity()}), ValidationError);
    CHECK_THROWS_AS(pv({}), ValidationError);
}

TEST_CASE("convex weighted_sum stays inside the coordinate envelope") {
    Rng rng(101);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t dim = 1 + rng.below(6);
        const std::size_t count = 2 + rng.below(4);
        std::vector<ParameterVector> vs;
        for (std::size_t k = 0; k < count; ++k) vs.push_back(random_vec(rng, dim));
        std::vector<double> w(count);
        double total = 0.0;
        for (auto& x : w) {
            x = rng.uniform();
            total += x;
        }
        for (auto& x : w) x /= total;

        const ParameterVector out = weighted_sum(vs, w);
        for (std::size_t i = 0; i < dim; ++i) {
            double lo = vs[0][i], hi = vs[0][i];
            for (const auto& v : vs) {
                lo = std::min(lo, v[i]);
                hi = std::max(hi, v[i]);
            }
            CHECK(out[i] >= lo - 1e-12);
            CHECK(out[i] <= hi + 1e-12);
        }
    }
}

TEST_CASE("l2_dist_sq symmetry and triangle inequality on square roots") {
    Rng rng(202);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t dim = 1 + rng.below(8);
        const auto a = random_vec(rng, dim);
        const auto b = random_vec(rng, dim);
        const auto c = random_vec(rng, dim);
        CHECK(l2_dist_sq(a, b) == l2_dist_sq(b, a));
        const double ab = std::sqrt(l2_dist_sq(a, b));
        const double bc = std::sqrt(l2_dist_sq(b, c));
        const double ac = std::sqrt(l2_dist_sq(a, c));
        CHECK(ac <= ab + bc + 1e-12);
    }
}

TEST_CASE("axpy round trip returns to the start") {
    Rng rng(303);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t dim = 1 + rng.below(8);
        const auto a = random_vec(rng, dim);
        const auto b = random_vec(rng, dim);
        const double s = rng.uniform(-4.0, 4.0);
        const ParameterVector back = axpy(axpy(a, s, b), -s, b);
        for (std::size_t i = 0; i < dim; ++i) {
            CHECK(std::fabs(back[i] - a[i]) <= 1e-12);
        }
    }
}

} // TEST_SUITE
