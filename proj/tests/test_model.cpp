#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "fedsim/errors.hpp"
#include "fedsim/model.hpp"
#include "fedsim/rng.hpp"

using namespace fedsim;

namespace {

Batch random_batch(Rng& rng, int rows, int input_dim, int classes) {
    Batch b;
    b.features = Matrix(static_cast<std::size_t>(rows), static_cast<std::size_t>(input_dim));
    for (auto& x : b.features.data) x = rng.normal();
    b.labels.resize(static_cast<std::size_t>(rows));
    for (auto& y : b.labels) y = static_cast<int>(rng.below(static_cast<std::uint64_t>(classes)));
    return b;
}

// Central finite differences of the loss, the independent check on the
// analytic gradient.
std::vector<double> fd_gradient(const ModelSpec& spec, const ParameterVector& params,
                                const Batch& batch, double h) {
    std::vector<double> grad(params.dim());
    for (std::size_t i = 0; i < params.dim(); ++i) {
        std::vector<double> plus = params.values();
        std::vector<double> minus = params.values();
        plus[i] += h;
        minus[i] -= h;
        const double lp = loss_and_grad(spec, ParameterVector(plus), batch).first;
        const double lm = loss_and_grad(spec, ParameterVector(minus), batch).first;
        grad[i] = (lp - lm) / (2.0 * h);
    }
    return grad;
}

double max_rel_error(const std::vector<double>& a, const std::vector<double>& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double denom = std::max({std::fabs(a[i]), std::fabs(b[i]), 1e-6});
        worst = std::max(worst, std::fabs(a[i] - b[i]) / denom);
    }
    return worst;
}

} // namespace

TEST_SUITE("model") {

TEST_CASE("init_model zero scale gives the zero vector") {
    ModelSpec spec{ModelKind::logistic_regression, 2, 0, 2, 0.0, 7};
    const auto w = init_model(spec);
    CHECK(w.dim() == 6);
    for (std::size_t i = 0; i < w.dim(); ++i) CHECK(w[i] == 0.0);
}

TEST_CASE("init_model is deterministic per seed") {
    ModelSpec spec{ModelKind::mlp_one_hidden, 5, 4, 3, 0.3, 99};
    CHECK(init_model(spec) == init_model(spec));
    ModelSpec other = spec;
    other.init_seed = 100;
    CHECK(init_model(spec) != init_model(other));
}

TEST_CASE("parameter counts follow the layout") {
    ModelSpec mlp{ModelKind::mlp_one_hidden, 4, 8, 3, 0.1, 0};
    CHECK(mlp.param_count() == 67); // 4*8+8 + 8*3+3
    ModelSpec logit{ModelKind::logistic_regression, 10, 0, 4, 0.1, 0};
    CHECK(logit.param_count() == 44);
    CHECK(init_model(mlp).dim() == 67);
}

TEST_CASE("zero logistic parameters give uniform softmax loss ln(classes)") {
    Rng rng(5);
    for (int classes : {2, 5}) {
        ModelSpec spec{ModelKind::logistic_regression, 3, 0, classes, 0.0, 0};
        const Batch batch = random_batch(rng, 8, 3, classes);
        const auto [loss, grad] = loss_and_grad(spec, init_model(spec), batch);
        CHECK(loss == doctest::Approx(std::log(classes)).epsilon(1e-12));
        CHECK(grad.dim() == spec.param_count());
    }
}

TEST_CASE("analytic gradient matches central finite differences") {
    Rng rng(42);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const bool mlp = trial % 2 == 1;
        const int input_dim = 2 + static_cast<int>(rng.below(4));
        const int classes = 2 + static_cast<int>(rng.below(3));
        const int hidden = 2 + static_cast<int>(rng.below(5));
        ModelSpec spec{mlp ? ModelKind::mlp_one_hidden : ModelKind::logistic_regression,
                       input_dim, hidden, classes, 0.5, 1000 + static_cast<std::uint64_t>(trial)};
        const ParameterVector params = init_model(spec);
        const Batch batch = random_batch(rng, 3 + static_cast<int>(rng.below(6)), input_dim, classes);

        const auto [loss, grad] = loss_and_grad(spec, params, batch);
        CHECK(loss >= 0.0);
        const auto fd = fd_gradient(spec, params, batch, 1e-5);
        worst = std::max(worst, max_rel_error(grad.values(), fd));
    }
    CHECK(worst <= 1e-4);
}

TEST_CASE("duplicating every batch row leaves loss and gradient unchanged") {
    Rng rng(77);
    ModelSpec spec{ModelKind::mlp_one_hidden, 3, 4, 3, 0.4, 11};
    const ParameterVector params = init_model(spec);
    const Batch batch = random_batch(rng, 5, 3, 3);

    Batch doubled;
    doubled.features = Matrix(batch.size() * 2, batch.features.cols);
    doubled.labels.resize(batch.size() * 2);
    for (std::size_t rep = 0; rep < 2; ++rep) {
        for (std::size_t i = 0; i < batch.size(); ++i) {
            for (std::size_t f = 0; f < batch.features.cols; ++f) {
                doubled.features.at(rep * batch.size() + i, f) = batch.features.at(i, f);
            }
            doubled.labels[rep * batch.size() + i] = batch.labels[i];
        }
    }

    const auto [l1, g1] = loss_and_grad(spec, params, batch);
    const auto [l2, g2] = loss_and_grad(spec, params, doubled);
    CHECK(l1 == doctest::Approx(l2).epsilon(1e-12));
    for (std::size_t i = 0; i < g1.dim(); ++i) {
        CHECK(g1[i] == doctest::Approx(g2[i]).epsilon(1e-12));
    }
}

TEST_CASE("dimension mismatches are structural errors") {
    ModelSpec spec{ModelKind::logistic_regression, 3, 0, 2, 0.1, 0};
    Rng rng(1);
    const Batch batch = random_batch(rng, 4, 3, 2);
    CHECK_THROWS_AS((void)loss_and_grad(spec, ParameterVector::zeros(5), batch), StructuralError);
}

} // TEST_SUITE
