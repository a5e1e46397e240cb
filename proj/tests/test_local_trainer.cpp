#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "fedsim/dataset.hpp"
#include "fedsim/errors.hpp"
#include "fedsim/local_trainer.hpp"
#include "fedsim/param_vector.hpp"
#include "fedsim/rng.hpp"

using namespace fedsim;

namespace {

// Plain-SGD reference for logistic regression, written from the batching
// contract alone: per-epoch Fisher-Yates shuffle of the index list seeded by
// shuffle_seed, consecutive chunks of batch_size (last partial kept), mean
// cross-entropy gradient per chunk, theta -= lr * grad.
struct NaiveResult {
    std::vector<double> theta;
    double mean_loss;
};

NaiveResult naive_logistic_sgd(const ModelSpec& spec, const std::vector<double>& start,
                               const Dataset& data, const LocalTrainConfig& cfg) {
    const auto in = static_cast<std::size_t>(spec.input_dim);
    const auto cls = static_cast<std::size_t>(spec.num_classes);
    std::vector<double> theta = start;
    std::vector<std::size_t> idx(data.size());
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(cfg.shuffle_seed);

    double loss_sum = 0.0;
    long steps = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(idx);
        for (std::size_t begin = 0; begin < idx.size();
             begin += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end =
                std::min(begin + static_cast<std::size_t>(cfg.batch_size), idx.size());
            std::vector<double> grad(theta.size(), 0.0);
            double batch_loss = 0.0;
            for (std::size_t k = begin; k < end; ++k) {
                const std::size_t row = idx[k];
                std::vector<double> logits(cls);
                for (std::size_t c = 0; c < cls; ++c) logits[c] = theta[in * cls + c];
                for (std::size_t f = 0; f < in; ++f) {
                    const double xf = data.features.at(row, f);
                    for (std::size_t c = 0; c < cls; ++c) logits[c] += xf * theta[f * cls + c];
                }
                double mx = logits[0];
                for (std::size_t c = 1; c < cls; ++c) mx = std::max(mx, logits[c]);
                double sum = 0.0;
                for (std::size_t c = 0; c < cls; ++c) sum += std::exp(logits[c] - mx);
                const double lse = mx + std::log(sum);
                const auto y = static_cast<std::size_t>(data.labels[row]);
                batch_loss += lse - logits[y];
                std::vector<double> p(cls);
                for (std::size_t c = 0; c < cls; ++c) p[c] = std::exp(logits[c] - lse);
                p[y] -= 1.0;
                for (std::size_t f = 0; f < in; ++f) {
                    const double xf = data.features.at(row, f);
                    for (std::size_t c = 0; c < cls; ++c) grad[f * cls + c] += xf * p[c];
                }
                for (std::size_t c = 0; c < cls; ++c) grad[in * cls + c] += p[c];
            }
            const double inv = 1.0 / static_cast<double>(end - begin);
            for (auto& g : grad) g *= inv;
            loss_sum += batch_loss * inv;
            ++steps;
            for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= cfg.learning_rate * grad[i];
        }
    }
    return {theta, loss_sum / static_cast<double>(steps)};
}

Dataset small_task(std::uint64_t seed) { return gen_synthetic(3, 20, 4, 2.0, seed); }

} // namespace

TEST_SUITE("local_trainer") {

TEST_CASE("epochs zero returns the broadcast parameters untouched") {
    const Dataset data = small_task(7);
    ModelSpec spec{ModelKind::logistic_regression, 4, 0, 3, 0.2, 3};
    const ParameterVector start = init_model(spec);
    LocalTrainConfig cfg{0, 16, 0.1, 0.0, 55};
    const ClientReport rep = local_train(spec, start, data, cfg);
    CHECK(rep.params == start);
    CHECK(rep.step_count == 0);
    CHECK(rep.sample_count == 60);
    CHECK(rep.mean_loss > 0.0);
    CHECK(std::isfinite(rep.mean_loss));
}

TEST_CASE("plain SGD matches the naive reference bit for bit") {
    const Dataset data = small_task(11);
    ModelSpec spec{ModelKind::logistic_regression, 4, 0, 3, 0.3, 21};
    const ParameterVector start = init_model(spec);
    LocalTrainConfig cfg{3, 13, 0.07, 0.0, 9001}; // odd batch size leaves a partial batch

    const ClientReport rep = local_train(spec, start, data, cfg);
    const NaiveResult oracle = naive_logistic_sgd(spec, start.values(), data, cfg);

    REQUIRE(rep.params.dim() == oracle.theta.size());
    for (std::size_t i = 0; i < oracle.theta.size(); ++i) {
        CHECK(rep.params[i] == oracle.theta[i]);
    }
    CHECK(rep.mean_loss == oracle.mean_loss);
    CHECK(rep.step_count == 3 * 5); // ceil(60/13) = 5 batches per epoch
}

TEST_CASE("huge proximal strength pins the result to the broadcast model") {
    const Dataset data = small_task(13);
    ModelSpec spec{ModelKind::logistic_regression, 4, 0, 3, 0.5, 2};
    const ParameterVector start = init_model(spec);
    LocalTrainConfig cfg{2, 16, 1e-6, 1e6, 77};
    const ClientReport rep = local_train(spec, start, data, cfg);
    for (std::size_t i = 0; i < rep.params.dim(); ++i) {
        CHECK(std::fabs(rep.params[i] - start[i]) <= 1e-3);
    }
}

TEST_CASE("training is deterministic for identical inputs") {
    const Dataset data = small_task(17);
    ModelSpec spec{ModelKind::mlp_one_hidden, 4, 6, 3, 0.2, 5};
    const ParameterVector start = init_model(spec);
    LocalTrainConfig cfg{2, 8, 0.05, 0.0, 4242};
    const ClientReport a = local_train(spec, start, data, cfg);
    const ClientReport b = local_train(spec, start, data, cfg);
    CHECK(a.params == b.params);
    CHECK(a.mean_loss == b.mean_loss);
    CHECK(a.loss_sum == b.loss_sum);
}

TEST_CASE("distance to the broadcast model is non-increasing in mu") {
    const Dataset data = small_task(19);
    ModelSpec spec{ModelKind::logistic_regression, 4, 0, 3, 0.4, 8};
    const ParameterVector start = init_model(spec);

    double prev = std::numeric_limits<double>::infinity();
    for (double mu : {0.0, 0.5, 5.0, 50.0}) {
        LocalTrainConfig cfg{3, 16, 0.01, mu, 31337};
        const ClientReport rep = local_train(spec, start, data, cfg);
        const double dist = l2_dist_sq(rep.params, start);
        CHECK(dist <= prev + 1e-15);
        prev = dist;
    }
}

TEST_CASE("empty dataset is a usage error") {
    ModelSpec spec{ModelKind::logistic_regression, 4, 0, 3, 0.1, 0};
    Dataset empty;
    empty.class_count = 3;
    LocalTrainConfig cfg;
    CHECK_THROWS_AS((void)local_train(spec, init_model(spec), empty, cfg), UsageError);
}

TEST_CASE("mean per-step loss and raw sum stay consistent") {
    const Dataset data = small_task(23);
    ModelSpec spec{ModelKind::logistic_regression, 4, 0, 3, 0.2, 6};
    LocalTrainConfig cfg{2, 16, 0.05, 0.0, 11};
    const ClientReport rep = local_train(spec, init_model(spec), data, cfg);
    CHECK(rep.mean_loss ==
          doctest::Approx(rep.loss_sum / static_cast<double>(rep.step_count)).epsilon(1e-15));
}

} // TEST_SUITE
