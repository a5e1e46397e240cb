#include "fedsim/local_trainer.hpp"

#include <cmath>
#include <numeric>

#include "fedsim/errors.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

void LocalTrainConfig::validate() const {
    if (epochs < 0) throw ValidationError("LocalTrainConfig.epochs must be >= 0");
    if (batch_size < 1) throw ValidationError("LocalTrainConfig.batch_size must be >= 1");
    if (!(learning_rate > 0.0)) throw ValidationError("LocalTrainConfig.learning_rate must be > 0");
    if (!(proximal_mu >= 0.0)) throw ValidationError("LocalTrainConfig.proximal_mu must be >= 0");
}

ClientReport local_train(const ModelSpec& spec, const ParameterVector& global_params,
                         const Dataset& data, const LocalTrainConfig& cfg) {
    spec.validate();
    cfg.validate();
    if (data.size() == 0) throw UsageError("local_train: empty dataset");
    data.validate();
    if (global_params.dim() != spec.param_count()) {
        throw StructuralError("local_train: global params dim != model param count");
    }

    const std::size_t n = data.size();
    ClientReport report;
    report.sample_count = static_cast<long>(n);

    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);

    if (cfg.epochs == 0) {
        const double loss =
            mean_loss_rows(spec, global_params.span(), data.features, data.labels, all);
        report.params = global_params;
        report.mean_loss = loss;
        report.loss_sum = loss;
        report.step_count = 0;
        return report;
    }

    std::vector<double> theta = global_params.values();
    std::vector<double> grad(theta.size());
    const std::vector<double>& anchor = global_params.values();

    double loss_sum = 0.0;
    long steps = 0;
    Rng shuffle_rng(cfg.shuffle_seed);
    const auto bs = static_cast<std::size_t>(cfg.batch_size);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle_rng.shuffle(all);
        for (std::size_t begin = 0; begin < n; begin += bs) {
            const std::size_t end = std::min(begin + bs, n);
            const std::span<const std::size_t> batch(all.data() + begin, end - begin);
            const double loss =
                loss_and_grad_rows(spec, theta, data.features, data.labels, batch, grad);
            loss_sum += loss;
            ++steps;
            if (cfg.proximal_mu > 0.0) {
                for (std::size_t i = 0; i < theta.size(); ++i) {
                    grad[i] += cfg.proximal_mu * (theta[i] - anchor[i]);
                }
            }
            for (std::size_t i = 0; i < theta.size(); ++i) {
                theta[i] -= cfg.learning_rate * grad[i];
            }
        }
    }

    report.params = ParameterVector(std::move(theta));
    report.mean_loss = loss_sum / static_cast<double>(steps);
    report.loss_sum = loss_sum;
    report.step_count = steps;
    return report;
}

} // namespace fedsim
