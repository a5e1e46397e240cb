#pragma once

#include <cstdint>

#include "fedsim/dataset.hpp"
#include "fedsim/model.hpp"
#include "fedsim/param_vector.hpp"

namespace fedsim {

// Client-side loop controls. proximal_mu == 0 is plain SGD; > 0 adds the
// proximal pull toward the broadcast model (gradient mu * (theta - theta_g)).
struct LocalTrainConfig {
    int epochs = 3;
    int batch_size = 32;
    double learning_rate = 0.05;
    double proximal_mu = 0.0;
    std::uint64_t shuffle_seed = 0;

    void validate() const;
    bool operator==(const LocalTrainConfig&) const = default;
};

// What a client sends back after one round of local training.
struct ClientReport {
    ParameterVector params;
    double mean_loss = 0.0;   // mean per-step training loss across the run
    long sample_count = 0;

    // Telemetry: the un-normalized per-step loss sum and how many SGD steps
    // produced it.
    double loss_sum = 0.0;
    long step_count = 0;
};

// Mini-batch SGD starting from global_params. Each epoch visits the client's
// data in a freshly shuffled order (stream seeded by cfg.shuffle_seed), in
// chunks of batch_size with the last partial batch kept. epochs == 0 returns
// global_params unchanged with the loss evaluated once over all data.
//
// Pure function of its inputs; instances for different clients may run
// concurrently.
ClientReport local_train(const ModelSpec& spec, const ParameterVector& global_params,
                         const Dataset& data, const LocalTrainConfig& cfg);

} // namespace fedsim
