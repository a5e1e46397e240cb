#pragma once

#include <deque>
#include <span>
#include <string>
#include <utility>

#include "fedsim/local_trainer.hpp"
#include "fedsim/param_vector.hpp"

namespace fedsim {

// Sample-count-weighted average of client parameters; weights n_k / sum(n).
ParameterVector fedavg_aggregate(std::span<const ClientReport> reports);

// Sample-count-weighted average of client-reported mean losses.
double aggregate_loss(std::span<const ClientReport> reports);

// ---------------------------------------------------------------------------
// Server-side adaptive optimizers over the pseudo-gradient
// g = theta_prev - theta_agg.

enum class FedOptVariant { adam, yogi, adagrad };

std::string to_string(FedOptVariant v);
FedOptVariant fedopt_variant_from_string(const std::string& s);

struct FedOptState {
    FedOptVariant variant = FedOptVariant::adam;
    ParameterVector m;
    ParameterVector v;
    long step_count = 0;
    double eta_s = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.99;
    double tau = 1e-4;

    static FedOptState init(FedOptVariant variant, std::size_t dim, double eta_s, double beta1,
                            double beta2, double tau);
    void validate() const;
};

// One server step. adam/yogi keep first and second moments with bias
// correction; adagrad accumulates squared pseudo-gradients and steps without
// momentum. Returns the new global and the advanced state.
std::pair<ParameterVector, FedOptState> fedopt_step(const FedOptState& state,
                                                    const ParameterVector& theta_prev,
                                                    const ParameterVector& theta_agg);

// ---------------------------------------------------------------------------
// Reference model machinery.

// Ring buffer of the most recent broadcast globals, oldest evicted first.
class ReferenceBuffer {
public:
    explicit ReferenceBuffer(int capacity);

    void push(ParameterVector v);
    int capacity() const { return capacity_; }
    int size() const { return static_cast<int>(entries_.size()); }
    bool full() const { return size() == capacity_; }

    // 0 is oldest.
    const ParameterVector& entry(int i) const { return entries_.at(static_cast<std::size_t>(i)); }
    const ParameterVector& newest() const;

private:
    int capacity_;
    std::deque<ParameterVector> entries_;
};

// Age-decaying weights over a full buffer of size rho: position i counted
// from the newest (i = 1) gets (rho - i + 1) / phi with phi = sum_{1..rho} i,
// so weights sum to 1 and fall off linearly with age. Returned newest-first.
std::vector<double> ref_estimate_weights(int rho);

// Weighted sum of the buffered globals under ref_estimate_weights. The buffer
// must hold exactly `capacity` entries.
ParameterVector ref_estimate(const ReferenceBuffer& buffer);

// Regularization-strength schedule: multiplied by sigma_w every sigma_r
// rounds, clamped to lambda_ref_top.
struct LambdaSchedule {
    double lambda_ref_0 = 1e-6;
    double lambda_ref_top = 5e-3;
    int sigma_r = 10;
    double sigma_w = 10.0;
    double current = 1e-6;

    static LambdaSchedule defaults();
    void validate() const;
    bool operator==(const LambdaSchedule&) const = default;
};

// Advance the schedule at round r (no-op unless r mod sigma_r == 0).
LambdaSchedule lambda_tick(const LambdaSchedule& schedule, int round);

struct FedRefConfig {
    double lambda_g = 0.01;
    LambdaSchedule schedule;
    int rho = 3;
    double server_eta = 1.0;
    // When set, only the previous-global anchor contributes to the fine-tune
    // gradient (the reference-difference penalty read literally is constant
    // in the optimized parameters and contributes nothing).
    bool literal_l2 = false;

    void validate() const;
    bool operator==(const FedRefConfig&) const = default;
};

// Single server-side fine-tuning step: one gradient-descent step on the two
// quadratic anchors evaluated at theta_agg,
//   g = 2*lambda_g*(theta_agg - theta_prev_global)
//     + 2*lambda_ref*(theta_agg - theta_ref),
// returning theta_agg - server_eta * g. The aggregated client loss F_g has no
// server-computable gradient and is carried for telemetry only.
ParameterVector fedref_finetune(const ParameterVector& theta_agg,
                                const ParameterVector& theta_prev_global,
                                const ParameterVector& theta_ref, double aggregated_loss,
                                const FedRefConfig& cfg);

struct FedRefState {
    FedRefConfig cfg;
    ReferenceBuffer buffer;

    static FedRefState init(const FedRefConfig& cfg);
};

// One full server round: plain averaging while the buffer is still filling
// (round <= rho), afterwards schedule tick -> aggregate -> reference estimate
// -> fine-tune. The broadcast (post-fine-tune) model is what enters the
// buffer.
std::pair<ParameterVector, FedRefState> fedref_round(FedRefState state,
                                                     std::span<const ClientReport> reports,
                                                     int round);

} // namespace fedsim
