#include "fedsim/strategies.hpp"

#include <cmath>

#include "fedsim/errors.hpp"

namespace fedsim {

namespace {

void check_reports(std::span<const ClientReport> reports, const char* op) {
    if (reports.empty()) throw UsageError(std::string(op) + ": no reports");
    const std::size_t dim = reports[0].params.dim();
    long total = 0;
    for (const auto& r : reports) {
        if (r.params.dim() != dim) {
            throw StructuralError(std::string(op) + ": report parameter dims differ");
        }
        if (r.sample_count < 0) throw ValidationError(std::string(op) + ": negative sample count");
        total += r.sample_count;
    }
    if (total <= 0) throw UsageError(std::string(op) + ": all sample counts are zero");
}

} // namespace

ParameterVector fedavg_aggregate(std::span<const ClientReport> reports) {
    check_reports(reports, "fedavg_aggregate");
    double total = 0.0;
    for (const auto& r : reports) total += static_cast<double>(r.sample_count);
    std::vector<ParameterVector> params;
    std::vector<double> weights;
    params.reserve(reports.size());
    weights.reserve(reports.size());
    for (const auto& r : reports) {
        params.push_back(r.params);
        weights.push_back(static_cast<double>(r.sample_count) / total);
    }
    return weighted_sum(params, weights);
}

double aggregate_loss(std::span<const ClientReport> reports) {
    check_reports(reports, "aggregate_loss");
    double total = 0.0;
    for (const auto& r : reports) total += static_cast<double>(r.sample_count);
    double acc = 0.0;
    for (const auto& r : reports) {
        acc += (static_cast<double>(r.sample_count) / total) * r.mean_loss;
    }
    return acc;
}

std::string to_string(FedOptVariant v) {
    switch (v) {
        case FedOptVariant::adam: return "adam";
        case FedOptVariant::yogi: return "yogi";
        case FedOptVariant::adagrad: return "adagrad";
    }
    return "?";
}

FedOptVariant fedopt_variant_from_string(const std::string& s) {
    if (s == "adam") return FedOptVariant::adam;
    if (s == "yogi") return FedOptVariant::yogi;
    if (s == "adagrad") return FedOptVariant::adagrad;
    throw ValidationError("unknown fedopt variant: '" + s + "'");
}

FedOptState FedOptState::init(FedOptVariant variant, std::size_t dim, double eta_s, double beta1,
                              double beta2, double tau) {
    FedOptState s;
    s.variant = variant;
    s.m = ParameterVector::zeros(dim);
    s.v = ParameterVector::zeros(dim);
    s.step_count = 0;
    s.eta_s = eta_s;
    s.beta1 = beta1;
    s.beta2 = beta2;
    s.tau = tau;
    s.validate();
    return s;
}

void FedOptState::validate() const {
    if (!(eta_s > 0.0)) throw ValidationError("FedOptState.eta_s must be > 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ValidationError("FedOptState.beta1 must be in [0,1)");
    if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ValidationError("FedOptState.beta2 must be in [0,1)");
    if (!(tau > 0.0)) throw ValidationError("FedOptState.tau must be > 0");
    if (m.dim() != v.dim()) throw StructuralError("FedOptState: m/v dim mismatch");
}

std::pair<ParameterVector, FedOptState> fedopt_step(const FedOptState& state,
                                                    const ParameterVector& theta_prev,
                                                    const ParameterVector& theta_agg) {
    state.validate();
    if (theta_prev.dim() != theta_agg.dim() || theta_prev.dim() != state.m.dim()) {
        throw StructuralError("fedopt_step: dimension mismatch");
    }

    const std::size_t dim = theta_prev.dim();
    std::vector<double> g(dim);
    for (std::size_t i = 0; i < dim; ++i) g[i] = theta_prev[i] - theta_agg[i];

    FedOptState next = state;
    next.step_count = state.step_count + 1;
    std::vector<double> theta(dim);

    if (state.variant == FedOptVariant::adagrad) {
        std::vector<double> v(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            v[i] = state.v[i] + g[i] * g[i];
            theta[i] = theta_prev[i] - state.eta_s * g[i] / (std::sqrt(v[i]) + state.tau);
        }
        next.v = ParameterVector(std::move(v));
        return {ParameterVector(std::move(theta)), std::move(next)};
    }

    const auto t = static_cast<double>(next.step_count);
    const double bc1 = 1.0 - std::pow(state.beta1, t);
    const double bc2 = 1.0 - std::pow(state.beta2, t);
    std::vector<double> m(dim);
    std::vector<double> v(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        const double g2 = g[i] * g[i];
        m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g[i];
        if (state.variant == FedOptVariant::adam) {
            v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g2;
        } else { // yogi
            const double diff = state.v[i] - g2;
            const double sign = (diff > 0.0) ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
            v[i] = state.v[i] - (1.0 - state.beta2) * sign * g2;
        }
        const double m_hat = m[i] / bc1;
        const double v_hat = v[i] / bc2;
        theta[i] = theta_prev[i] - state.eta_s * m_hat / (std::sqrt(v_hat) + state.tau);
    }
    next.m = ParameterVector(std::move(m));
    next.v = ParameterVector(std::move(v));
    return {ParameterVector(std::move(theta)), std::move(next)};
}

ReferenceBuffer::ReferenceBuffer(int capacity) : capacity_(capacity) {
    if (capacity < 1) throw ValidationError("ReferenceBuffer capacity must be >= 1");
}

void ReferenceBuffer::push(ParameterVector v) {
    if (!entries_.empty() && entries_.front().dim() != v.dim()) {
        throw StructuralError("ReferenceBuffer: entry dim mismatch");
    }
    entries_.push_back(std::move(v));
    if (static_cast<int>(entries_.size()) > capacity_) entries_.pop_front();
}

const ParameterVector& ReferenceBuffer::newest() const {
    if (entries_.empty()) throw UsageError("ReferenceBuffer: empty");
    return entries_.back();
}

std::vector<double> ref_estimate_weights(int rho) {
    if (rho < 1) throw UsageError("ref_estimate_weights: rho must be >= 1");
    const double phi = static_cast<double>(rho) * static_cast<double>(rho + 1) / 2.0;
    std::vector<double> w(static_cast<std::size_t>(rho));
    for (int i = 1; i <= rho; ++i) {
        w[static_cast<std::size_t>(i - 1)] = static_cast<double>(rho - i + 1) / phi;
    }
    return w;
}

ParameterVector ref_estimate(const ReferenceBuffer& buffer) {
    if (!buffer.full()) {
        throw UsageError("ref_estimate: buffer holds " + std::to_string(buffer.size()) +
                         " of " + std::to_string(buffer.capacity()) + " entries");
    }
    const int rho = buffer.capacity();
    const auto weights = ref_estimate_weights(rho); // newest-first
    std::vector<ParameterVector> entries;
    std::vector<double> w;
    entries.reserve(static_cast<std::size_t>(rho));
    w.reserve(static_cast<std::size_t>(rho));
    for (int i = 0; i < rho; ++i) {
        entries.push_back(buffer.entry(rho - 1 - i)); // newest first
        w.push_back(weights[static_cast<std::size_t>(i)]);
    }
    return weighted_sum(entries, w);
}

LambdaSchedule LambdaSchedule::defaults() {
    return LambdaSchedule{};
}

void LambdaSchedule::validate() const {
    if (!(lambda_ref_0 >= 0.0)) throw ValidationError("LambdaSchedule.lambda_ref_0 must be >= 0");
    if (!(lambda_ref_top >= lambda_ref_0)) {
        throw ValidationError("LambdaSchedule.lambda_ref_top must be >= lambda_ref_0");
    }
    if (sigma_r < 1) throw ValidationError("LambdaSchedule.sigma_r must be >= 1");
    if (!(sigma_w > 0.0)) throw ValidationError("LambdaSchedule.sigma_w must be > 0");
    if (!(current >= lambda_ref_0 && current <= lambda_ref_top)) {
        throw ValidationError("LambdaSchedule.current out of [lambda_ref_0, lambda_ref_top]");
    }
}

LambdaSchedule lambda_tick(const LambdaSchedule& schedule, int round) {
    if (round < 1) throw UsageError("lambda_tick: round must be >= 1");
    schedule.validate();
    LambdaSchedule next = schedule;
    if (round % schedule.sigma_r == 0) {
        next.current = schedule.current * schedule.sigma_w;
        if (next.current >= schedule.lambda_ref_top) next.current = schedule.lambda_ref_top;
    }
    return next;
}

void FedRefConfig::validate() const {
    if (!(lambda_g >= 0.0)) throw ValidationError("FedRefConfig.lambda_g must be >= 0");
    if (rho < 1) throw ValidationError("FedRefConfig.rho must be >= 1");
    if (!(server_eta >= 0.0)) throw ValidationError("FedRefConfig.server_eta must be >= 0");
    schedule.validate();
}

ParameterVector fedref_finetune(const ParameterVector& theta_agg,
                                const ParameterVector& theta_prev_global,
                                const ParameterVector& theta_ref, double aggregated_loss,
                                const FedRefConfig& cfg) {
    cfg.validate();
    (void)aggregated_loss; // telemetry only; no server-side gradient
    if (theta_agg.dim() != theta_prev_global.dim() || theta_agg.dim() != theta_ref.dim()) {
        throw StructuralError("fedref_finetune: dimension mismatch");
    }
    const double lambda_ref = cfg.literal_l2 ? 0.0 : cfg.schedule.current;
    const std::size_t dim = theta_agg.dim();
    std::vector<double> out(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        const double grad = 2.0 * cfg.lambda_g * (theta_agg[i] - theta_prev_global[i]) +
                            2.0 * lambda_ref * (theta_agg[i] - theta_ref[i]);
        out[i] = theta_agg[i] - cfg.server_eta * grad;
    }
    return ParameterVector(std::move(out));
}

FedRefState FedRefState::init(const FedRefConfig& cfg) {
    cfg.validate();
    return FedRefState{cfg, ReferenceBuffer(cfg.rho)};
}

std::pair<ParameterVector, FedRefState> fedref_round(FedRefState state,
                                                     std::span<const ClientReport> reports,
                                                     int round) {
    if (round < 1) throw UsageError("fedref_round: round must be >= 1");

    if (round <= state.cfg.rho) {
        ParameterVector out = fedavg_aggregate(reports);
        state.buffer.push(out);
        return {std::move(out), std::move(state)};
    }

    state.cfg.schedule = lambda_tick(state.cfg.schedule, round);
    const double f_g = aggregate_loss(reports);
    const ParameterVector agg = fedavg_aggregate(reports);
    const ParameterVector& prev_global = state.buffer.newest();
    const ParameterVector ref = ref_estimate(state.buffer);
    ParameterVector out = fedref_finetune(agg, prev_global, ref, f_g, state.cfg);
    state.buffer.push(out);
    return {std::move(out), std::move(state)};
}

} // namespace fedsim
