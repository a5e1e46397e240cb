#include "fedsim/udp_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fedsim/errors.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

std::string to_string(NoiseModel m) {
    return m == NoiseModel::gaussian ? "gaussian" : "exponential";
}

NoiseModel noise_model_from_string(const std::string& s) {
    if (s == "gaussian") return NoiseModel::gaussian;
    if (s == "exponential") return NoiseModel::exponential;
    throw ValidationError("unknown noise model: '" + s + "'");
}

std::string to_string(DriftMethod m) {
    switch (m) {
        case DriftMethod::fedavg: return "fedavg";
        case DriftMethod::fedprox: return "fedprox";
        case DriftMethod::fedopt: return "fedopt";
        case DriftMethod::fedref: return "fedref";
    }
    return "?";
}

void DriftScenario::validate() const {
    if (!(delta > 0.0)) throw ValidationError("DriftScenario.delta must be > 0");
    if (!(eta > 0.0)) throw ValidationError("DriftScenario.eta must be > 0");
    if (!(lambda >= 0.0)) throw ValidationError("DriftScenario.lambda must be >= 0");
    if (!(anchor_gap >= 0.0)) throw ValidationError("DriftScenario.anchor_gap must be >= 0");
    if (!(prox_gap >= 0.0)) throw ValidationError("DriftScenario.prox_gap must be >= 0");
    if (!(c_opt >= 0.0)) throw ValidationError("DriftScenario.c_opt must be >= 0");
    if (!(noise_param > 0.0)) throw ValidationError("DriftScenario.noise_param must be > 0");
    if (samples < 1) throw ValidationError("DriftScenario.samples must be >= 1");
}

double threshold(DriftMethod method, const DriftScenario& s) {
    s.validate();
    const double base = s.delta / s.eta;
    switch (method) {
        case DriftMethod::fedavg: return base;
        case DriftMethod::fedref: return base - s.lambda * s.anchor_gap;
        case DriftMethod::fedopt: return base - s.c_opt;
        case DriftMethod::fedprox: return base - s.prox_gap;
    }
    throw UsageError("threshold: unknown method");
}

double tail_prob(double t, const DriftScenario& s) {
    s.validate();
    if (t <= 0.0) return 1.0;
    if (s.noise == NoiseModel::gaussian) {
        // |N(0, sigma^2)| exceeds t with probability erfc(t / (sigma*sqrt(2))).
        return std::erfc(t / (s.noise_param * std::sqrt(2.0)));
    }
    return std::exp(-s.noise_param * t);
}

namespace {

// Fixed batch layout so the estimate is identical however batches are
// scheduled.
constexpr long kMcBatch = 4096;

double draw_magnitude(Rng& rng, const DriftScenario& s) {
    if (s.noise == NoiseModel::gaussian) return std::fabs(s.noise_param * rng.normal());
    return rng.exponential(s.noise_param);
}

std::array<long, 5> mc_counts(const DriftScenario& s, const std::array<double, 5>& ts) {
    std::array<long, 5> counts{};
    const long batches = (s.samples + kMcBatch - 1) / kMcBatch;
    for (long b = 0; b < batches; ++b) {
        Rng rng(derive_seed(s.seed, static_cast<std::uint64_t>(b)));
        const long lo = b * kMcBatch;
        const long hi = std::min(s.samples, lo + kMcBatch);
        for (long i = lo; i < hi; ++i) {
            const double mag = draw_magnitude(rng, s);
            for (std::size_t k = 0; k < ts.size(); ++k) {
                if (mag > ts[k]) ++counts[k];
            }
        }
    }
    return counts;
}

} // namespace

std::array<double, 4> monte_carlo_tails(const DriftScenario& s) {
    s.validate();
    std::array<double, 5> ts{};
    for (std::size_t k = 0; k < 4; ++k) ts[k] = threshold(kDriftMethods[k], s);
    ts[4] = s.delta / s.eta + s.lambda * s.anchor_gap;
    const auto counts = mc_counts(s, ts);
    std::array<double, 4> out{};
    for (std::size_t k = 0; k < 4; ++k) {
        out[k] = static_cast<double>(counts[k]) / static_cast<double>(s.samples);
    }
    return out;
}

OrderingReport verify_ordering(const DriftScenario& s) {
    s.validate();
    OrderingReport rep;

    std::array<double, 5> ts{};
    for (std::size_t k = 0; k < 4; ++k) {
        rep.thresholds[k] = threshold(kDriftMethods[k], s);
        ts[k] = rep.thresholds[k];
    }
    rep.restoring_threshold = s.delta / s.eta + s.lambda * s.anchor_gap;
    ts[4] = rep.restoring_threshold;

    for (std::size_t k = 0; k < 4; ++k) {
        rep.closed_form[k] = tail_prob(rep.thresholds[k], s);
        rep.closed_form_log[k] = rep.closed_form[k] > 0.0
                                     ? std::log(rep.closed_form[k])
                                     : -std::numeric_limits<double>::infinity();
    }
    rep.restoring_closed_form = tail_prob(rep.restoring_threshold, s);

    const auto counts = mc_counts(s, ts);
    for (std::size_t k = 0; k < 4; ++k) {
        rep.monte_carlo[k] = static_cast<double>(counts[k]) / static_cast<double>(s.samples);
    }
    rep.restoring_monte_carlo = static_cast<double>(counts[4]) / static_cast<double>(s.samples);

    // Regime preconditions: the restoring pulls must be ordered
    // anchor < c_opt < prox, and every threshold in the strict chain must sit
    // where the tail is strictly decreasing (that is, be positive).
    const double anchor_pull = s.lambda * s.anchor_gap;
    rep.in_regime = true;
    if (!(anchor_pull < s.c_opt && s.c_opt < s.prox_gap)) {
        rep.in_regime = false;
        rep.regime_note = "out of regime: requires lambda*anchor_gap < c_opt < prox_gap";
    } else if (!(rep.thresholds[2] > 0.0)) { // fedopt
        rep.in_regime = false;
        rep.regime_note = "out of regime: delta/eta - c_opt must be positive";
    } else if (!(rep.thresholds[3] > 0.0)) { // fedref
        rep.in_regime = false;
        rep.regime_note = "out of regime: delta/eta - lambda*anchor_gap must be positive";
    }

    const auto p = rep.closed_form;
    const bool chain_cf = p[3] < p[2] && p[2] < p[1];
    const bool avg_cf = anchor_pull > 0.0 ? (rep.restoring_closed_form < p[0]) : true;
    rep.ordering_closed_form = chain_cf && avg_cf;

    auto sigma3 = [&](double prob) {
        return 3.0 * std::sqrt(std::max(prob * (1.0 - prob), 0.0) /
                               static_cast<double>(s.samples));
    };
    const auto& q = rep.monte_carlo;
    const bool chain_mc = q[3] < q[2] + sigma3(p[3]) + sigma3(p[2]) &&
                          q[2] < q[1] + sigma3(p[2]) + sigma3(p[1]);
    const bool avg_mc =
        anchor_pull > 0.0
            ? (rep.restoring_monte_carlo < q[0] + sigma3(rep.restoring_closed_form) + sigma3(p[0]))
            : true;
    rep.ordering_monte_carlo = chain_mc && avg_mc;

    bool agree = std::fabs(rep.restoring_monte_carlo - rep.restoring_closed_form) <=
                 sigma3(rep.restoring_closed_form) + 1e-12;
    for (std::size_t k = 0; k < 4; ++k) {
        agree = agree && std::fabs(q[k] - p[k]) <= sigma3(p[k]) + 1e-12;
    }
    rep.mc_within_3sigma = agree;

    return rep;
}

} // namespace fedsim
