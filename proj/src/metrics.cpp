#include "fedsim/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "fedsim/errors.hpp"

namespace fedsim {

std::string to_string(Orientation o) {
    return o == Orientation::lower_is_better ? "lower_is_better" : "higher_is_better";
}

Orientation orientation_from_string(const std::string& s) {
    if (s == "lower_is_better") return Orientation::lower_is_better;
    if (s == "higher_is_better") return Orientation::higher_is_better;
    throw ValidationError("unknown orientation: '" + s + "'");
}

void EvalSeries::validate() const {
    if (values.empty()) throw ValidationError("EvalSeries: empty series");
    for (double v : values) {
        if (!std::isfinite(v)) throw ValidationError("EvalSeries: non-finite entry");
    }
}

namespace {

double oriented(const EvalSeries& series, std::size_t i) {
    const double v = series.values[i];
    return series.orientation == Orientation::lower_is_better ? v : -v;
}

} // namespace

double forgetting_psi(const EvalSeries& series, int round, PsiVariant variant) {
    series.validate();
    if (round < 1 || static_cast<std::size_t>(round) > series.values.size()) {
        throw UsageError("forgetting_psi: round " + std::to_string(round) + " out of range [1, " +
                         std::to_string(series.values.size()) + "]");
    }
    if (round == 1) return 0.0;

    const auto r = static_cast<std::size_t>(round);
    const double current = oriented(series, r - 1);
    double best = oriented(series, 0);
    for (std::size_t i = 1; i < r - 1; ++i) best = std::min(best, oriented(series, i));
    if (variant == PsiVariant::inclusive_min) best = std::min(best, current);
    return current - best;
}

std::vector<double> forgetting_psi_series(const EvalSeries& series, PsiVariant variant) {
    series.validate();
    std::vector<double> out(series.values.size());
    double best = oriented(series, 0);
    out[0] = 0.0;
    for (std::size_t i = 1; i < series.values.size(); ++i) {
        const double current = oriented(series, i);
        const double floor_val = (variant == PsiVariant::inclusive_min)
                                     ? std::min(best, current)
                                     : best;
        out[i] = current - floor_val;
        best = std::min(best, current);
    }
    return out;
}

std::pair<double, double> split_psi(double psi) {
    if (!std::isfinite(psi)) throw ValidationError("split_psi: non-finite psi");
    return {std::max(psi, 0.0), std::max(-psi, 0.0)};
}

ZetaPair zeta(std::span<const double> psis) {
    if (psis.empty()) throw UsageError("zeta: empty input");
    ZetaPair out;
    for (double p : psis) {
        const auto [pos, neg] = split_psi(p);
        out.abs_sum += pos + neg;
        out.signed_sum += p;
    }
    return out;
}

double drift_magnitude(const ParameterVector& theta_next, const ParameterVector& theta) {
    return std::sqrt(l2_dist_sq(theta_next, theta));
}

TailEstimate empirical_udp(std::span<const double> drifts, double delta) {
    if (drifts.empty()) throw UsageError("empirical_udp: no drifts");
    if (!(delta > 0.0)) throw ValidationError("empirical_udp: delta must be > 0");
    std::size_t exceed = 0;
    for (double d : drifts) {
        if (d > delta) ++exceed;
    }
    TailEstimate est;
    est.probability = static_cast<double>(exceed) / static_cast<double>(drifts.size());
    if (exceed > 0) est.log_probability = std::log(est.probability);
    return est;
}

std::optional<int> rounds_to_target(const EvalSeries& series, double target) {
    series.validate();
    if (!std::isfinite(target)) throw ValidationError("rounds_to_target: non-finite target");
    for (std::size_t i = 0; i < series.values.size(); ++i) {
        const bool met = series.orientation == Orientation::lower_is_better
                             ? series.values[i] <= target
                             : series.values[i] >= target;
        if (met) return static_cast<int>(i) + 1;
    }
    return std::nullopt;
}

} // namespace fedsim
