#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fedsim/param_vector.hpp"

namespace fedsim {

enum class Orientation { lower_is_better, higher_is_better };

std::string to_string(Orientation o);
Orientation orientation_from_string(const std::string& s);

// One evaluation metric observed once per round.
struct EvalSeries {
    std::vector<double> values;
    Orientation orientation = Orientation::lower_is_better;
    std::string metric_name;

    void validate() const;
};

// Two readings of the per-round forgetting gap:
//   exclusive_prior_min: value minus the best over STRICTLY EARLIER rounds;
//     negative values mark improvement. This is the reported variant.
//   inclusive_min: value minus the best over rounds 1..r including r itself;
//     never negative.
// Round 1 is 0 by convention in both (no earlier model to forget against).
// higher-is-better series are negated internally so "best" is a minimum.
enum class PsiVariant { exclusive_prior_min, inclusive_min };

double forgetting_psi(const EvalSeries& series, int round,
                      PsiVariant variant = PsiVariant::exclusive_prior_min);

// Convenience: psi at every round 1..len, same convention.
std::vector<double> forgetting_psi_series(const EvalSeries& series,
                                          PsiVariant variant = PsiVariant::exclusive_prior_min);

// (positive part, negated negative part); exactly one nonzero unless psi == 0.
std::pair<double, double> split_psi(double psi);

struct ZetaPair {
    double abs_sum = 0.0;    // sum of |psi| = sum(psi* + psi^)
    double signed_sum = 0.0; // plain sum of psi
};

ZetaPair zeta(std::span<const double> psis);

// Euclidean norm of the per-round global update.
double drift_magnitude(const ParameterVector& theta_next, const ParameterVector& theta);

// Exceedance estimate over observed drifts. log_probability is empty when no
// round exceeded the threshold (probability zero has no finite log).
struct TailEstimate {
    double probability = 0.0;
    std::optional<double> log_probability;
};

TailEstimate empirical_udp(std::span<const double> drifts, double delta);

// First 1-based round meeting/beating the target under the series
// orientation; empty if never reached.
std::optional<int> rounds_to_target(const EvalSeries& series, double target);

} // namespace fedsim
