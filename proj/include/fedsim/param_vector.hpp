#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fedsim/errors.hpp"

namespace fedsim {

// Flat dense vector of model parameters; the currency every strategy and
// learner trades in. Entries are validated finite at construction and
// immutable afterwards, so instances are safe to share across threads.
class ParameterVector {
public:
    ParameterVector() = default; // empty sentinel, dim 0

    explicit ParameterVector(std::vector<double> values);

    static ParameterVector zeros(std::size_t dim);

    std::size_t dim() const { return values_.size(); }
    bool empty() const { return values_.empty(); }

    double operator[](std::size_t i) const { return values_[i]; }
    const std::vector<double>& values() const { return values_; }
    std::span<const double> span() const { return values_; }

    bool operator==(const ParameterVector& other) const = default;

private:
    std::vector<double> values_;
};

// Elementwise sum of w_i * v_i. Weights are used as given, never renormalized.
ParameterVector weighted_sum(std::span<const ParameterVector> vectors,
                             std::span<const double> weights);

// Squared Euclidean distance.
double l2_dist_sq(const ParameterVector& a, const ParameterVector& b);

// a + scale * b.
ParameterVector axpy(const ParameterVector& a, double scale, const ParameterVector& b);

} // namespace fedsim
