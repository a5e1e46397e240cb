#include "fedsim/param_vector.hpp"

#include <cmath>
#include <string>

namespace fedsim {

namespace {

void require_same_dim(std::size_t a, std::size_t b, const char* op) {
    if (a != b) {
        throw StructuralError(std::string(op) + ": dimension mismatch (" +
                              std::to_string(a) + " vs " + std::to_string(b) + ")");
    }
}

} // namespace

ParameterVector::ParameterVector(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) {
        throw ValidationError("ParameterVector: dim must be positive");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            throw ValidationError("ParameterVector: non-finite entry at index " +
                                  std::to_string(i));
        }
    }
}

ParameterVector ParameterVector::zeros(std::size_t dim) {
    if (dim == 0) throw ValidationError("ParameterVector::zeros: dim must be positive");
    return ParameterVector(std::vector<double>(dim, 0.0));
}

ParameterVector weighted_sum(std::span<const ParameterVector> vectors,
                             std::span<const double> weights) {
    if (vectors.empty()) throw UsageError("weighted_sum: empty input");
    if (vectors.size() != weights.size()) {
        throw UsageError("weighted_sum: " + std::to_string(vectors.size()) + " vectors vs " +
                         std::to_string(weights.size()) + " weights");
    }
    const std::size_t dim = vectors[0].dim();
    for (const auto& v : vectors) require_same_dim(dim, v.dim(), "weighted_sum");
    for (double w : weights) {
        if (!std::isfinite(w)) throw ValidationError("weighted_sum: non-finite weight");
    }

    std::vector<double> out(dim, 0.0);
    for (std::size_t k = 0; k < vectors.size(); ++k) {
        const double w = weights[k];
        const auto& v = vectors[k].values();
        for (std::size_t i = 0; i < dim; ++i) out[i] += w * v[i];
    }
    return ParameterVector(std::move(out));
}

double l2_dist_sq(const ParameterVector& a, const ParameterVector& b) {
    require_same_dim(a.dim(), b.dim(), "l2_dist_sq");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

ParameterVector axpy(const ParameterVector& a, double scale, const ParameterVector& b) {
    require_same_dim(a.dim(), b.dim(), "axpy");
    std::vector<double> out(a.dim());
    for (std::size_t i = 0; i < a.dim(); ++i) out[i] = a[i] + scale * b[i];
    return ParameterVector(std::move(out));
}

} // namespace fedsim
