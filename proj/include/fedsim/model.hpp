#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fedsim/matrix.hpp"
#include "fedsim/param_vector.hpp"

namespace fedsim {

enum class ModelKind { logistic_regression, mlp_one_hidden };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);

// Shape and init recipe for the client predictor. The parameter layout is
// fixed by kind:
//   logistic:   W[input_dim x num_classes], b[num_classes]
//   mlp_hidden: W1[input_dim x hidden], b1[hidden], W2[hidden x num_classes],
//               b2[num_classes]   (tanh hidden activation)
struct ModelSpec {
    ModelKind kind = ModelKind::logistic_regression;
    int input_dim = 0;
    int hidden_dim = 0; // ignored for logistic
    int num_classes = 0;
    double init_scale = 0.1;
    std::uint64_t init_seed = 0;

    void validate() const;
    std::size_t param_count() const;

    bool operator==(const ModelSpec&) const = default;
};

// One mini-batch: feature rows plus class labels in [0, num_classes).
struct Batch {
    Matrix features;
    std::vector<int> labels;

    std::size_t size() const { return labels.size(); }
    void validate(int num_classes) const;
};

// Deterministic init: normal(0,1) * init_scale, seeded by init_seed.
ParameterVector init_model(const ModelSpec& spec);

// Mean softmax cross-entropy over the batch and its analytic gradient.
std::pair<double, ParameterVector> loss_and_grad(const ModelSpec& spec,
                                                 const ParameterVector& params,
                                                 const Batch& batch);

// Workspace variant used by the training loop: evaluates the loss over the
// rows `indices` of `features`, accumulating the gradient into grad_out
// (which is zeroed first). Returns the mean loss.
double loss_and_grad_rows(const ModelSpec& spec, std::span<const double> params,
                          const Matrix& features, std::span<const int> labels,
                          std::span<const std::size_t> indices, std::span<double> grad_out);

// Mean loss only (no gradient), over the given rows.
double mean_loss_rows(const ModelSpec& spec, std::span<const double> params,
                      const Matrix& features, std::span<const int> labels,
                      std::span<const std::size_t> indices);

// Argmax class prediction for one feature row (ties break to the lowest index).
int predict_class(const ModelSpec& spec, std::span<const double> params,
                  std::span<const double> features);

} // namespace fedsim
