#include "fedsim/model.hpp"

#include <algorithm>
#include <cmath>

#include "fedsim/errors.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::logistic_regression: return "logistic_regression";
        case ModelKind::mlp_one_hidden: return "mlp_one_hidden";
    }
    return "?";
}

ModelKind model_kind_from_string(const std::string& s) {
    if (s == "logistic_regression") return ModelKind::logistic_regression;
    if (s == "mlp_one_hidden") return ModelKind::mlp_one_hidden;
    throw ValidationError("unknown model kind: '" + s + "'");
}

void ModelSpec::validate() const {
    if (input_dim < 1) throw ValidationError("ModelSpec.input_dim must be >= 1");
    if (num_classes < 2) throw ValidationError("ModelSpec.num_classes must be >= 2");
    if (kind == ModelKind::mlp_one_hidden && hidden_dim < 1) {
        throw ValidationError("ModelSpec.hidden_dim must be >= 1 for mlp_one_hidden");
    }
    if (!(init_scale >= 0.0) || !std::isfinite(init_scale)) {
        throw ValidationError("ModelSpec.init_scale must be finite and >= 0");
    }
}

std::size_t ModelSpec::param_count() const {
    const auto in = static_cast<std::size_t>(input_dim);
    const auto h = static_cast<std::size_t>(hidden_dim);
    const auto c = static_cast<std::size_t>(num_classes);
    if (kind == ModelKind::logistic_regression) return in * c + c;
    return in * h + h + h * c + c;
}

void Batch::validate(int num_classes) const {
    if (labels.empty() || features.rows == 0) throw ValidationError("Batch: empty batch");
    if (features.rows != labels.size()) {
        throw ValidationError("Batch: feature rows != label count");
    }
    for (int y : labels) {
        if (y < 0 || y >= num_classes) throw ValidationError("Batch: label out of range");
    }
}

ParameterVector init_model(const ModelSpec& spec) {
    spec.validate();
    Rng rng(spec.init_seed);
    std::vector<double> w(spec.param_count());
    for (auto& x : w) x = spec.init_scale * rng.normal();
    return ParameterVector(std::move(w));
}

namespace {

struct Layout {
    std::size_t in, hid, cls;
    std::size_t w1, b1, w2, b2; // offsets; logistic uses w1/b1 only
};

Layout layout_of(const ModelSpec& spec) {
    Layout l{};
    l.in = static_cast<std::size_t>(spec.input_dim);
    l.hid = static_cast<std::size_t>(spec.hidden_dim);
    l.cls = static_cast<std::size_t>(spec.num_classes);
    if (spec.kind == ModelKind::logistic_regression) {
        l.w1 = 0;
        l.b1 = l.in * l.cls;
    } else {
        l.w1 = 0;
        l.b1 = l.in * l.hid;
        l.w2 = l.b1 + l.hid;
        l.b2 = l.w2 + l.hid * l.cls;
    }
    return l;
}

// Shared forward pass: fills logits (and hidden for the mlp), then converts
// logits in place to softmax probabilities. Returns the sample's CE loss.
double forward_softmax(const ModelSpec& spec, const Layout& l, std::span<const double> p,
                       std::span<const double> x, int label, std::vector<double>& hidden,
                       std::vector<double>& logits) {
    if (spec.kind == ModelKind::logistic_regression) {
        for (std::size_t c = 0; c < l.cls; ++c) logits[c] = p[l.b1 + c];
        for (std::size_t f = 0; f < l.in; ++f) {
            const double xf = x[f];
            const double* wrow = &p[l.w1 + f * l.cls];
            for (std::size_t c = 0; c < l.cls; ++c) logits[c] += xf * wrow[c];
        }
    } else {
        for (std::size_t j = 0; j < l.hid; ++j) hidden[j] = p[l.b1 + j];
        for (std::size_t f = 0; f < l.in; ++f) {
            const double xf = x[f];
            const double* wrow = &p[l.w1 + f * l.hid];
            for (std::size_t j = 0; j < l.hid; ++j) hidden[j] += xf * wrow[j];
        }
        for (std::size_t j = 0; j < l.hid; ++j) hidden[j] = std::tanh(hidden[j]);
        for (std::size_t c = 0; c < l.cls; ++c) logits[c] = p[l.b2 + c];
        for (std::size_t j = 0; j < l.hid; ++j) {
            const double hj = hidden[j];
            const double* wrow = &p[l.w2 + j * l.cls];
            for (std::size_t c = 0; c < l.cls; ++c) logits[c] += hj * wrow[c];
        }
    }

    double mx = logits[0];
    for (std::size_t c = 1; c < l.cls; ++c) mx = std::max(mx, logits[c]);
    double sum = 0.0;
    for (std::size_t c = 0; c < l.cls; ++c) sum += std::exp(logits[c] - mx);
    const double lse = mx + std::log(sum);
    const double loss = lse - logits[static_cast<std::size_t>(label)];
    for (std::size_t c = 0; c < l.cls; ++c) logits[c] = std::exp(logits[c] - lse);
    return loss;
}

void check_rows(const ModelSpec& spec, std::span<const double> params, const Matrix& features,
                std::span<const int> labels, std::span<const std::size_t> indices) {
    if (params.size() != spec.param_count()) {
        throw StructuralError("loss_and_grad: params dim " + std::to_string(params.size()) +
                              " != model param count " + std::to_string(spec.param_count()));
    }
    if (features.cols != static_cast<std::size_t>(spec.input_dim)) {
        throw StructuralError("loss_and_grad: feature width != model input_dim");
    }
    if (indices.empty()) throw UsageError("loss_and_grad: empty batch");
    for (std::size_t i : indices) {
        if (i >= features.rows || i >= labels.size()) {
            throw StructuralError("loss_and_grad: row index out of range");
        }
    }
}

} // namespace

double loss_and_grad_rows(const ModelSpec& spec, std::span<const double> params,
                          const Matrix& features, std::span<const int> labels,
                          std::span<const std::size_t> indices, std::span<double> grad_out) {
    check_rows(spec, params, features, labels, indices);
    if (grad_out.size() != params.size()) {
        throw StructuralError("loss_and_grad: grad buffer size mismatch");
    }
    const Layout l = layout_of(spec);
    std::fill(grad_out.begin(), grad_out.end(), 0.0);

    std::vector<double> hidden(l.hid);
    std::vector<double> probs(l.cls);
    std::vector<double> dz(l.hid);

    double loss_sum = 0.0;
    for (std::size_t i : indices) {
        const auto x = features.row(i);
        const int y = labels[i];
        loss_sum += forward_softmax(spec, l, params, x, y, hidden, probs);
        probs[static_cast<std::size_t>(y)] -= 1.0; // now dL/dlogits

        if (spec.kind == ModelKind::logistic_regression) {
            for (std::size_t f = 0; f < l.in; ++f) {
                const double xf = x[f];
                double* grow = &grad_out[l.w1 + f * l.cls];
                for (std::size_t c = 0; c < l.cls; ++c) grow[c] += xf * probs[c];
            }
            for (std::size_t c = 0; c < l.cls; ++c) grad_out[l.b1 + c] += probs[c];
        } else {
            for (std::size_t j = 0; j < l.hid; ++j) {
                const double hj = hidden[j];
                double* grow = &grad_out[l.w2 + j * l.cls];
                const double* wrow = &params[l.w2 + j * l.cls];
                double dh = 0.0;
                for (std::size_t c = 0; c < l.cls; ++c) {
                    grow[c] += hj * probs[c];
                    dh += wrow[c] * probs[c];
                }
                dz[j] = dh * (1.0 - hj * hj);
            }
            for (std::size_t c = 0; c < l.cls; ++c) grad_out[l.b2 + c] += probs[c];
            for (std::size_t f = 0; f < l.in; ++f) {
                const double xf = x[f];
                double* grow = &grad_out[l.w1 + f * l.hid];
                for (std::size_t j = 0; j < l.hid; ++j) grow[j] += xf * dz[j];
            }
            for (std::size_t j = 0; j < l.hid; ++j) grad_out[l.b1 + j] += dz[j];
        }
    }

    const double inv_n = 1.0 / static_cast<double>(indices.size());
    for (auto& g : grad_out) g *= inv_n;
    return loss_sum * inv_n;
}

double mean_loss_rows(const ModelSpec& spec, std::span<const double> params,
                      const Matrix& features, std::span<const int> labels,
                      std::span<const std::size_t> indices) {
    check_rows(spec, params, features, labels, indices);
    const Layout l = layout_of(spec);
    std::vector<double> hidden(l.hid);
    std::vector<double> probs(l.cls);
    double loss_sum = 0.0;
    for (std::size_t i : indices) {
        loss_sum += forward_softmax(spec, l, params, features.row(i), labels[i], hidden, probs);
    }
    return loss_sum / static_cast<double>(indices.size());
}

std::pair<double, ParameterVector> loss_and_grad(const ModelSpec& spec,
                                                 const ParameterVector& params,
                                                 const Batch& batch) {
    spec.validate();
    batch.validate(spec.num_classes);
    std::vector<std::size_t> all(batch.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    std::vector<double> grad(spec.param_count());
    const double loss =
        loss_and_grad_rows(spec, params.span(), batch.features, batch.labels, all, grad);
    return {loss, ParameterVector(std::move(grad))};
}

int predict_class(const ModelSpec& spec, std::span<const double> params,
                  std::span<const double> features) {
    const Layout l = layout_of(spec);
    std::vector<double> hidden(l.hid);
    std::vector<double> logits(l.cls);
    forward_softmax(spec, l, params, features, 0, hidden, logits);
    std::size_t best = 0;
    for (std::size_t c = 1; c < l.cls; ++c) {
        if (logits[c] > logits[best]) best = c;
    }
    return static_cast<int>(best);
}

} // namespace fedsim
