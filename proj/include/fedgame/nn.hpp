#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fedgame/rng.hpp"

namespace fedgame::nn {

// Fully connected ReLU stack with a softmax head and inverted dropout after
// each hidden layer. The default instance is the 32 -> 128 -> 64 -> 32 -> 2
// signal classifier (14,626 trainable parameters).
struct Architecture {
    int input_size = 32;
    std::vector<int> hidden_sizes{128, 64, 32};
    int output_size = 2;
    double dropout_rate = 0.2;

    void validate() const {
        if (input_size < 1 || output_size < 1) {
            throw std::invalid_argument("Architecture: layer sizes must be >= 1");
        }
        for (int h : hidden_sizes) {
            if (h < 1) throw std::invalid_argument("Architecture: layer sizes must be >= 1");
        }
        if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
            throw std::invalid_argument("Architecture: dropout_rate outside [0, 1)");
        }
    }

    // (out, in) per affine layer, hidden layers first, softmax head last.
    std::vector<std::pair<int, int>> layer_shapes() const {
        std::vector<std::pair<int, int>> shapes;
        int in = input_size;
        for (int h : hidden_sizes) {
            shapes.emplace_back(h, in);
            in = h;
        }
        shapes.emplace_back(output_size, in);
        return shapes;
    }
};

inline int param_count(const Architecture& arch) {
    arch.validate();
    int total = 0;
    for (const auto& [out, in] : arch.layer_shapes()) total += out * in + out;
    return total;
}

enum class Mode { kTrain, kEval };

template <class Scalar>
using VectorX = Eigen::VectorX<Scalar>;
template <class Scalar>
using MatrixX = Eigen::MatrixX<Scalar>;

namespace detail {

// Parameter layout: for each layer, the weight matrix in row-major order
// followed by the bias vector. Checkpoints and federated averaging rely on
// this flat layout being stable.
template <class Scalar>
using WeightMap =
    Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
template <class Scalar>
using MutableWeightMap =
    Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

template <class Scalar>
void check_params(const Architecture& arch, const VectorX<Scalar>& params) {
    if (params.size() != param_count(arch)) {
        throw std::invalid_argument("params length does not match architecture");
    }
}

}  // namespace detail

// Bernoulli keep-mask scaled by 1/(1-rate), so masked activations keep their
// expectation and the eval pass needs no rescaling.
template <class Scalar>
MatrixX<Scalar> dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate,
                             rng::Stream& stream) {
    const Scalar keep_scale = Scalar(1) / Scalar(1.0 - rate);
    MatrixX<Scalar> mask(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c) {
        for (Eigen::Index r = 0; r < rows; ++r) {
            mask(r, c) = stream.bernoulli(rate) ? Scalar(0) : keep_scale;
        }
    }
    return mask;
}

// Glorot-uniform weights (+-sqrt(6/(fan_in+fan_out))), zero biases.
template <class Scalar>
VectorX<Scalar> init_params(const Architecture& arch, rng::Stream& stream) {
    VectorX<Scalar> params(param_count(arch));
    Eigen::Index at = 0;
    for (const auto& [out, in] : arch.layer_shapes()) {
        const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
        for (int idx = 0; idx < out * in; ++idx) {
            params[at++] = static_cast<Scalar>(stream.uniform(-bound, bound));
        }
        for (int idx = 0; idx < out; ++idx) params[at++] = Scalar(0);
    }
    return params;
}

namespace detail {

// Shared forward pass. When `tape` is non-null the pre-activations, dropout
// masks and post-dropout activations are recorded for backprop.
template <class Scalar>
struct Tape {
    std::vector<MatrixX<Scalar>> pre;         // z per hidden layer
    std::vector<MatrixX<Scalar>> masks;       // dropout masks (empty when off)
    std::vector<MatrixX<Scalar>> activations; // post-relu/post-dropout per hidden layer
    MatrixX<Scalar> logits;
};

template <class Scalar>
MatrixX<Scalar> run_layers(const Architecture& arch, const VectorX<Scalar>& params,
                           const MatrixX<Scalar>& inputs, bool use_dropout,
                           rng::Stream* stream, Tape<Scalar>* tape) {
    const auto shapes = arch.layer_shapes();
    MatrixX<Scalar> h = inputs;
    Eigen::Index at = 0;
    for (std::size_t l = 0; l < shapes.size(); ++l) {
        const auto [out, in] = shapes[l];
        WeightMap<Scalar> w(params.data() + at, out, in);
        at += out * in;
        Eigen::Map<const VectorX<Scalar>> b(params.data() + at, out);
        at += out;

        MatrixX<Scalar> z = (w * h).colwise() + b;
        if (l + 1 == shapes.size()) {
            return z;  // logits; softmax is applied by the caller
        }
        if (tape) tape->pre.push_back(z);
        h = z.cwiseMax(Scalar(0));
        if (use_dropout && arch.dropout_rate > 0.0) {
            MatrixX<Scalar> mask = dropout_mask<Scalar>(h.rows(), h.cols(),
                                                        arch.dropout_rate, *stream);
            h = h.cwiseProduct(mask);
            if (tape) tape->masks.push_back(std::move(mask));
        }
        if (tape) tape->activations.push_back(h);
    }
    return h;  // unreachable: the head always returns above
}

template <class Scalar>
MatrixX<Scalar> softmax_columns(const MatrixX<Scalar>& logits) {
    MatrixX<Scalar> probs(logits.rows(), logits.cols());
    for (Eigen::Index c = 0; c < logits.cols(); ++c) {
        const Scalar m = logits.col(c).maxCoeff();
        probs.col(c) = (logits.col(c).array() - m).exp();
        probs.col(c) /= probs.col(c).sum();
    }
    return probs;
}

}  // namespace detail

// Class probabilities, one column per input column. Train mode applies
// inverted dropout drawn from `stream`; eval mode is deterministic.
template <class Scalar>
MatrixX<Scalar> forward(const Architecture& arch, const VectorX<Scalar>& params,
                        const MatrixX<Scalar>& inputs, Mode mode,
                        rng::Stream* stream = nullptr) {
    detail::check_params(arch, params);
    if (inputs.rows() != arch.input_size) {
        throw std::invalid_argument("forward: input row count does not match architecture");
    }
    if (!inputs.allFinite()) throw std::invalid_argument("forward: non-finite input");
    const bool use_dropout = mode == Mode::kTrain && arch.dropout_rate > 0.0;
    if (use_dropout && stream == nullptr) {
        throw std::invalid_argument("forward: train mode needs an rng stream");
    }
    return detail::softmax_columns<Scalar>(
        detail::run_layers<Scalar>(arch, params, inputs, use_dropout, stream, nullptr));
}

template <class Scalar>
VectorX<Scalar> forward(const Architecture& arch, const VectorX<Scalar>& params,
                        const VectorX<Scalar>& input, Mode mode,
                        rng::Stream* stream = nullptr) {
    return forward<Scalar>(arch, params, MatrixX<Scalar>(input), mode, stream);
}

template <class Scalar>
struct LossGrad {
    Scalar loss;
    VectorX<Scalar> grad;
};

// Mean cross-entropy over the batch and its gradient with respect to every
// parameter, computed with the same dropout masks as the forward pass. A null
// `dropout_stream` disables dropout (used by the finite-difference check and
// by toy deterministic fits).
template <class Scalar>
LossGrad<Scalar> loss_and_grad(const Architecture& arch, const VectorX<Scalar>& params,
                               const MatrixX<Scalar>& inputs, const Eigen::VectorXi& labels,
                               rng::Stream* dropout_stream = nullptr) {
    detail::check_params(arch, params);
    const Eigen::Index batch = inputs.cols();
    if (batch == 0) throw std::invalid_argument("loss_and_grad: empty batch");
    if (labels.size() != batch) {
        throw std::invalid_argument("loss_and_grad: labels/inputs size mismatch");
    }
    if (inputs.rows() != arch.input_size) {
        throw std::invalid_argument("loss_and_grad: input row count mismatch");
    }
    for (Eigen::Index c = 0; c < batch; ++c) {
        if (labels[c] < 0 || labels[c] >= arch.output_size) {
            throw std::invalid_argument("loss_and_grad: label out of range");
        }
    }

    const bool use_dropout = dropout_stream != nullptr && arch.dropout_rate > 0.0;
    detail::Tape<Scalar> tape;
    tape.logits = detail::run_layers<Scalar>(arch, params, inputs, use_dropout,
                                             dropout_stream, &tape);

    // Loss through a stable log-sum-exp; gradient of the head is
    // (softmax - onehot) / batch.
    Scalar loss = Scalar(0);
    MatrixX<Scalar> g = detail::softmax_columns<Scalar>(tape.logits);
    for (Eigen::Index c = 0; c < batch; ++c) {
        const Scalar m = tape.logits.col(c).maxCoeff();
        const Scalar lse = m + std::log((tape.logits.col(c).array() - m).exp().sum());
        loss += lse - tape.logits(labels[c], c);
        g(labels[c], c) -= Scalar(1);
    }
    loss /= static_cast<Scalar>(batch);
    g /= static_cast<Scalar>(batch);

    const auto shapes = arch.layer_shapes();
    std::vector<Eigen::Index> offsets(shapes.size());
    Eigen::Index at = 0;
    for (std::size_t l = 0; l < shapes.size(); ++l) {
        offsets[l] = at;
        at += shapes[l].first * shapes[l].second + shapes[l].first;
    }

    VectorX<Scalar> grad = VectorX<Scalar>::Zero(params.size());
    for (std::size_t l = shapes.size(); l-- > 0;) {
        const auto [out, in] = shapes[l];
        const MatrixX<Scalar>& below =
            l == 0 ? inputs : tape.activations[l - 1];

        detail::MutableWeightMap<Scalar> gw(grad.data() + offsets[l], out, in);
        Eigen::Map<VectorX<Scalar>> gb(grad.data() + offsets[l] + out * in, out);
        gw = g * below.transpose();
        gb = g.rowwise().sum();

        if (l > 0) {
            detail::WeightMap<Scalar> w(params.data() + offsets[l], out, in);
            MatrixX<Scalar> d = w.transpose() * g;
            if (use_dropout) d = d.cwiseProduct(tape.masks[l - 1]);
            g = d.cwiseProduct(
                (tape.pre[l - 1].array() > Scalar(0)).template cast<Scalar>().matrix());
        }
    }
    return {loss, std::move(grad)};
}

// RMSprop with the smoothing constant inside the square root:
//   acc <- rho * acc + (1 - rho) * grad^2
//   p   <- p - lr * grad / sqrt(acc + eps)
template <class Scalar>
struct RmsPropState {
    VectorX<Scalar> accumulator;
    Scalar decay_rho = Scalar(0.9);
    Scalar epsilon = Scalar(1e-8);
    Scalar learning_rate = Scalar(1e-3);

    static RmsPropState zero(Eigen::Index n, Scalar lr = Scalar(1e-3),
                             Scalar rho = Scalar(0.9), Scalar eps = Scalar(1e-8)) {
        if (!(rho > Scalar(0) && rho < Scalar(1))) {
            throw std::invalid_argument("RmsPropState: rho outside (0, 1)");
        }
        if (!(eps > Scalar(0)) || !(lr > Scalar(0))) {
            throw std::invalid_argument("RmsPropState: lr and epsilon must be > 0");
        }
        return {VectorX<Scalar>::Zero(n), rho, eps, lr};
    }
};

template <class Scalar>
void rmsprop_step(VectorX<Scalar>& params, const VectorX<Scalar>& grad,
                  RmsPropState<Scalar>& state) {
    if (grad.size() != params.size() || state.accumulator.size() != params.size()) {
        throw std::invalid_argument("rmsprop_step: size mismatch");
    }
    state.accumulator = state.decay_rho * state.accumulator +
                        (Scalar(1) - state.decay_rho) * grad.cwiseAbs2();
    params -= state.learning_rate *
              grad.cwiseQuotient((state.accumulator.array() + state.epsilon)
                                     .sqrt()
                                     .matrix());
}

// Fraction of argmax predictions matching the labels (eval mode).
template <class Scalar>
double accuracy(const Architecture& arch, const VectorX<Scalar>& params,
                const MatrixX<Scalar>& inputs, const Eigen::VectorXi& labels) {
    const MatrixX<Scalar> probs = forward<Scalar>(arch, params, inputs, Mode::kEval);
    Eigen::Index correct = 0;
    for (Eigen::Index c = 0; c < probs.cols(); ++c) {
        Eigen::Index best;
        probs.col(c).maxCoeff(&best);
        if (static_cast<int>(best) == labels[c]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(probs.cols());
}

}  // namespace fedgame::nn
