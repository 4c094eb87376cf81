// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the mmphase authors
//
// Minimal dense/recurrent layer kit, double precision throughout. Each layer
// owns its parameters and gradient accumulators; backward() accumulates into
// the gradients and returns the gradient with respect to its input.

#ifndef MMPHASE_NN_HPP
#define MMPHASE_NN_HPP

#include <Eigen/Core>

#include <map>
#include <string>
#include <vector>

namespace mmphase {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

class Rng;

// Named view over one parameter matrix and its gradient.
struct ParamRef {
    std::string name;
    Mat* value = nullptr;
    Mat* grad = nullptr;
};

void zero_grads(const std::vector<ParamRef>& params);
std::size_t param_count(const std::vector<ParamRef>& params);

// Plain SGD: p <- p - lr * g. Throws on non-finite gradients.
void sgd_step(const std::vector<ParamRef>& params, double lr);

// Optional momentum (off by default everywhere): v <- mu*v + g; p <- p - lr*v.
struct SgdState {
    std::map<std::string, Mat> velocity;
};
void sgd_step_momentum(const std::vector<ParamRef>& params, double lr, double momentum,
                       SgdState& state);

// y = W x + b
struct DenseLayer {
    Mat w;   // (out, in)
    Mat b;   // (out, 1)
    Mat gw;
    Mat gb;

    DenseLayer() = default;
    DenseLayer(int out_dim, int in_dim);

    int in_dim() const { return static_cast<int>(w.cols()); }
    int out_dim() const { return static_cast<int>(w.rows()); }

    void init(Rng& rng);  // normal, std 1/sqrt(in); zero bias
    Vec forward(const Vec& x) const;
    Vec backward(const Vec& x, const Vec& grad_out);
    void collect(const std::string& prefix, std::vector<ParamRef>& out);
};

Vec relu(const Vec& x);
Vec relu_backward(const Vec& x, const Vec& grad_out);

Vec softmax(const Vec& logits);

// -log softmax(logits)[true_class], numerically stable. When grad_logits is
// non-null it receives softmax(logits) - onehot(true_class).
double cross_entropy_from_logits(const Vec& logits, int true_class, Vec* grad_logits = nullptr);

// -log p[true_class]; a zero probability on the true class is an error.
double cross_entropy_from_probs(const Vec& probs, int true_class);

struct LstmCache {
    std::vector<Vec> x, i, f, g, o, c, h;
};

// Single-layer unidirectional LSTM with input, forget and output gates plus
// the candidate cell update. Gate pre-activations are packed row-wise as
// [input; forget; candidate; output].
struct LstmLayer {
    int input_dim = 0;
    int hidden_dim = 0;
    Mat wx;  // (4h, in)
    Mat wh;  // (4h, h)
    Mat b;   // (4h, 1)
    Mat gwx, gwh, gb;

    LstmLayer() = default;
    LstmLayer(int input, int hidden);

    void init(Rng& rng);

    // inputs: (in, T), one column per step; returns hidden states (h, T).
    // Zero initial hidden and cell state.
    Mat forward(const Mat& inputs, LstmCache* cache) const;

    // grad_h: gradient on every hidden output (h, T). Typically only the last
    // column is nonzero (final-state pooling). Accumulates parameter grads;
    // writes input gradients to grad_inputs when non-null.
    void backward(const LstmCache& cache, const Mat& grad_h, Mat* grad_inputs) ;

    void collect(const std::string& prefix, std::vector<ParamRef>& out);
};

struct DropoutMask {
    Vec scale;  // 0 or 1/(1-rate) per unit
    bool active = false;
};

// Inverted dropout; identity when not training or rate == 0.
Vec dropout_forward(const Vec& x, double rate, bool training, Rng& rng, DropoutMask* mask);
Vec dropout_backward(const DropoutMask& mask, const Vec& grad_out);

}  // namespace mmphase

#endif
