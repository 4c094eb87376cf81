// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the mmphase authors

#include "nn.hpp"

#include <cmath>
#include <stdexcept>

#include "rng.hpp"

namespace mmphase {

void zero_grads(const std::vector<ParamRef>& params) {
    for (const auto& p : params) {
        p.grad->setZero();
    }
}

std::size_t param_count(const std::vector<ParamRef>& params) {
    std::size_t n = 0;
    for (const auto& p : params) {
        n += static_cast<std::size_t>(p.value->size());
    }
    return n;
}

void sgd_step(const std::vector<ParamRef>& params, double lr) {
    for (const auto& p : params) {
        if (!p.grad->allFinite()) {
            throw std::runtime_error("non-finite gradient in parameter " + p.name);
        }
        *p.value -= lr * (*p.grad);
    }
}

void sgd_step_momentum(const std::vector<ParamRef>& params, double lr, double momentum,
                       SgdState& state) {
    if (momentum == 0.0) {
        sgd_step(params, lr);
        return;
    }
    for (const auto& p : params) {
        if (!p.grad->allFinite()) {
            throw std::runtime_error("non-finite gradient in parameter " + p.name);
        }
        auto [it, inserted] = state.velocity.try_emplace(p.name, Mat::Zero(p.value->rows(),
                                                                           p.value->cols()));
        Mat& v = it->second;
        v = momentum * v + *p.grad;
        *p.value -= lr * v;
    }
}

DenseLayer::DenseLayer(int out_dim, int in_dim)
    : w(Mat::Zero(out_dim, in_dim)),
      b(Mat::Zero(out_dim, 1)),
      gw(Mat::Zero(out_dim, in_dim)),
      gb(Mat::Zero(out_dim, 1)) {}

void DenseLayer::init(Rng& rng) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(std::max(1, in_dim())));
    for (int r = 0; r < w.rows(); ++r) {
        for (int c = 0; c < w.cols(); ++c) {
            w(r, c) = scale * rng.next_normal();
        }
    }
    b.setZero();
}

Vec DenseLayer::forward(const Vec& x) const {
    if (x.size() != w.cols()) {
        throw std::runtime_error("dense: input dim " + std::to_string(x.size()) +
                                 " does not match layer input " + std::to_string(w.cols()));
    }
    return w * x + b.col(0);
}

Vec DenseLayer::backward(const Vec& x, const Vec& grad_out) {
    gw += grad_out * x.transpose();
    gb.col(0) += grad_out;
    return w.transpose() * grad_out;
}

void DenseLayer::collect(const std::string& prefix, std::vector<ParamRef>& out) {
    out.push_back({prefix + ".w", &w, &gw});
    out.push_back({prefix + ".b", &b, &gb});
}

Vec relu(const Vec& x) { return x.cwiseMax(0.0); }

Vec relu_backward(const Vec& x, const Vec& grad_out) {
    return (x.array() > 0.0).select(grad_out.array(), 0.0);
}

Vec softmax(const Vec& logits) {
    const double m = logits.maxCoeff();
    Vec e = (logits.array() - m).exp();
    return e / e.sum();
}

double cross_entropy_from_logits(const Vec& logits, int true_class, Vec* grad_logits) {
    if (true_class < 0 || true_class >= logits.size()) {
        throw std::runtime_error("cross entropy: class index out of range");
    }
    if (!logits.allFinite()) {
        throw std::runtime_error("cross entropy: non-finite logits");
    }
    const double m = logits.maxCoeff();
    const double log_sum = std::log((logits.array() - m).exp().sum()) + m;
    const double loss = log_sum - logits(true_class);
    if (grad_logits) {
        *grad_logits = softmax(logits);
        (*grad_logits)(true_class) -= 1.0;
    }
    return loss;
}

double cross_entropy_from_probs(const Vec& probs, int true_class) {
    if (true_class < 0 || true_class >= probs.size()) {
        throw std::runtime_error("cross entropy: class index out of range");
    }
    const double p = probs(true_class);
    if (p <= 0.0) {
        throw std::runtime_error("cross entropy: zero probability on the true class");
    }
    return -std::log(p);
}

namespace {
inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }
}  // namespace

LstmLayer::LstmLayer(int input, int hidden)
    : input_dim(input),
      hidden_dim(hidden),
      wx(Mat::Zero(4 * hidden, input)),
      wh(Mat::Zero(4 * hidden, hidden)),
      b(Mat::Zero(4 * hidden, 1)),
      gwx(Mat::Zero(4 * hidden, input)),
      gwh(Mat::Zero(4 * hidden, hidden)),
      gb(Mat::Zero(4 * hidden, 1)) {}

void LstmLayer::init(Rng& rng) {
    const double sx = 1.0 / std::sqrt(static_cast<double>(std::max(1, input_dim)));
    const double sh = 1.0 / std::sqrt(static_cast<double>(std::max(1, hidden_dim)));
    for (int r = 0; r < wx.rows(); ++r) {
        for (int c = 0; c < wx.cols(); ++c) wx(r, c) = sx * rng.next_normal();
    }
    for (int r = 0; r < wh.rows(); ++r) {
        for (int c = 0; c < wh.cols(); ++c) wh(r, c) = sh * rng.next_normal();
    }
    b.setZero();
}

Mat LstmLayer::forward(const Mat& inputs, LstmCache* cache) const {
    if (inputs.rows() != input_dim) {
        throw std::runtime_error("lstm: input dim " + std::to_string(inputs.rows()) +
                                 " does not match configured " + std::to_string(input_dim));
    }
    const int steps = static_cast<int>(inputs.cols());
    if (steps == 0) {
        throw std::runtime_error("lstm: empty input sequence");
    }
    const int h = hidden_dim;
    Mat hidden_states(h, steps);
    Vec h_prev = Vec::Zero(h);
    Vec c_prev = Vec::Zero(h);
    if (cache) {
        *cache = LstmCache{};
    }

    for (int t = 0; t < steps; ++t) {
        const Vec x = inputs.col(t);
        const Vec z = wx * x + wh * h_prev + b.col(0);
        Vec gate_i(h), gate_f(h), gate_g(h), gate_o(h);
        for (int j = 0; j < h; ++j) {
            gate_i(j) = sigmoid(z(j));
            gate_f(j) = sigmoid(z(h + j));
            gate_g(j) = std::tanh(z(2 * h + j));
            gate_o(j) = sigmoid(z(3 * h + j));
        }
        const Vec c_t = gate_f.cwiseProduct(c_prev) + gate_i.cwiseProduct(gate_g);
        const Vec h_t = gate_o.cwiseProduct(c_t.array().tanh().matrix());
        hidden_states.col(t) = h_t;

        if (cache) {
            cache->x.push_back(x);
            cache->i.push_back(gate_i);
            cache->f.push_back(gate_f);
            cache->g.push_back(gate_g);
            cache->o.push_back(gate_o);
            cache->c.push_back(c_t);
            cache->h.push_back(h_t);
        }
        h_prev = h_t;
        c_prev = c_t;
    }
    return hidden_states;
}

void LstmLayer::backward(const LstmCache& cache, const Mat& grad_h, Mat* grad_inputs) {
    const int steps = static_cast<int>(cache.x.size());
    const int h = hidden_dim;
    if (grad_inputs) {
        *grad_inputs = Mat::Zero(input_dim, steps);
    }

    Vec dh_next = Vec::Zero(h);
    Vec dc_next = Vec::Zero(h);
    for (int t = steps - 1; t >= 0; --t) {
        const Vec& i = cache.i[t];
        const Vec& f = cache.f[t];
        const Vec& g = cache.g[t];
        const Vec& o = cache.o[t];
        const Vec tanh_c = cache.c[t].array().tanh().matrix();
        const Vec c_prev = t > 0 ? cache.c[t - 1] : Vec::Zero(h);
        const Vec h_prev = t > 0 ? cache.h[t - 1] : Vec::Zero(h);

        const Vec dh = dh_next + grad_h.col(t);
        const Vec do_ = dh.cwiseProduct(tanh_c);
        const Vec dc =
            dc_next + dh.cwiseProduct(o).cwiseProduct((1.0 - tanh_c.array().square()).matrix());
        const Vec di = dc.cwiseProduct(g);
        const Vec df = dc.cwiseProduct(c_prev);
        const Vec dg = dc.cwiseProduct(i);

        Vec dz(4 * h);
        dz.segment(0, h) = di.cwiseProduct(i).cwiseProduct((1.0 - i.array()).matrix());
        dz.segment(h, h) = df.cwiseProduct(f).cwiseProduct((1.0 - f.array()).matrix());
        dz.segment(2 * h, h) = dg.cwiseProduct((1.0 - g.array().square()).matrix());
        dz.segment(3 * h, h) = do_.cwiseProduct(o).cwiseProduct((1.0 - o.array()).matrix());

        gwx += dz * cache.x[t].transpose();
        gwh += dz * h_prev.transpose();
        gb.col(0) += dz;
        if (grad_inputs) {
            grad_inputs->col(t) = wx.transpose() * dz;
        }
        dh_next = wh.transpose() * dz;
        dc_next = dc.cwiseProduct(f);
    }
}

void LstmLayer::collect(const std::string& prefix, std::vector<ParamRef>& out) {
    out.push_back({prefix + ".wx", &wx, &gwx});
    out.push_back({prefix + ".wh", &wh, &gwh});
    out.push_back({prefix + ".b", &b, &gb});
}

Vec dropout_forward(const Vec& x, double rate, bool training, Rng& rng, DropoutMask* mask) {
    if (!training || rate <= 0.0) {
        if (mask) {
            mask->active = false;
        }
        return x;
    }
    if (rate >= 1.0) {
        throw std::runtime_error("dropout rate must be < 1");
    }
    const double keep_scale = 1.0 / (1.0 - rate);
    Vec scale(x.size());
    for (int j = 0; j < x.size(); ++j) {
        scale(j) = rng.next_unit() < rate ? 0.0 : keep_scale;
    }
    if (mask) {
        mask->scale = scale;
        mask->active = true;
    }
    return x.cwiseProduct(scale);
}

Vec dropout_backward(const DropoutMask& mask, const Vec& grad_out) {
    if (!mask.active) {
        return grad_out;
    }
    return grad_out.cwiseProduct(mask.scale);
}

}  // namespace mmphase
