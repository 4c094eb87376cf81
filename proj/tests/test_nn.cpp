// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the mmphase authors

#include "nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"

#include "rng.hpp"
#include "training.hpp"

using namespace mmphase;

namespace {

// Central-difference derivative of `loss` with respect to entry (r, c) of m.
double numeric_grad(Mat& m, int r, int c, const std::function<double()>& loss,
                    double h = 1e-6) {
    const double saved = m(r, c);
    m(r, c) = saved + h;
    const double up = loss();
    m(r, c) = saved - h;
    const double down = loss();
    m(r, c) = saved;
    return (up - down) / (2.0 * h);
}

double rel_err(double a, double b) {
    const double denom = std::max({std::abs(a), std::abs(b), 1e-8});
    return std::abs(a - b) / denom;
}

}  // namespace

TEST_CASE("rng streams are deterministic and independent") {
    Rng a = Rng::stream(42, {1, 2});
    Rng b = Rng::stream(42, {1, 2});
    Rng c = Rng::stream(42, {1, 3});
    Rng d = Rng::stream(43, {1, 2});
    const std::uint64_t va = a.next_u64();
    CHECK(va == b.next_u64());
    CHECK(va != c.next_u64());
    CHECK(va != d.next_u64());
}

TEST_CASE("rng uniform and shuffle behave sanely") {
    Rng rng(7);
    for (int i = 0; i < 1000; ++i) {
        const double u = rng.next_unit();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    for (int i = 0; i < 200; ++i) CHECK(rng.next_below(10) < 10);

    std::vector<int> v{1, 2, 3, 4, 5, 6, 7, 8};
    std::vector<int> w = v;
    Rng s1(99), s2(99);
    s1.shuffle(v);
    s2.shuffle(w);
    CHECK(v == w);  // same seed, same permutation
    std::vector<int> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8});
}

TEST_CASE("softmax lands on the simplex and is shift invariant") {
    Vec logits(5);
    logits << 1.0, -2.0, 0.5, 3.0, 0.0;
    Vec p = softmax(logits);
    double sum = 0.0;
    for (int i = 0; i < 5; ++i) {
        CHECK(p(i) > 0.0);
        CHECK(p(i) < 1.0);
        sum += p(i);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));

    Vec shifted = logits.array() + 123.456;
    Vec q = softmax(shifted);
    for (int i = 0; i < 5; ++i) CHECK(p(i) == doctest::Approx(q(i)).epsilon(1e-9));

    // Extreme logits must not overflow to NaN.
    Vec big(3);
    big << 1000.0, 900.0, -1000.0;
    Vec pb = softmax(big);
    CHECK(std::isfinite(pb(0)));
    CHECK(pb(0) == doctest::Approx(1.0));
}

TEST_CASE("cross entropy from logits matches softmax minus one-hot") {
    Vec logits(5);
    logits << 0.3, -1.2, 2.0, 0.0, 0.7;
    const int truth = 2;

    Vec grad;
    const double loss = cross_entropy_from_logits(logits, truth, &grad);
    Vec p = softmax(logits);
    CHECK(loss == doctest::Approx(-std::log(p(truth))).epsilon(1e-12));
    for (int i = 0; i < 5; ++i) {
        const double expected = p(i) - (i == truth ? 1.0 : 0.0);
        CHECK(grad(i) == doctest::Approx(expected).epsilon(1e-12));
    }

    // Finite differences agree with the analytic gradient.
    Mat m = logits;
    for (int i = 0; i < 5; ++i) {
        const double numeric = numeric_grad(m, i, 0, [&] {
            return cross_entropy_from_logits(Vec(m), truth, nullptr);
        });
        CHECK(rel_err(numeric, grad(i)) < 1e-6);
    }

    // Certain correct prediction: zero loss.
    Vec sure(3);
    sure << 100.0, 0.0, 0.0;
    CHECK(cross_entropy_from_logits(sure, 0) == doctest::Approx(0.0).epsilon(1e-9));

    CHECK_THROWS(cross_entropy_from_logits(logits, 5));
    CHECK_THROWS(cross_entropy_from_logits(logits, -1));
}

TEST_CASE("cross entropy from probabilities") {
    Vec p(3);
    p << 0.5, 0.25, 0.25;
    CHECK(cross_entropy_from_probs(p, 0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

    Vec onehot(3);
    onehot << 0.0, 1.0, 0.0;
    CHECK(cross_entropy_from_probs(onehot, 1) == doctest::Approx(0.0));
    CHECK_THROWS(cross_entropy_from_probs(onehot, 0));  // true class has p == 0
}

TEST_CASE("dense layer forward fixture and finite-difference backward") {
    DenseLayer layer(2, 3);
    layer.w << 1.0, 0.0, -1.0,
               0.5, 2.0, 0.0;
    layer.b << 0.25,
               -0.5;
    Vec x(3);
    x << 1.0, 2.0, 3.0;

    Vec y = layer.forward(x);
    CHECK(y(0) == doctest::Approx(1.0 * 1 + 0 * 2 + (-1.0) * 3 + 0.25));  // -1.75
    CHECK(y(1) == doctest::Approx(0.5 * 1 + 2.0 * 2 + 0 * 3 - 0.5));      // 4.0

    // Scalar objective: dot(grad_out, forward(x)).
    Vec grad_out(2);
    grad_out << 0.7, -1.3;
    auto objective = [&] { return grad_out.dot(layer.forward(x)); };

    layer.gw.setZero();
    layer.gb.setZero();
    Vec grad_in = layer.backward(x, grad_out);

    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 3; ++c)
            CHECK(rel_err(numeric_grad(layer.w, r, c, objective), layer.gw(r, c)) < 1e-6);
    for (int r = 0; r < 2; ++r)
        CHECK(rel_err(numeric_grad(layer.b, r, 0, objective), layer.gb(r, 0)) < 1e-6);

    Mat xm = x;
    for (int r = 0; r < 3; ++r) {
        const double numeric = numeric_grad(xm, r, 0, [&] {
            return grad_out.dot(layer.forward(Vec(xm)));
        });
        CHECK(rel_err(numeric, grad_in(r)) < 1e-6);
    }
}

TEST_CASE("relu and its backward") {
    Vec x(4);
    x << -1.0, 0.0, 2.0, -0.5;
    Vec y = relu(x);
    CHECK(y(0) == 0.0);
    CHECK(y(1) == 0.0);
    CHECK(y(2) == 2.0);
    CHECK(y(3) == 0.0);

    Vec g(4);
    g << 1.0, 1.0, 1.0, 1.0;
    Vec gx = relu_backward(x, g);
    CHECK(gx(0) == 0.0);
    CHECK(gx(2) == 1.0);
}

TEST_CASE("sgd step fixtures") {
    Mat w(1, 1), g(1, 1);
    w(0, 0) = 1.0;
    g(0, 0) = 0.5;
    std::vector<ParamRef> params{{"w", &w, &g}};

    SUBCASE("single step: 1.0 - 0.001*0.5 = 0.9995") {
        sgd_step(params, 0.001);
        CHECK(w(0, 0) == doctest::Approx(0.9995).epsilon(1e-15));
    }

    SUBCASE("zero gradient leaves parameters untouched") {
        g(0, 0) = 0.0;
        sgd_step(params, 10.0);
        CHECK(w(0, 0) == 1.0);
    }

    SUBCASE("update is linear in the learning rate") {
        Mat w2 = w, g2 = g;
        std::vector<ParamRef> params2{{"w", &w2, &g2}};
        sgd_step(params, 0.2);
        sgd_step(params2, 0.1);
        const double delta1 = 1.0 - w(0, 0);
        const double delta2 = 1.0 - w2(0, 0);
        CHECK(delta1 == doctest::Approx(2.0 * delta2).epsilon(1e-12));
    }

    SUBCASE("non-finite gradient is fatal") {
        g(0, 0) = std::numeric_limits<double>::quiet_NaN();
        CHECK_THROWS(sgd_step(params, 0.1));
        g(0, 0) = std::numeric_limits<double>::infinity();
        CHECK_THROWS(sgd_step(params, 0.1));
    }
}

TEST_CASE("momentum zero matches plain sgd; velocity accumulates otherwise") {
    Mat w1(1, 1), g1(1, 1), w2(1, 1), g2(1, 1);
    w1(0, 0) = w2(0, 0) = 2.0;
    g1(0, 0) = g2(0, 0) = 1.0;
    std::vector<ParamRef> p1{{"w", &w1, &g1}};
    std::vector<ParamRef> p2{{"w", &w2, &g2}};

    SgdState state;
    sgd_step_momentum(p1, 0.1, 0.0, state);
    sgd_step(p2, 0.1);
    CHECK(w1(0, 0) == doctest::Approx(w2(0, 0)).epsilon(1e-15));

    // mu=0.5, constant unit gradient from w=0: v=1, 1.5, 1.75 -> steps of
    // lr*v accumulate to -(1 + 1.5 + 1.75)*lr.
    Mat w(1, 1), g(1, 1);
    w(0, 0) = 0.0;
    g(0, 0) = 1.0;
    std::vector<ParamRef> p{{"w", &w, &g}};
    SgdState s2;
    sgd_step_momentum(p, 0.1, 0.5, s2);
    CHECK(w(0, 0) == doctest::Approx(-0.1).epsilon(1e-12));
    sgd_step_momentum(p, 0.1, 0.5, s2);
    CHECK(w(0, 0) == doctest::Approx(-0.25).epsilon(1e-12));
    sgd_step_momentum(p, 0.1, 0.5, s2);
    CHECK(w(0, 0) == doctest::Approx(-0.425).epsilon(1e-12));
}

TEST_CASE("lstm gradients agree with finite differences") {
    const int in_dim = 3, hidden = 4, steps = 5;
    LstmLayer lstm(in_dim, hidden);
    Rng rng = Rng::stream(1234, {0x6c73746d});
    lstm.init(rng);

    Mat inputs(in_dim, steps);
    for (int c = 0; c < steps; ++c)
        for (int r = 0; r < in_dim; ++r) inputs(r, c) = rng.next_normal() * 0.5;

    // Objective: sum of the last hidden state (final-state pooling shape).
    auto objective = [&] {
        LstmCache cache;
        Mat h = lstm.forward(inputs, &cache);
        return h.col(steps - 1).sum();
    };

    LstmCache cache;
    Mat h = lstm.forward(inputs, &cache);
    Mat grad_h = Mat::Zero(hidden, steps);
    grad_h.col(steps - 1).setOnes();

    lstm.gwx.setZero();
    lstm.gwh.setZero();
    lstm.gb.setZero();
    Mat grad_inputs;
    lstm.backward(cache, grad_h, &grad_inputs);

    double worst = 0.0;
    auto check_block = [&](Mat& value, const Mat& grad) {
        for (int r = 0; r < value.rows(); ++r) {
            for (int c = 0; c < value.cols(); ++c) {
                const double numeric = numeric_grad(value, r, c, objective, 1e-5);
                worst = std::max(worst, rel_err(numeric, grad(r, c)));
            }
        }
    };
    check_block(lstm.wx, lstm.gwx);
    check_block(lstm.wh, lstm.gwh);
    check_block(lstm.b, lstm.gb);
    check_block(inputs, grad_inputs);
    CHECK(worst < 1e-4);

    CHECK(h.rows() == hidden);
    CHECK(h.cols() == steps);
}

TEST_CASE("dropout") {
    Rng rng(5);
    Vec x(8);
    x << 1, 2, 3, 4, 5, 6, 7, 8;

    SUBCASE("identity when inactive") {
        DropoutMask mask;
        Vec y = dropout_forward(x, 0.4, false, rng, &mask);
        CHECK((y - x).norm() == 0.0);
        CHECK_FALSE(mask.active);
        Vec z = dropout_forward(x, 0.0, true, rng, &mask);
        CHECK((z - x).norm() == 0.0);
    }

    SUBCASE("inverted scaling: surviving units are scaled by 1/(1-rate)") {
        DropoutMask mask;
        const double rate = 0.4;
        Vec y = dropout_forward(x, rate, true, rng, &mask);
        REQUIRE(mask.active);
        for (int i = 0; i < 8; ++i) {
            const bool dropped = mask.scale(i) == 0.0;
            if (dropped) {
                CHECK(y(i) == 0.0);
            } else {
                CHECK(mask.scale(i) == doctest::Approx(1.0 / (1.0 - rate)));
                CHECK(y(i) == doctest::Approx(x(i) / (1.0 - rate)));
            }
        }
    }

    SUBCASE("backward reuses the forward mask") {
        DropoutMask mask;
        Vec y = dropout_forward(x, 0.5, true, rng, &mask);
        (void)y;
        Vec g = Vec::Ones(8);
        Vec gx = dropout_backward(mask, g);
        for (int i = 0; i < 8; ++i) CHECK(gx(i) == doctest::Approx(mask.scale(i)));
    }

    SUBCASE("expected value is preserved on average") {
        const double rate = 0.4;
        double total = 0.0;
        const int trials = 2000;
        for (int t = 0; t < trials; ++t) {
            DropoutMask mask;
            Vec y = dropout_forward(x, rate, true, rng, &mask);
            total += y.sum();
        }
        const double mean = total / trials;
        CHECK(mean == doctest::Approx(x.sum()).epsilon(0.05));
    }
}

TEST_CASE("plateau scheduler follows the patience contract") {
    PlateauSchedule schedule;  // factor 0.1, patience 3, min_delta 1e-3, min_lr 1e-6

    SUBCASE("three stalled epochs after the best trigger one cut") {
        PlateauScheduler sched(0.001, schedule);
        CHECK(sched.observe(1.0) == doctest::Approx(0.001));    // establishes best
        CHECK(sched.observe(0.9995) == doctest::Approx(0.001)); // within min_delta: stall 1
        CHECK(sched.observe(0.9995) == doctest::Approx(0.001)); // stall 2
        CHECK(sched.observe(0.9995) == doctest::Approx(0.0001)); // stall 3 -> cut
        CHECK(sched.lr() == doctest::Approx(0.0001));
    }

    SUBCASE("improvement resets the counter") {
        PlateauScheduler sched(0.01, schedule);
        sched.observe(1.0);
        sched.observe(1.0);
        sched.observe(1.0);
        sched.observe(0.5);  // improvement on the third stall's heels
        sched.observe(0.5);
        sched.observe(0.5);
        CHECK(sched.lr() == doctest::Approx(0.01));  // never cut
        sched.observe(0.5);
        CHECK(sched.lr() == doctest::Approx(0.001));  // now three stalls since 0.5
    }

    SUBCASE("strictly improving loss never cuts the rate") {
        PlateauScheduler sched(0.001, schedule);
        double loss = 2.0;
        for (int i = 0; i < 50; ++i) {
            loss -= 0.01;
            sched.observe(loss);
        }
        CHECK(sched.lr() == doctest::Approx(0.001));
    }

    SUBCASE("rate never drops below min_lr") {
        PlateauScheduler sched(0.001, schedule);
        for (int i = 0; i < 100; ++i) sched.observe(1.0);
        CHECK(sched.lr() >= schedule.min_lr - 1e-18);
        CHECK(sched.lr() == doctest::Approx(schedule.min_lr));
    }

    SUBCASE("improvement must beat best by min_delta, not merely match it") {
        PlateauScheduler sched(0.1, schedule);
        sched.observe(1.0);
        sched.observe(1.0 - 0.0005);  // half of min_delta: still a stall
        sched.observe(1.0 - 0.0005);
        sched.observe(1.0 - 0.0005);
        CHECK(sched.lr() == doctest::Approx(0.01));
    }

    SUBCASE("plateau_lr replays a history to the same rate") {
        std::vector<double> history{1.0, 0.9995, 0.9995, 0.9995, 0.9995};
        PlateauScheduler sched(0.001, schedule);
        for (double v : history) sched.observe(v);
        CHECK(plateau_lr(history, 0.001, schedule) == doctest::Approx(sched.lr()));
    }
}
