#include <doctest.h>

#include <cmath>

#include "hoggcn/adam.hpp"
#include "test_support.hpp"

using namespace hoggcn;
using namespace hoggcn::test;

TEST_CASE("adam: zero gradients leave parameters unchanged") {
    Rng rng(1);
    Parameter w("w", random_matrix(3, 3, rng));
    const Matrix before = w.value;
    AdamState adam({}, {&w});
    w.grad.fill(0.0);
    for (int i = 0; i < 5; ++i) adam.step({&w});
    CHECK(w.value == before);
    CHECK(adam.step_count() == 5);
}

TEST_CASE("adam: bias-corrected first step moves by about lr") {
    AdamConfig cfg;
    cfg.weight_decay = 0.0;
    Parameter w("w", Matrix(1, 1, {2.0}));
    AdamState adam(cfg, {&w});
    w.grad(0, 0) = 0.37;  // any nonzero gradient
    adam.step({&w});
    const double moved = 2.0 - w.value(0, 0);
    CHECK(moved == doctest::Approx(cfg.lr).epsilon(1e-6));  // lr * sign(g)

    Parameter w2("w2", Matrix(1, 1, {2.0}));
    AdamState adam2(cfg, {&w2});
    w2.grad(0, 0) = -0.37;
    adam2.step({&w2});
    CHECK(w2.value(0, 0) - 2.0 == doctest::Approx(cfg.lr).epsilon(1e-6));
}

TEST_CASE("adam: identical gradients and states give identical updates") {
    AdamConfig cfg;
    Parameter a("a", Matrix(2, 2, {0.5, -0.25, 1.0, 2.0}));
    Parameter b("b", a.value);
    AdamState adam(cfg, {&a, &b});
    Rng rng(9);
    for (int step = 0; step < 7; ++step) {
        Matrix g = random_matrix(2, 2, rng);
        a.grad = g;
        b.grad = g;
        adam.step({&a, &b});
        CHECK(a.value == b.value);
    }
}

TEST_CASE("adam: lr = 0 is bit-identical") {
    AdamConfig cfg;
    cfg.lr = 0.0;
    Rng rng(2);
    Parameter w("w", random_matrix(4, 4, rng));
    const Matrix before = w.value;
    AdamState adam(cfg, {&w});
    for (int i = 0; i < 3; ++i) {
        w.grad = random_matrix(4, 4, rng);
        adam.step({&w});
    }
    CHECK(w.value == before);
}

TEST_CASE("adam: non-finite gradient names the parameter") {
    Parameter w("theta_t", Matrix(1, 1, {1.0}));
    AdamState adam({}, {&w});
    w.grad(0, 0) = std::nan("");
    CHECK_THROWS_WITH_AS(adam.step({&w}), doctest::Contains("theta_t"), Error);
}

TEST_CASE("adam: weight decay respects the opt-out") {
    AdamConfig cfg;
    cfg.weight_decay = 0.1;
    Parameter decayed("w", Matrix(1, 1, {1.0}), /*wd=*/true);
    Parameter exempt("theta", Matrix(1, 1, {1.0}), /*wd=*/false);
    AdamState adam(cfg, {&decayed, &exempt});
    decayed.grad.fill(0.0);
    exempt.grad.fill(0.0);
    adam.step({&decayed, &exempt});
    CHECK(decayed.value(0, 0) < 1.0);   // decay pulls toward zero
    CHECK(exempt.value(0, 0) == 1.0);   // untouched
}
