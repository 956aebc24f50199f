#include <doctest.h>

#include <cmath>

#include "hoggcn/gradcheck.hpp"
#include "test_support.hpp"

using namespace hoggcn;
using namespace hoggcn::test;

namespace {

/// Runs finite_diff_check over `params` for a loss built by `make_loss`
/// (which must register every parameter on the tape it is given).
double check_op(std::vector<Parameter*> params,
                const std::function<Value(Tape&)>& make_loss, std::uint64_t seed) {
    auto with_grad = [&]() {
        Tape t;
        Value loss = make_loss(t);
        const double v = t.value(loss)(0, 0);
        t.backward(loss);
        return v;
    };
    auto value_only = [&]() {
        Tape t;
        return t.value(make_loss(t))(0, 0);
    };
    GradCheckOptions opt;
    opt.seed = seed;
    return finite_diff_check(params, with_grad, value_only, opt);
}

constexpr double kOpTol = 1e-6;

}  // namespace

TEST_CASE("adjoints of the operation vocabulary pass the gradient check") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Rng rng(seed);
        Rng srng(seed + 100);

        SUBCASE("matmul both sides") {
            Parameter a("a", random_matrix(4, 6, rng));
            Parameter b("b", random_matrix(6, 3, rng));
            CHECK(check_op({&a, &b}, [&](Tape& t) {
                      Rng s(seed);
                      return scalarize(t, t.matmul(t.param(a), t.param(b)), s);
                  }, seed) <= kOpTol);
        }

        SUBCASE("spmm dense side") {
            std::vector<std::int64_t> ri;
            std::vector<int> ci;
            std::vector<double> vals;
            for (int r = 0; r < 7; ++r)
                for (int c = 0; c < 5; ++c)
                    if (srng.next_double() < 0.4) {
                        ri.push_back(r);
                        ci.push_back(c);
                        vals.push_back(srng.next_normal());
                    }
            auto sp = std::make_shared<const SparseMatrix>(
                SparseMatrix::from_triplets(7, 5, ri, ci, vals));
            auto spt = std::make_shared<const SparseMatrix>(sp->transpose());
            Parameter d("d", random_matrix(5, 3, rng));
            CHECK(check_op({&d}, [&](Tape& t) {
                      Rng s(seed);
                      return scalarize(t, t.spmm(sp, spt, t.param(d)), s);
                  }, seed) <= kOpTol);
        }

        SUBCASE("edge_spmm both inputs and edge_row_sum") {
            auto sup = std::make_shared<const SupportIndex>(random_support(8, 0.4, srng));
            Parameter tvals("t", random_matrix_nonzero(static_cast<int>(sup->entries()), 1, rng));
            Parameter z("z", random_matrix(8, 3, rng));
            CHECK(check_op({&tvals, &z}, [&](Tape& t) {
                      Rng s(seed);
                      return scalarize(t, t.edge_spmm(sup, t.param(tvals), t.param(z)), s);
                  }, seed) <= kOpTol);
            CHECK(check_op({&tvals}, [&](Tape& t) {
                      Rng s(seed + 1);
                      return scalarize(t, t.edge_row_sum(sup, t.param(tvals)), s);
                  }, seed) <= kOpTol);
        }

        SUBCASE("row_divide both inputs") {
            Parameter num("num", random_matrix(6, 3, rng));
            Parameter den("den", random_matrix(6, 1, rng, 0.5, 1.5));
            CHECK(check_op({&num, &den}, [&](Tape& t) {
                      Rng s(seed);
                      return scalarize(t, t.row_divide(t.param(num), t.param(den)), s);
                  }, seed) <= kOpTol);
        }

        SUBCASE("elementwise add, mul, scale") {
            Parameter a("a", random_matrix(5, 4, rng));
            Parameter b("b", random_matrix(5, 4, rng));
            CHECK(check_op({&a, &b}, [&](Tape& t) {
                      Rng s(seed);
                      Value sum = t.add(t.param(a), t.scale(t.mul(t.param(b), t.param(b)), 0.7));
                      return scalarize(t, sum, s);
                  }, seed) <= kOpTol);
        }

        SUBCASE("relu away from the kink") {
            Parameter a("a", random_matrix_nonzero(5, 4, rng));
            CHECK(check_op({&a}, [&](Tape& t) {
                      Rng s(seed);
                      return scalarize(t, t.relu(t.param(a)), s);
                  }, seed) <= kOpTol);
        }

        SUBCASE("softplus") {
            Parameter a("a", random_matrix(5, 4, rng, -3.0, 3.0));
            CHECK(check_op({&a}, [&](Tape& t) {
                      Rng s(seed);
                      return scalarize(t, t.softplus(t.param(a)), s);
                  }, seed) <= kOpTol);
        }

        SUBCASE("row_softmax and row_sum") {
            Parameter a("a", random_matrix(5, 4, rng));
            CHECK(check_op({&a}, [&](Tape& t) {
                      Rng s(seed);
                      return scalarize(t, t.row_softmax(t.param(a)), s);
                  }, seed) <= kOpTol);
            CHECK(check_op({&a}, [&](Tape& t) {
                      Rng s(seed + 2);
                      return scalarize(t, t.row_sum(t.param(a)), s);
                  }, seed) <= kOpTol);
        }

        SUBCASE("gather_rows with repeated indices") {
            Parameter a("a", random_matrix(5, 3, rng));
            const std::vector<int> idx{0, 2, 2, 4, 1, 2};
            CHECK(check_op({&a}, [&](Tape& t) {
                      Rng s(seed);
                      return scalarize(t, t.gather_rows(t.param(a), idx), s);
                  }, seed) <= kOpTol);
        }

        SUBCASE("masked cross entropy on strictly positive rows") {
            Parameter p("p", random_matrix(5, 4, rng, 0.1, 1.0));
            const std::vector<int> labels{0, 3, 1, 2, 0};
            const std::vector<int> mask{0, 2, 4};
            CHECK(check_op({&p}, [&](Tape& t) {
                      return t.masked_cross_entropy(t.param(p), labels, mask);
                  }, seed) <= kOpTol);
        }
    }
}

TEST_CASE("row softmax closed forms and properties") {
    Tape t;
    SUBCASE("identical entries give the uniform row") {
        Value v = t.row_softmax(t.constant(Matrix::full(1, 4, 2.5)));
        for (int c = 0; c < 4; ++c) CHECK(t.value(v)(0, c) == doctest::Approx(0.25).epsilon(1e-12));
    }
    SUBCASE("(0, ln 3) maps to (0.25, 0.75)") {
        Value v = t.row_softmax(t.constant(Matrix(1, 2, {0.0, std::log(3.0)})));
        CHECK(t.value(v)(0, 0) == doctest::Approx(0.25).epsilon(1e-12));
        CHECK(t.value(v)(0, 1) == doctest::Approx(0.75).epsilon(1e-12));
    }
    SUBCASE("saturated entry becomes one-hot without overflow") {
        Value v = t.row_softmax(t.constant(Matrix(1, 3, {1000.0, 0.0, 0.0})));
        CHECK(std::abs(t.value(v)(0, 0) - 1.0) <= 1e-12);
        CHECK(t.value(v)(0, 1) <= 1e-12);
    }
    SUBCASE("rows sum to one and shift invariance holds") {
        Rng rng(3);
        Matrix m = random_matrix(6, 5, rng, -4.0, 4.0);
        Matrix shifted = m;
        for (int r = 0; r < m.rows(); ++r)
            for (int c = 0; c < m.cols(); ++c) shifted(r, c) += 17.25;
        Value a = t.row_softmax(t.constant(m));
        Value b = t.row_softmax(t.constant(shifted));
        for (int r = 0; r < m.rows(); ++r) {
            double sum = 0;
            for (int c = 0; c < m.cols(); ++c) sum += t.value(a)(r, c);
            CHECK(std::abs(sum - 1.0) <= 1e-12);
        }
        CHECK(max_abs_diff(t.value(a), t.value(b)) <= 1e-12);
    }
}

TEST_CASE("masked cross entropy closed forms") {
    Tape t;
    SUBCASE("perfect one-hot predictions cost nothing") {
        Matrix p(2, 3);
        p(0, 1) = 1.0;
        p(1, 2) = 1.0;
        Value ce = t.masked_cross_entropy(t.constant(p), {1, 2}, {0, 1});
        CHECK(std::abs(t.value(ce)(0, 0)) <= 1e-11);
    }
    SUBCASE("uniform predictions cost ln C") {
        Value ce = t.masked_cross_entropy(t.constant(Matrix::full(4, 5, 0.2)), {0, 1, 2, 3},
                                          {0, 1, 2, 3});
        CHECK(t.value(ce)(0, 0) == doctest::Approx(std::log(5.0)).epsilon(1e-9));
    }
    SUBCASE("zero probability stays finite through the clamp") {
        Matrix p(1, 2);
        p(0, 1) = 1.0;  // true label 0 has probability zero
        Value ce = t.masked_cross_entropy(t.constant(p), {0}, {0});
        CHECK(t.value(ce)(0, 0) == doctest::Approx(-std::log(1e-12)).epsilon(1e-9));
        CHECK(std::isfinite(t.value(ce)(0, 0)));
    }
    SUBCASE("empty mask is an error") {
        CHECK_THROWS_AS(t.masked_cross_entropy(t.constant(Matrix::full(2, 2, 0.5)), {0, 1}, {}),
                        Error);
    }
}

TEST_CASE("finite difference checker reference cases") {
    SUBCASE("quadratic loss has an exact linear gradient") {
        Rng rng(5);
        Parameter w("w", random_matrix(6, 4, rng));
        Matrix ones_row(1, 6);
        ones_row.fill(1.0);
        Matrix ones_col(4, 1);
        ones_col.fill(1.0);
        auto loss = [&](Tape& t) {
            // 1/2 sum w^2 via mul, scale, row_sum, matmul reductions
            Value sq = t.scale(t.mul(t.param(w), t.param(w)), 0.5);
            Value rows = t.row_sum(sq);                       // (6,1)
            return t.matmul(t.constant(ones_row), rows);      // (1,1)
        };
        CHECK(check_op({&w}, loss, 5) <= 1e-9);
    }

    SUBCASE("constant loss leaves a zero gradient") {
        Rng rng(6);
        Parameter w("w", random_matrix(3, 3, rng));
        Parameter used("u", random_matrix(1, 2, rng));
        auto loss = [&](Tape& t) {
            t.param(w);  // registered but unused by the loss
            return t.masked_cross_entropy(t.row_softmax(t.param(used)), {0}, {0});
        };
        CHECK(check_op({&w}, loss, 6) <= 1e-8);
        Tape t;
        Value l = loss(t);
        t.backward(l);
        for (double g : w.grad.data()) CHECK(g == 0.0);
    }
}

TEST_CASE("tape bookkeeping guards") {
    Tape t;
    Rng rng(1);
    Parameter w("w", random_matrix(2, 2, rng));
    Value a = t.param(w);
    CHECK_THROWS_AS(t.param(w), Error);  // double registration
    Value loss = t.masked_cross_entropy(t.row_softmax(a), {0, 1}, {0, 1});
    CHECK_THROWS_AS(t.grad(a), Error);   // before backward
    t.backward(loss);
    CHECK_THROWS_AS(t.backward(loss), Error);  // backward twice
    CHECK_THROWS_AS(t.relu(a), Error);         // recording after backward
}
