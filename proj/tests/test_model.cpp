#include <doctest.h>

#include <cmath>

#include "hoggcn/gradcheck.hpp"
#include "hoggcn/model.hpp"
#include "test_support.hpp"

using namespace hoggcn;
using namespace hoggcn::test;

namespace {

ModelConfig small_config() {
    ModelConfig c;
    c.mlp_hidden = 16;
    c.gcn_hidden = 8;
    return c;
}

Split full_train_split(const Graph& g) {
    Split s;
    for (int i = 0; i < g.n; ++i) s.train.push_back(i);
    return s;
}

Graph permute_graph(const Graph& g, const std::vector<int>& perm) {
    Graph p;
    p.name = g.name;
    p.n = g.n;
    p.f = g.f;
    p.num_classes = g.num_classes;
    p.labels.resize(g.n);
    p.features = Matrix(g.n, g.f);
    for (int i = 0; i < g.n; ++i) {
        p.labels[perm[i]] = g.labels[i];
        for (int c = 0; c < g.f; ++c) p.features(perm[i], c) = g.features(i, c);
    }
    std::vector<std::int64_t> ri;
    std::vector<int> ci;
    const Matrix dense = g.adjacency.to_dense();
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j)
            if (dense(i, j) != 0.0) {
                ri.push_back(perm[i]);
                ci.push_back(perm[j]);
            }
    p.adjacency = SparseMatrix::from_triplets(g.n, g.n, std::move(ri), std::move(ci),
                                              std::vector<double>(ri.size(), 1.0));
    p.validate();
    return p;
}

}  // namespace

TEST_CASE("mlp branch: zero weights give the uniform assignment") {
    Graph g = tiny_labeled_graph(6, 3, {{0, 1}, {2, 3}, {4, 5}}, {0, 0, 1, 1, 2, 2});
    HogModel model(g, small_config());
    for (Parameter* p : model.parameters())
        if (p->name.rfind("mlp.", 0) == 0) p->value.fill(0.0);
    Tape t;
    auto [zm, b] = model.mlp_forward(t);
    (void)zm;
    for (int r = 0; r < g.n; ++r)
        for (int c = 0; c < 3; ++c)
            CHECK(t.value(b)(r, c) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("mlp branch: one-layer identity weights reproduce softmax(xW) by hand") {
    Graph g = tiny_labeled_graph(2, 2, {{0, 1}}, {0, 1}, /*f=*/2);
    g.features = Matrix(2, 2, {0.3, -0.7, 1.2, 0.4});
    ModelConfig cfg = small_config();
    cfg.mlp_layers = 1;
    HogModel model(g, cfg);
    for (Parameter* p : model.parameters())
        if (p->name == "mlp.w0") p->value = Matrix::identity(2);
    Tape t;
    auto [zm, b] = model.mlp_forward(t);
    (void)zm;
    for (int r = 0; r < 2; ++r) {
        const double a = g.features(r, 0), b2 = g.features(r, 1);
        const double ea = std::exp(a), eb = std::exp(b2);
        CHECK(t.value(b)(r, 0) == doctest::Approx(ea / (ea + eb)).epsilon(1e-12));
        CHECK(t.value(b)(r, 1) == doctest::Approx(eb / (ea + eb)).epsilon(1e-12));
    }
}

TEST_CASE("attribute homophily on fixed assignments") {
    Graph g = tiny_labeled_graph(4, 2, {{0, 1}, {2, 3}, {1, 2}}, {0, 0, 1, 1});
    ModelConfig cfg = small_config();
    cfg.k = 1;
    HogModel model(g, cfg);
    const SupportIndex& sup = *model.support();

    auto s_for = [&](const Matrix& b) {
        Tape t;
        Value s = model.attribute_homophily(t, t.constant(b));
        return t.value(s);
    };

    Matrix same_onehot(4, 2);
    for (int r = 0; r < 4; ++r) same_onehot(r, 0) = 1.0;
    Matrix s1 = s_for(same_onehot);
    for (int e = 0; e < sup.entries(); ++e) CHECK(s1(e, 0) == 1.0);

    Matrix orth(4, 2);  // alternating one-hots: every edge joins orthogonal rows?
    orth(0, 0) = 1.0;
    orth(1, 1) = 1.0;
    orth(2, 0) = 1.0;
    orth(3, 1) = 1.0;
    Matrix s2 = s_for(orth);
    for (std::int64_t e = 0; e < sup.entries(); ++e) {
        const int i = sup.entry_row[e], j = sup.mat.col_idx[e];
        const bool same_slot = (i % 2) == (j % 2);
        CHECK(s2(static_cast<int>(e), 0) == (same_slot ? 1.0 : 0.0));
    }

    Graph g5 = tiny_labeled_graph(4, 5, {{0, 1}}, {0, 1, 2, 3});
    g5.labels = {0, 1, 2, 3};  // class 4 missing would break validation
    g5.num_classes = 4;
    HogModel m5(g5, small_config());
    Tape t;
    Matrix uniform = Matrix::full(4, 5, 0.2);
    Value s = t.row_sum(t.mul(t.gather_rows(t.constant(uniform), m5.support()->entry_row),
                              t.gather_rows(t.constant(uniform), m5.support()->mat.col_idx)));
    for (int e = 0; e < m5.support()->entries(); ++e)
        CHECK(t.value(s)(e, 0) == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("topology homophily: initialization, range, symmetry") {
    Graph g = tiny_labeled_graph(5, 2, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 4}}, {0, 0, 1, 1, 0});
    HogModel model(g, small_config());
    const SupportIndex& sup = *model.support();

    SUBCASE("fresh model propagates uniformly: T is 1 on the support") {
        Tape t;
        Value tv = model.topology_homophily(t);
        for (int e = 0; e < sup.entries(); ++e)
            CHECK(t.value(tv)(e, 0) == doctest::Approx(1.0).epsilon(1e-12));
    }

    SUBCASE("strongly negative parameters keep T positive") {
        for (Parameter* p : model.parameters())
            if (p->name == "theta_t") p->value.fill(-40.0);
        Tape t;
        Value tv = model.topology_homophily(t);
        for (int e = 0; e < sup.entries(); ++e) {
            CHECK(t.value(tv)(e, 0) > 0.0);
            CHECK(t.value(tv)(e, 0) < 1e-15);
        }
    }

    SUBCASE("arbitrary parameters give a symmetric T") {
        Rng rng(4);
        for (Parameter* p : model.parameters())
            if (p->name == "theta_t") p->value = random_matrix(p->value.rows(), 1, rng, -2, 2);
        Tape t;
        Value tv = model.topology_homophily(t);
        for (std::int64_t e = 0; e < sup.entries(); ++e)
            CHECK(t.value(tv)(static_cast<int>(e), 0) == t.value(tv)(sup.twin[e], 0));
    }
}

TEST_CASE("generalized label propagation") {
    SUBCASE("uniform weights equal the classic neighbor average, exactly") {
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
            SyntheticConfig sc;
            sc.n = 18;
            sc.num_classes = 3;
            sc.h_target = 0.5;
            sc.mean_degree = 4;
            sc.feature_dim = 3;
            sc.seed = seed;
            Graph g = generate_synthetic(sc);
            ModelConfig cfg = small_config();
            cfg.k = 1;
            HogModel model(g, cfg);
            const SupportIndex& sup = *model.support();
            Split split = generate_splits(g, 1, seed)[0];
            Matrix y0 = model.initial_label_matrix(split);

            const int iterations = 3;
            Tape t;
            Value ones = t.constant(Matrix::full(static_cast<int>(sup.entries()), 1, 1.0));
            Value y = model.generalized_label_propagation(t, ones, y0, iterations);

            // oracle: per-node average of neighbor rows, no reset
            Matrix cur = y0;
            for (int it = 0; it < iterations; ++it) {
                Matrix next(g.n, g.num_classes);
                for (int i = 0; i < g.n; ++i) {
                    const auto& m = sup.mat;
                    const std::int64_t deg = m.row_ptr[i + 1] - m.row_ptr[i];
                    if (deg == 0) continue;
                    for (std::int64_t e = m.row_ptr[i]; e < m.row_ptr[i + 1]; ++e)
                        for (int c = 0; c < g.num_classes; ++c)
                            next(i, c) += cur(m.col_idx[e], c);
                    for (int c = 0; c < g.num_classes; ++c)
                        next(i, c) /= static_cast<double>(deg);
                }
                cur = next;
            }
            CHECK(t.value(y) == cur);
        }
    }

    SUBCASE("isolated node keeps a zero row") {
        Graph g = tiny_labeled_graph(4, 2, {{0, 1}, {1, 2}}, {0, 0, 1, 1});
        ModelConfig cfg = small_config();
        cfg.k = 2;
        HogModel model(g, cfg);
        Split split = full_train_split(g);
        Tape t;
        Value tv = model.topology_homophily(t);
        Value y = model.generalized_label_propagation(t, tv, model.initial_label_matrix(split), 2);
        for (int c = 0; c < 2; ++c) CHECK(t.value(y)(3, c) == 0.0);
    }

    SUBCASE("single neighbor: normalization cancels the edge weight exactly") {
        Graph g = tiny_labeled_graph(2, 2, {{0, 1}}, {0, 1});
        HogModel model(g, small_config());
        for (Parameter* p : model.parameters())
            if (p->name == "theta_t") p->value.fill(2.345);  // arbitrary weight
        Split s;
        s.train = {0};
        Tape t;
        Value tv = model.topology_homophily(t);
        Value y = model.generalized_label_propagation(t, tv, model.initial_label_matrix(s), 1);
        CHECK(t.value(y)(1, 0) == 1.0);
        CHECK(t.value(y)(1, 1) == 0.0);
    }
}

TEST_CASE("combine homophily and its degenerate cases") {
    Graph g = tiny_labeled_graph(6, 3, {{0, 1}, {2, 3}, {4, 5}, {1, 2}}, {0, 0, 1, 1, 2, 2});

    SUBCASE("alpha=1, beta=0.1 with uniform B and unit T gives 1/C + 0.1") {
        ModelConfig cfg = small_config();
        cfg.alpha = 1.0;
        cfg.beta = 0.1;
        HogModel model(g, cfg);
        for (Parameter* p : model.parameters())
            if (p->name.rfind("mlp.", 0) == 0) p->value.fill(0.0);  // B uniform: S = 1/C
        Tape t;
        ForwardValues fv = model.forward(t, full_train_split(g));
        for (int e = 0; e < model.support()->entries(); ++e)
            CHECK(t.value(fv.h_edges)(e, 0) ==
                  doctest::Approx(1.0 / 3.0 + 0.1).epsilon(1e-9));
    }

    SUBCASE("alpha=1, beta=0 reduces H to S") {
        ModelConfig cfg = small_config();
        cfg.beta = 0.0;
        HogModel model(g, cfg);
        Tape t;
        auto [zm, b] = model.mlp_forward(t);
        (void)zm;
        Value s = model.attribute_homophily(t, b);
        Value tv = model.topology_homophily(t);
        Value h = model.combine_homophily(t, s, tv);
        CHECK(t.value(h) == t.value(s));
    }

    SUBCASE("alpha=beta=0 kills the neighborhood term: output ignores the graph") {
        ModelConfig cfg = small_config();
        cfg.alpha = 0.0;
        cfg.beta = 0.0;
        cfg.seed = 3;
        HogModel m1(g, cfg);
        Tape t1;
        ForwardValues f1 = m1.forward(t1, full_train_split(g));

        // same features, completely different wiring
        Graph g2 = tiny_labeled_graph(6, 3, {{0, 5}, {1, 4}, {2, 5}, {0, 3}}, {0, 0, 1, 1, 2, 2});
        g2.features = g.features;
        HogModel m2(g2, cfg);
        Tape t2;
        ForwardValues f2 = m2.forward(t2, full_train_split(g2));
        CHECK(t1.value(f1.r) == t2.value(f2.r));
    }
}

TEST_CASE("hog_conv_layer reference behaviors") {
    Rng rng(8);
    auto sup = std::make_shared<const SupportIndex>(random_support(6, 0.5, rng));
    const int nnz = static_cast<int>(sup->entries());

    SUBCASE("pure ego pass-through") {
        Tape t;
        Value z_prev = t.constant(random_matrix(6, 4, rng));
        Value h = t.constant(random_matrix_nonzero(nnz, 1, rng, 0.3));
        Value z = hog_conv_layer(t, z_prev, sup, h, t.constant(Matrix::identity(4)),
                                 t.constant(Matrix::identity(4)), /*mu=*/1.0, /*xi=*/0.0,
                                 /*apply_activation=*/false);
        CHECK(t.value(z) == t.value(z_prev));
    }

    SUBCASE("neighbor mean on a 3-node path") {
        auto path = std::make_shared<const SupportIndex>(SupportIndex::build(
            SparseMatrix::from_triplets(3, 3, {0, 1, 1, 2}, {1, 0, 2, 1}, {1, 1, 1, 1})));
        Tape t;
        Matrix zm(3, 2, {1.0, 10.0, 2.0, 20.0, 4.0, 40.0});
        Value z_prev = t.constant(zm);
        Value h = t.constant(Matrix::full(4, 1, 1.0));
        Value z = hog_conv_layer(t, z_prev, path, h, t.constant(Matrix::identity(2)),
                                 t.constant(Matrix::identity(2)), /*mu=*/0.0, /*xi=*/1.0,
                                 /*apply_activation=*/false);
        CHECK(t.value(z)(0, 0) == 2.0);   // neighbor of 0 is 1
        CHECK(t.value(z)(1, 0) == 2.5);   // mean of 1 and 4
        CHECK(t.value(z)(1, 1) == 25.0);
        CHECK(t.value(z)(2, 0) == 2.0);   // neighbor of 2 is 1
    }

    SUBCASE("doubling H leaves the output unchanged") {
        Tape t;
        Value z_prev = t.constant(random_matrix(6, 3, rng));
        Matrix h1 = random_matrix(nnz, 1, rng, 0.2, 1.0);
        Matrix h2 = h1;
        for (double& v : h2.data()) v *= 2.0;
        Value we = t.constant(random_matrix(3, 3, rng));
        Value wn = t.constant(random_matrix(3, 3, rng));
        Value za = hog_conv_layer(t, z_prev, sup, t.constant(h1), we, wn, 1.0, 1.0, true);
        Value zb = hog_conv_layer(t, z_prev, sup, t.constant(h2), we, wn, 1.0, 1.0, true);
        CHECK(max_abs_diff(t.value(za), t.value(zb)) <= 1e-12);
    }
}

TEST_CASE("forward pass shapes, determinism, zero-degree handling") {
    SyntheticConfig sc;
    sc.n = 14;
    sc.num_classes = 2;
    sc.h_target = 0.6;
    sc.mean_degree = 3;
    sc.feature_dim = 5;
    sc.seed = 12;
    Graph g = generate_synthetic(sc);
    ModelConfig cfg = small_config();
    cfg.seed = 4;
    HogModel model(g, cfg);
    Split split = generate_splits(g, 1, 2)[0];

    Tape t1;
    ForwardValues f1 = model.forward(t1, split);
    CHECK(t1.value(f1.r).rows() == g.n);
    CHECK(t1.value(f1.r).cols() == g.num_classes);
    CHECK(t1.value(f1.b).rows() == g.n);
    CHECK(t1.value(f1.y_lp).rows() == g.n);
    CHECK(t1.value(f1.h_edges).rows() == model.support()->entries());

    // S strictly positive and at most 1 on the support; H symmetric, exact
    Tape ts;
    auto [zm, b] = model.mlp_forward(ts);
    (void)zm;
    Value s = model.attribute_homophily(ts, b);
    for (int e = 0; e < model.support()->entries(); ++e) {
        CHECK(ts.value(s)(e, 0) > 0.0);
        CHECK(ts.value(s)(e, 0) <= 1.0 + 1e-12);
    }
    for (std::int64_t e = 0; e < model.support()->entries(); ++e)
        CHECK(t1.value(f1.h_edges)(static_cast<int>(e), 0) ==
              t1.value(f1.h_edges)(model.support()->twin[e], 0));

    Tape t2;
    ForwardValues f2 = model.forward(t2, split);
    CHECK(t1.value(f2.r) == t1.value(f1.r));  // bitwise deterministic

    // rows sum to one
    for (int r = 0; r < g.n; ++r) {
        double sum = 0;
        for (int c = 0; c < g.num_classes; ++c) sum += t1.value(f1.r)(r, c);
        CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
}

TEST_CASE("joint loss composition") {
    Graph g = tiny_labeled_graph(5, 5, {{0, 1}, {1, 2}, {3, 4}}, {0, 1, 2, 3, 4});
    HogModel model(g, small_config());
    Split s = full_train_split(g);

    SUBCASE("lambda = gamma = 0 leaves only the convolution loss") {
        ModelConfig cfg = small_config();
        cfg.lambda = 0.0;
        cfg.gamma = 0.0;
        HogModel m(g, cfg);
        Tape t;
        ForwardValues fv = m.forward(t, s);
        LossValues lv = m.joint_loss(t, fv, s);
        CHECK(t.value(lv.total)(0, 0) == t.value(lv.gcn)(0, 0));
    }

    SUBCASE("perfect one-hot branch outputs cost nearly nothing") {
        Matrix perfect(5, 5);
        for (int i = 0; i < 5; ++i) perfect(i, i) = 1.0;
        Tape t;
        ForwardValues fv;
        fv.r = t.constant(perfect);
        fv.b = t.constant(perfect);
        fv.y_lp = t.constant(perfect);
        LossValues lv = model.joint_loss(t, fv, s);
        CHECK(std::abs(t.value(lv.total)(0, 0)) <= 3e-11);
    }

    SUBCASE("uniform branch outputs cost 3 ln C") {
        Tape t;
        ForwardValues fv;
        fv.r = t.constant(Matrix::full(5, 5, 0.2));
        fv.b = t.constant(Matrix::full(5, 5, 0.2));
        fv.y_lp = t.constant(Matrix::full(5, 5, 0.2));
        LossValues lv = model.joint_loss(t, fv, s);
        CHECK(t.value(lv.total)(0, 0) == doctest::Approx(3.0 * std::log(5.0)).epsilon(1e-9));
    }

    SUBCASE("empty training mask is an error") {
        Tape t;
        ForwardValues fv = model.forward(t, s);
        Split empty;
        CHECK_THROWS_AS(model.joint_loss(t, fv, empty), Error);
    }
}

TEST_CASE("uniform-H ablation matches plain mean aggregation and is equivariant") {
    SyntheticConfig sc;
    sc.n = 12;
    sc.num_classes = 2;
    sc.h_target = 0.5;
    sc.mean_degree = 4;
    sc.feature_dim = 4;
    sc.seed = 9;
    Graph g = generate_synthetic(sc);

    ModelConfig cfg = small_config();
    cfg.uniform_h = true;
    cfg.k = 1;
    cfg.seed = 11;
    HogModel model(g, cfg);
    Split split = full_train_split(g);
    Tape t;
    ForwardValues fv = model.forward(t, split);

    // reference: Z1 = relu(mu X We1 + xi D^-1 A X Wn1); Z2 = mu Z1 We2 + xi D^-1 A Z1 Wn2
    Matrix we1, wn1, we2, wn2;
    for (Parameter* p : model.parameters()) {
        if (p->name == "gcn.we0") we1 = p->value;
        if (p->name == "gcn.wn0") wn1 = p->value;
        if (p->name == "gcn.we1") we2 = p->value;
        if (p->name == "gcn.wn1") wn2 = p->value;
    }
    Matrix a = g.adjacency.to_dense();
    auto mean_agg = [&](const Matrix& z) {
        Matrix out(g.n, z.cols());
        for (int i = 0; i < g.n; ++i) {
            double deg = 0;
            for (int j = 0; j < g.n; ++j) deg += a(i, j);
            if (deg == 0) continue;
            for (int j = 0; j < g.n; ++j)
                if (a(i, j) != 0)
                    for (int c = 0; c < z.cols(); ++c) out(i, c) += z(j, c);
            for (int c = 0; c < z.cols(); ++c) out(i, c) /= deg;
        }
        return out;
    };
    Matrix z1 = matmul(g.features, we1);
    Matrix nb1 = mean_agg(matmul(g.features, wn1));
    for (std::size_t i = 0; i < z1.size(); ++i)
        z1.data()[i] = std::max(z1.data()[i] + nb1.data()[i], 0.0);
    Matrix z2 = matmul(z1, we2);
    Matrix nb2 = mean_agg(matmul(z1, wn2));
    for (std::size_t i = 0; i < z2.size(); ++i) z2.data()[i] += nb2.data()[i];
    CHECK(max_abs_diff(t.value(fv.z_final), z2) <= 1e-10);

    // permutation equivariance: relabeling nodes permutes outputs
    std::vector<int> perm(g.n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng prng(5);
    shuffle(perm, prng);
    Graph pg = permute_graph(g, perm);
    HogModel pmodel(pg, cfg);
    Split psplit = full_train_split(pg);
    Tape pt;
    ForwardValues pfv = pmodel.forward(pt, psplit);
    for (int i = 0; i < g.n; ++i)
        for (int c = 0; c < g.num_classes; ++c)
            CHECK(pt.value(pfv.z_final)(perm[i], c) ==
                  doctest::Approx(t.value(fv.z_final)(i, c)).epsilon(1e-9));
}

TEST_CASE("H stays symmetric across training steps") {
    SyntheticConfig sc;
    sc.n = 16;
    sc.num_classes = 2;
    sc.h_target = 0.4;
    sc.mean_degree = 4;
    sc.feature_dim = 4;
    sc.seed = 2;
    Graph g = generate_synthetic(sc);
    ModelConfig cfg = small_config();
    HogModel model(g, cfg);
    Split split = generate_splits(g, 1, 3)[0];
    auto params = model.parameters();
    AdamState adam({}, params);
    for (int epoch = 0; epoch < 5; ++epoch) {
        Tape t;
        ForwardValues fv = model.forward(t, split);
        for (std::int64_t e = 0; e < model.support()->entries(); ++e)
            REQUIRE(t.value(fv.h_edges)(static_cast<int>(e), 0) ==
                    t.value(fv.h_edges)(model.support()->twin[e], 0));
        LossValues lv = model.joint_loss(t, fv, split);
        t.backward(lv.total);
        adam.step(params);
    }
}

TEST_CASE("checkpoint round trip is bit exact") {
    SyntheticConfig sc;
    sc.n = 20;
    sc.num_classes = 3;
    sc.h_target = 0.5;
    sc.mean_degree = 4;
    sc.feature_dim = 6;
    sc.seed = 15;
    Graph g = generate_synthetic(sc);
    ModelConfig cfg = small_config();
    cfg.alpha = 0.37;
    cfg.seed = 99;
    HogModel model(g, cfg);

    // perturb away from the deterministic init so the values matter
    Rng rng(42);
    for (Parameter* p : model.parameters())
        for (double& v : p->value.data()) v += rng.uniform(-0.01, 0.01);

    const auto path = fresh_dir("ckpt") / "model.bin";
    model.save_checkpoint(path);
    HogModel loaded = HogModel::load_checkpoint(path, g);

    CHECK(loaded.config() == model.config());
    auto pa = model.parameters();
    auto pb = loaded.parameters();
    REQUIRE(pa.size() == pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) {
        CHECK(pa[i]->name == pb[i]->name);
        CHECK(pa[i]->value == pb[i]->value);
    }

    Split split = generate_splits(g, 1, 1)[0];
    Tape ta, tb;
    CHECK(ta.value(model.forward(ta, split).r) == tb.value(loaded.forward(tb, split).r));

    // wrong graph is rejected
    SyntheticConfig sc2 = sc;
    sc2.n = 24;
    Graph other = generate_synthetic(sc2);
    CHECK_THROWS_AS(HogModel::load_checkpoint(path, other), Error);
}

TEST_CASE("benchmark dataset shapes flow through the model") {
    const auto texas_dir = std::filesystem::path(HOGGCN_DATA_DIR) / "texas";
    if (!std::filesystem::exists(texas_dir / "meta.json")) return;  // data not present
    Graph g = load_dataset(texas_dir);
    CHECK(g.n == 183);
    CHECK(g.f == 1703);
    CHECK(g.num_classes == 5);
    CHECK(homophily_ratio(g) == doctest::Approx(0.09).epsilon(0.12));

    HogModel model(g, ModelConfig{});
    Tape t;
    auto [zm, b] = model.mlp_forward(t);
    CHECK(t.value(zm).rows() == 183);
    CHECK(t.value(zm).cols() == 5);
    CHECK(t.value(b).rows() == 183);
}
