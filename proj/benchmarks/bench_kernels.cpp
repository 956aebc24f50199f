// Microbenchmarks for the numeric kernels and the end-to-end training step.

#include <benchmark/benchmark.h>

#include "hoggcn/adam.hpp"
#include "hoggcn/graph.hpp"
#include "hoggcn/model.hpp"
#include "hoggcn/trainer.hpp"

using namespace hoggcn;

namespace {

Matrix random_matrix(int r, int c, Rng& rng) {
    Matrix m(r, c);
    for (double& v : m.data()) v = rng.next_normal();
    return m;
}

SparseMatrix random_csr(int rows, int cols, double density, Rng& rng) {
    std::vector<std::int64_t> ri;
    std::vector<int> ci;
    std::vector<double> vals;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            if (rng.next_double() < density) {
                ri.push_back(r);
                ci.push_back(c);
                vals.push_back(rng.next_normal());
            }
    return SparseMatrix::from_triplets(rows, cols, std::move(ri), std::move(ci), std::move(vals));
}

void BM_Matmul(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Rng rng(1);
    Matrix a = random_matrix(n, n, rng);
    Matrix b = random_matrix(n, n, rng);
    Matrix out;
    for (auto _ : state) {
        matmul_into(out, a, b);
        benchmark::DoNotOptimize(out.data().data());
    }
    state.SetItemsProcessed(state.iterations() * 2LL * n * n * n);
}

void BM_MatmulTN(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Rng rng(1);
    Matrix a = random_matrix(n, n, rng);
    Matrix b = random_matrix(n, n, rng);
    Matrix out;
    for (auto _ : state) {
        matmul_tn_into(out, a, b);
        benchmark::DoNotOptimize(out.data().data());
    }
    state.SetItemsProcessed(state.iterations() * 2LL * n * n * n);
}

void BM_Spmm(benchmark::State& state) {
    const int rows = 2708, cols = 1433, width = static_cast<int>(state.range(0));
    Rng rng(1);
    SparseMatrix s = random_csr(rows, cols, 0.0127, rng);
    Matrix d = random_matrix(cols, width, rng);
    Matrix out;
    for (auto _ : state) {
        spmm_into(out, s, d);
        benchmark::DoNotOptimize(out.data().data());
    }
    state.SetItemsProcessed(state.iterations() * 2LL * s.nnz() * width);
}

void BM_KOrder(benchmark::State& state) {
    SyntheticConfig cfg;
    cfg.n = static_cast<int>(state.range(0));
    cfg.num_classes = 5;
    cfg.h_target = 0.3;
    cfg.mean_degree = 8;
    cfg.feature_dim = 8;
    cfg.seed = 3;
    Graph g = generate_synthetic(cfg);
    for (auto _ : state) {
        SparseMatrix a2 = k_order_structure(g.adjacency, 2);
        benchmark::DoNotOptimize(a2.nnz());
    }
}

void BM_TrainEpoch(benchmark::State& state) {
    SyntheticConfig cfg;
    cfg.n = 500;
    cfg.num_classes = 5;
    cfg.h_target = 0.3;
    cfg.mean_degree = 10;
    cfg.feature_dim = 64;
    cfg.feature_signal = 1.5;
    cfg.seed = 3;
    Graph g = generate_synthetic(cfg);
    const Split split = generate_splits(g, 1, 1).front();

    ModelConfig mc;
    mc.mlp_hidden = 64;
    mc.gcn_hidden = 32;
    HogModel model(g, mc);
    auto params = model.parameters();
    AdamState adam({}, params);

    for (auto _ : state) {
        Tape tape;
        ForwardValues fv = model.forward(tape, split);
        LossValues lv = model.joint_loss(tape, fv, split);
        tape.backward(lv.total);
        adam.step(params);
        benchmark::DoNotOptimize(tape.value(lv.total)(0, 0));
    }
}

BENCHMARK(BM_Matmul)->Arg(256)->Arg(512);
BENCHMARK(BM_MatmulTN)->Arg(256)->Arg(512);
BENCHMARK(BM_Spmm)->Arg(64)->Arg(256)->Arg(512);
BENCHMARK(BM_KOrder)->Arg(500)->Arg(2000);
BENCHMARK(BM_TrainEpoch);

}  // namespace

BENCHMARK_MAIN();
