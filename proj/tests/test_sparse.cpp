#include <doctest.h>

#include "hoggcn/graph.hpp"
#include "test_support.hpp"

using namespace hoggcn;
using namespace hoggcn::test;

TEST_CASE("from_triplets sorts, sums duplicates and validates") {
    auto s = SparseMatrix::from_triplets(3, 3, {2, 0, 0, 2}, {1, 2, 2, 1}, {1.0, 0.5, 0.25, 2.0});
    CHECK(s.nnz() == 2);
    CHECK(s.col_idx == std::vector<int>{2, 1});
    CHECK(s.values[0] == doctest::Approx(0.75));
    CHECK(s.values[1] == doctest::Approx(3.0));
    CHECK_THROWS_AS(SparseMatrix::from_triplets(2, 2, {0}, {5}, {1.0}), Error);
}

TEST_CASE("transpose round trip and structure") {
    Rng rng(7);
    for (int trial = 0; trial < 3; ++trial) {
        std::vector<std::int64_t> ri;
        std::vector<int> ci;
        std::vector<double> vals;
        for (int r = 0; r < 8; ++r)
            for (int c = 0; c < 5; ++c)
                if (rng.next_double() < 0.4) {
                    ri.push_back(r);
                    ci.push_back(c);
                    vals.push_back(rng.next_normal());
                }
        auto s = SparseMatrix::from_triplets(8, 5, ri, ci, vals);
        auto tt = s.transpose().transpose();
        CHECK(tt == s);
        CHECK(max_abs_diff(s.transpose().to_dense(), [&] {
                  Matrix d(5, 8);
                  Matrix orig = s.to_dense();
                  for (int r = 0; r < 8; ++r)
                      for (int c = 0; c < 5; ++c) d(c, r) = orig(r, c);
                  return d;
              }()) == 0.0);
    }
}

TEST_CASE("sparse-dense product equals densified product") {
    Rng rng(11);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Rng r2(seed);
        std::vector<std::int64_t> ri;
        std::vector<int> ci;
        std::vector<double> vals;
        for (int r = 0; r < 12; ++r)
            for (int c = 0; c < 9; ++c)
                if (r2.next_double() < 0.3) {
                    ri.push_back(r);
                    ci.push_back(c);
                    vals.push_back(r2.next_normal());
                }
        auto s = SparseMatrix::from_triplets(12, 9, ri, ci, vals);
        Matrix d = random_matrix(9, 6, rng);
        Matrix want = matmul(s.to_dense(), d);
        CHECK(max_abs_diff(spmm(s, d), want) <= 1e-12);
    }
}

TEST_CASE("matmul transposed variants agree with plain matmul") {
    Rng rng(3);
    Matrix a = random_matrix(7, 4, rng);
    Matrix b = random_matrix(4, 5, rng);

    Matrix at(4, 7);
    for (int r = 0; r < 7; ++r)
        for (int c = 0; c < 4; ++c) at(c, r) = a(r, c);
    Matrix bt(5, 4);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 5; ++c) bt(c, r) = b(r, c);

    Matrix want = matmul(a, b);
    Matrix got_nt;
    matmul_nt_into(got_nt, a, bt);
    CHECK(max_abs_diff(got_nt, want) <= 1e-12);
    Matrix got_tn;
    matmul_tn_into(got_tn, at, b);
    CHECK(max_abs_diff(got_tn, want) <= 1e-12);
}

TEST_CASE("support index twins and pair ids") {
    Rng rng(5);
    SupportIndex sup = random_support(20, 0.2, rng);
    const SparseMatrix& m = sup.mat;
    CHECK(sup.pair_count * 2 == m.nnz());
    for (std::int64_t e = 0; e < m.nnz(); ++e) {
        const int tw = sup.twin[e];
        CHECK(sup.twin[tw] == static_cast<int>(e));
        CHECK(sup.entry_row[tw] == m.col_idx[e]);
        CHECK(m.col_idx[tw] == sup.entry_row[e]);
        CHECK(sup.pair_id[e] == sup.pair_id[tw]);
    }
    CHECK_THROWS_AS(SupportIndex::build(SparseMatrix::from_triplets(2, 2, {0}, {1}, {1.0})), Error);
    CHECK_THROWS_AS(
        SupportIndex::build(SparseMatrix::from_triplets(2, 2, {0, 0, 1}, {0, 1, 0}, {1.0, 1.0, 1.0})),
        Error);
}

namespace {

// BFS reachability within <= k hops, excluding the start node
std::vector<std::vector<int>> bfs_oracle(const SparseMatrix& adj, int k) {
    std::vector<std::vector<int>> out(adj.rows);
    for (int s = 0; s < adj.rows; ++s) {
        std::vector<int> dist(adj.rows, -1);
        dist[s] = 0;
        std::vector<int> frontier{s};
        for (int hop = 1; hop <= k && !frontier.empty(); ++hop) {
            std::vector<int> next;
            for (int u : frontier)
                for (std::int64_t e = adj.row_ptr[u]; e < adj.row_ptr[u + 1]; ++e) {
                    const int v = adj.col_idx[e];
                    if (dist[v] < 0) {
                        dist[v] = hop;
                        next.push_back(v);
                    }
                }
            frontier = std::move(next);
        }
        for (int v = 0; v < adj.rows; ++v)
            if (v != s && dist[v] > 0) out[s].push_back(v);
    }
    return out;
}

}  // namespace

TEST_CASE("k-order structure matches BFS oracle and is monotone in k") {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        SyntheticConfig cfg;
        cfg.n = 40;
        cfg.num_classes = 4;
        cfg.h_target = 0.4;
        cfg.mean_degree = 4;
        cfg.feature_dim = 3;
        cfg.seed = seed;
        Graph g = generate_synthetic(cfg);

        std::int64_t prev_nnz = 0;
        for (int k = 1; k <= 3; ++k) {
            SparseMatrix ak = k_order_structure(g.adjacency, k);
            auto want = bfs_oracle(g.adjacency, k);
            for (int r = 0; r < ak.rows; ++r) {
                std::vector<int> got(ak.col_idx.begin() + ak.row_ptr[r],
                                     ak.col_idx.begin() + ak.row_ptr[r + 1]);
                CHECK(got == want[r]);
            }
            CHECK(ak.nnz() >= prev_nnz);
            prev_nnz = ak.nnz();
            CHECK(ak.is_symmetric());
            CHECK(ak.has_zero_diagonal());
        }
    }
}

TEST_CASE("k-order structure edge cases") {
    // path 0-1-2: two hops connect the endpoints
    auto adj = SparseMatrix::from_triplets(3, 3, {0, 1, 1, 2}, {1, 0, 2, 1}, {1, 1, 1, 1});
    CHECK(k_order_structure(adj, 1) == adj);

    SparseMatrix a2 = k_order_structure(adj, 2);
    CHECK(a2.nnz() == 6);  // {0,1},{1,2},{0,2} both directions
    CHECK(a2.to_dense()(0, 2) == 1.0);
    CHECK(a2.has_zero_diagonal());

    // star: leaves pairwise linked through the center at k=2
    std::vector<std::int64_t> ri;
    std::vector<int> ci;
    for (int leaf = 1; leaf <= 4; ++leaf) {
        ri.push_back(0); ci.push_back(leaf);
        ri.push_back(leaf); ci.push_back(0);
    }
    auto star = SparseMatrix::from_triplets(5, 5, ri, ci, std::vector<double>(8, 1.0));
    SparseMatrix star2 = k_order_structure(star, 2);
    CHECK(star2.nnz() == 20);  // complete graph on 5 nodes minus diagonal
    CHECK(star2.has_zero_diagonal());

    CHECK_THROWS_AS(k_order_structure(adj, 0), Error);
}
