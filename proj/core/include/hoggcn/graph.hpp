#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hoggcn/sparse.hpp"

namespace hoggcn {

/// A stratified (train, validation, test) partition of the node set.
struct Split {
    std::vector<int> train;
    std::vector<int> validation;
    std::vector<int> test;
    std::uint64_t seed = 0;

    bool operator==(const Split&) const = default;
};

/// An undirected, unweighted, attributed graph with integer node labels.
/// The single source of truth for a dataset; immutable after construction.
///
/// Invariants (enforced by validate()):
///   - adjacency is binary, symmetric, with zero diagonal
///   - labels lie in [0, num_classes) and every class occurs
///   - features has n rows, at least one column, all values finite
struct Graph {
    std::string name;
    int n = 0;
    int f = 0;
    int num_classes = 0;
    SparseMatrix adjacency;
    Matrix features;
    std::vector<int> labels;
    std::vector<Split> splits;

    std::int64_t edge_count() const { return adjacency.nnz() / 2; }
    void validate() const;

    bool operator==(const Graph&) const = default;
};

// ---------------------------------------------------------------------------
// Dataset directory layout (UTF-8, tab separated):
//   meta.json      {"n": int, "f": int, "C": int, "name": string}
//   edges.tsv      one "u<TAB>v" per line, 0-based; symmetrized and
//                  deduplicated on load, self-loops dropped
//   features.tsv   n lines of f tab-separated decimals
//   labels.tsv     n lines, one integer each
//   splits.json    optional: [{"seed": int, "train": [...], "val": [...],
//                  "test": [...]}, ...]
// ---------------------------------------------------------------------------

Graph load_dataset(const std::filesystem::path& dir);
void save_dataset(const Graph& g, const std::filesystem::path& dir);
/// Writes a splits.json on its own (used to regenerate split files in place).
void save_splits_json(const std::vector<Split>& splits, const std::filesystem::path& path);

/// Fraction of undirected edges whose endpoints share a class.
/// Throws on an empty edge set.
double homophily_ratio(const Graph& g);

/// Binary support of A + A^2 + ... + A^k with the diagonal removed.
/// Symmetric, all stored values 1. Throws if k < 1.
SparseMatrix k_order_structure(const SparseMatrix& adjacency, int k);

/// Per class: 48% train, 32% validation, remainder test (floor rounding,
/// at least one train node per class). Deterministic in `seed`; the i-th
/// split draws from an independent stream so extending `count` never
/// changes earlier splits.
///
/// Classes smaller than `min_class_size` are rejected. The default of 3
/// guarantees a nonempty test set per class; benchmark graphs with
/// singleton classes (Texas has a one-node class) need min_class_size = 1,
/// which puts such a node in train and leaves it out of validation/test.
std::vector<Split> generate_splits(const Graph& g, int count, std::uint64_t seed,
                                   int min_class_size = 3);

struct SyntheticConfig {
    int n = 100;
    int num_classes = 2;
    double h_target = 0.5;       // expected homophily ratio
    double mean_degree = 8.0;
    int feature_dim = 8;
    double feature_signal = 1.0; // distance scale between class feature means
    std::uint64_t seed = 0;
};

/// Two-rate block model with balanced classes. Edge rates are solved so the
/// expected homophily ratio equals h_target and the expected mean degree
/// equals mean_degree; features are unit-variance Gaussians around
/// class-dependent means whose separation scales with feature_signal.
Graph generate_synthetic(const SyntheticConfig& cfg);

}  // namespace hoggcn
