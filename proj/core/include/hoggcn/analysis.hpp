#pragma once

#include <filesystem>

#include "hoggcn/graph.hpp"
#include "hoggcn/sparse.hpp"

namespace hoggcn {

/// Distribution of learned homophily degree over intra- versus inter-class
/// support pairs. Each unordered pair is counted exactly once; the two
/// histograms share one binning and partition the support.
struct DegreeDistributionReport {
    static constexpr int kBins = 32;
    double lo = 0, hi = 0;                  // observed value range
    std::vector<std::int64_t> intra_hist;   // kBins counts
    std::vector<std::int64_t> inter_hist;
    double intra_mean = 0, inter_mean = 0;
    std::int64_t intra_count = 0, inter_count = 0;
};

/// h_entries holds one H value per stored support entry (CSR order).
DegreeDistributionReport degree_distribution(const std::vector<double>& h_entries,
                                             const SupportIndex& support,
                                             const std::vector<int>& labels);

void write_degree_distribution_json(const DegreeDistributionReport& rep,
                                    const std::filesystem::path& path);

/// O = 1/2 sum_i sum_{j in N(i)} H_ij ||Z_i - Z_j||^2 over ordered support
/// entries (each unordered pair contributes twice).
double smoothness_pairwise(const Matrix& z, const std::vector<double>& h_entries,
                           const SupportIndex& support);

/// The same objective via the trace identity tr(Z^T (D - A ⊙ H) Z) with D
/// the row sums of A ⊙ H. Agrees with the pairwise form to rounding; both
/// are kept as independent routes.
double smoothness_trace(const Matrix& z, const std::vector<double>& h_entries,
                        const SupportIndex& support);

struct FixedPointResult {
    Matrix z;
    double residual = 0;  // ||Z - D^-1 (A ⊙ H) Z||_inf at exit
    int iterations = 0;
};

/// Iterates Z <- D^-1 (A ⊙ H) Z until the sup-norm step change drops below
/// tol or max_iter is hit. Every node must have positive degree under
/// A ⊙ H; callers restrict to the propagating subgraph first.
FixedPointResult fixed_point_iterate(const Matrix& z0, const std::vector<double>& h_entries,
                                     const SupportIndex& support, int max_iter, double tol);

/// Connected components of the support (ignoring isolated nodes gives each
/// its own singleton component).
std::vector<int> connected_components(const SupportIndex& support, int* count);

/// True if the subgraph induced by `keep` (a component) has no odd cycle.
bool component_is_bipartite(const SupportIndex& support, const std::vector<int>& component_of,
                            int component);

/// Restriction of a support plus aligned edge values to a node subset.
/// Returns the sub-support, sub-values and the kept node ids (sorted).
struct SupportRestriction {
    SupportIndex support;
    std::vector<double> h_entries;
    std::vector<int> node_ids;
};
SupportRestriction restrict_support(const SupportIndex& support,
                                    const std::vector<double>& h_entries,
                                    const std::vector<int>& keep);

/// embeddings.tsv: node_id, label, then the final-layer representation.
void export_embeddings(const Matrix& z_final, const std::vector<int>& labels,
                       const std::filesystem::path& path);

struct TheoremReport {
    double residual = 0;
    int iterations = 0;
    double objective_initial = 0;
    double objective_limit = 0;
    int nodes_used = 0;
};

void write_theorem_json(const TheoremReport& rep, const std::filesystem::path& path);

}  // namespace hoggcn
