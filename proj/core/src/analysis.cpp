#include "hoggcn/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>

#include <json.hpp>

namespace hoggcn {

namespace {

using nlohmann::json;

void check_entries(const std::vector<double>& h, const SupportIndex& sup) {
    if (static_cast<std::int64_t>(h.size()) != sup.entries())
        throw Error("analysis: edge value count does not match the support");
}

}  // namespace

DegreeDistributionReport degree_distribution(const std::vector<double>& h_entries,
                                             const SupportIndex& support,
                                             const std::vector<int>& labels) {
    check_entries(h_entries, support);
    if (static_cast<int>(labels.size()) != support.nodes())
        throw Error("degree_distribution: label count mismatch");

    DegreeDistributionReport rep;
    rep.intra_hist.assign(DegreeDistributionReport::kBins, 0);
    rep.inter_hist.assign(DegreeDistributionReport::kBins, 0);

    const SparseMatrix& m = support.mat;
    bool first = true;
    for (std::int64_t e = 0; e < m.nnz(); ++e) {
        if (support.entry_row[e] >= m.col_idx[e]) continue;  // one entry per pair
        const double v = h_entries[e];
        if (first) { rep.lo = rep.hi = v; first = false; }
        rep.lo = std::min(rep.lo, v);
        rep.hi = std::max(rep.hi, v);
    }

    const double width = rep.hi - rep.lo;
    for (std::int64_t e = 0; e < m.nnz(); ++e) {
        const int i = support.entry_row[e];
        const int j = m.col_idx[e];
        if (i >= j) continue;
        const double v = h_entries[e];
        int bin = 0;
        if (width > 0) {
            bin = static_cast<int>((v - rep.lo) / width * DegreeDistributionReport::kBins);
            bin = std::clamp(bin, 0, DegreeDistributionReport::kBins - 1);
        }
        if (labels[i] == labels[j]) {
            ++rep.intra_hist[bin];
            rep.intra_mean += v;
            ++rep.intra_count;
        } else {
            ++rep.inter_hist[bin];
            rep.inter_mean += v;
            ++rep.inter_count;
        }
    }
    if (rep.intra_count > 0) rep.intra_mean /= static_cast<double>(rep.intra_count);
    if (rep.inter_count > 0) rep.inter_mean /= static_cast<double>(rep.inter_count);
    return rep;
}

void write_degree_distribution_json(const DegreeDistributionReport& rep,
                                    const std::filesystem::path& path) {
    json j;
    j["bins"] = DegreeDistributionReport::kBins;
    j["range"] = {round9(rep.lo), round9(rep.hi)};
    j["intra"] = {{"count", rep.intra_count}, {"mean", round9(rep.intra_mean)}, {"hist", rep.intra_hist}};
    j["inter"] = {{"count", rep.inter_count}, {"mean", round9(rep.inter_mean)}, {"hist", rep.inter_hist}};
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

double smoothness_pairwise(const Matrix& z, const std::vector<double>& h_entries,
                           const SupportIndex& support) {
    check_entries(h_entries, support);
    if (z.rows() != support.nodes()) throw Error("smoothness: Z row count mismatch");
    const SparseMatrix& m = support.mat;
    double acc = 0;
    for (std::int64_t e = 0; e < m.nnz(); ++e) {
        const double* zi = z.row(support.entry_row[e]);
        const double* zj = z.row(m.col_idx[e]);
        double d2 = 0;
        for (int c = 0; c < z.cols(); ++c) {
            const double d = zi[c] - zj[c];
            d2 += d * d;
        }
        acc += h_entries[e] * d2;
    }
    return 0.5 * acc;
}

double smoothness_trace(const Matrix& z, const std::vector<double>& h_entries,
                        const SupportIndex& support) {
    check_entries(h_entries, support);
    if (z.rows() != support.nodes()) throw Error("smoothness: Z row count mismatch");
    const SparseMatrix& m = support.mat;
    // tr(Z^T D Z) = sum_i d_i ||Z_i||^2 ; tr(Z^T (A ⊙ H) Z) = sum_e H_e <Z_i, Z_j>
    double acc = 0;
    for (int r = 0; r < m.rows; ++r) {
        double degree = 0;
        for (std::int64_t e = m.row_ptr[r]; e < m.row_ptr[r + 1]; ++e) degree += h_entries[e];
        const double* zr = z.row(r);
        double norm2 = 0;
        for (int c = 0; c < z.cols(); ++c) norm2 += zr[c] * zr[c];
        acc += degree * norm2;
        for (std::int64_t e = m.row_ptr[r]; e < m.row_ptr[r + 1]; ++e) {
            const double* zj = z.row(m.col_idx[e]);
            double dot = 0;
            for (int c = 0; c < z.cols(); ++c) dot += zr[c] * zj[c];
            acc -= h_entries[e] * dot;
        }
    }
    return acc;
}

FixedPointResult fixed_point_iterate(const Matrix& z0, const std::vector<double>& h_entries,
                                     const SupportIndex& support, int max_iter, double tol) {
    check_entries(h_entries, support);
    if (z0.rows() != support.nodes()) throw Error("fixed_point_iterate: Z0 row count mismatch");
    const SparseMatrix& m = support.mat;

    std::vector<double> inv_degree(m.rows);
    for (int r = 0; r < m.rows; ++r) {
        double d = 0;
        for (std::int64_t e = m.row_ptr[r]; e < m.row_ptr[r + 1]; ++e) d += h_entries[e];
        if (d <= 0)
            throw Error("fixed_point_iterate: node " + std::to_string(r) +
                        " has zero degree; restrict to the propagating subgraph");
        inv_degree[r] = 1.0 / d;
    }

    auto propagate = [&](const Matrix& z, Matrix& out) {
        for (int r = 0; r < m.rows; ++r) {
            double* orow = out.row(r);
            std::fill(orow, orow + z.cols(), 0.0);
            for (std::int64_t e = m.row_ptr[r]; e < m.row_ptr[r + 1]; ++e) {
                const double w = h_entries[e];
                const double* zr = z.row(m.col_idx[e]);
                for (int c = 0; c < z.cols(); ++c) orow[c] += w * zr[c];
            }
            for (int c = 0; c < z.cols(); ++c) orow[c] *= inv_degree[r];
        }
    };

    FixedPointResult res;
    res.z = z0;
    Matrix next(z0.rows(), z0.cols());
    for (int it = 0; it < max_iter; ++it) {
        propagate(res.z, next);
        const double step = max_abs_diff(next, res.z);
        std::swap(res.z, next);
        res.iterations = it + 1;
        if (step < tol) break;
    }
    propagate(res.z, next);
    res.residual = max_abs_diff(next, res.z);
    return res;
}

std::vector<int> connected_components(const SupportIndex& support, int* count) {
    const SparseMatrix& m = support.mat;
    std::vector<int> comp(m.rows, -1);
    int c = 0;
    for (int start = 0; start < m.rows; ++start) {
        if (comp[start] >= 0) continue;
        comp[start] = c;
        std::queue<int> q;
        q.push(start);
        while (!q.empty()) {
            const int u = q.front();
            q.pop();
            for (std::int64_t e = m.row_ptr[u]; e < m.row_ptr[u + 1]; ++e) {
                const int v = m.col_idx[e];
                if (comp[v] < 0) {
                    comp[v] = c;
                    q.push(v);
                }
            }
        }
        ++c;
    }
    if (count) *count = c;
    return comp;
}

bool component_is_bipartite(const SupportIndex& support, const std::vector<int>& component_of,
                            int component) {
    const SparseMatrix& m = support.mat;
    std::vector<int> color(m.rows, -1);
    for (int start = 0; start < m.rows; ++start) {
        if (component_of[start] != component || color[start] >= 0) continue;
        color[start] = 0;
        std::queue<int> q;
        q.push(start);
        while (!q.empty()) {
            const int u = q.front();
            q.pop();
            for (std::int64_t e = m.row_ptr[u]; e < m.row_ptr[u + 1]; ++e) {
                const int v = m.col_idx[e];
                if (component_of[v] != component) continue;
                if (color[v] < 0) {
                    color[v] = 1 - color[u];
                    q.push(v);
                } else if (color[v] == color[u]) {
                    return false;
                }
            }
        }
    }
    return true;
}

SupportRestriction restrict_support(const SupportIndex& support,
                                    const std::vector<double>& h_entries,
                                    const std::vector<int>& keep) {
    check_entries(h_entries, support);
    SupportRestriction out;
    out.node_ids = keep;
    std::sort(out.node_ids.begin(), out.node_ids.end());
    out.node_ids.erase(std::unique(out.node_ids.begin(), out.node_ids.end()), out.node_ids.end());

    std::vector<int> local(support.nodes(), -1);
    for (std::size_t i = 0; i < out.node_ids.size(); ++i) {
        const int id = out.node_ids[i];
        if (id < 0 || id >= support.nodes()) throw Error("restrict_support: node id out of range");
        local[id] = static_cast<int>(i);
    }

    const SparseMatrix& m = support.mat;
    SparseMatrix sub(static_cast<int>(out.node_ids.size()), static_cast<int>(out.node_ids.size()));
    for (std::size_t i = 0; i < out.node_ids.size(); ++i) {
        const int r = out.node_ids[i];
        for (std::int64_t e = m.row_ptr[r]; e < m.row_ptr[r + 1]; ++e) {
            const int lc = local[m.col_idx[e]];
            if (lc < 0) continue;
            sub.col_idx.push_back(lc);
            sub.values.push_back(1.0);
            out.h_entries.push_back(h_entries[e]);
        }
        sub.row_ptr[i + 1] = static_cast<std::int64_t>(sub.col_idx.size());
    }
    out.support = SupportIndex::build(std::move(sub));
    return out;
}

void export_embeddings(const Matrix& z_final, const std::vector<int>& labels,
                       const std::filesystem::path& path) {
    if (static_cast<int>(labels.size()) != z_final.rows())
        throw Error("export_embeddings: label count mismatch");
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    for (int r = 0; r < z_final.rows(); ++r) {
        out << r << '\t' << labels[r];
        const double* zr = z_final.row(r);
        for (int c = 0; c < z_final.cols(); ++c) out << '\t' << fmt9(zr[c]);
        out << '\n';
    }
    if (!out) throw Error("failed writing " + path.string());
}

void write_theorem_json(const TheoremReport& rep, const std::filesystem::path& path) {
    json j = {{"residual", rep.residual},
              {"iterations", rep.iterations},
              {"objective_initial", round9(rep.objective_initial)},
              {"objective_limit", round9(rep.objective_limit)},
              {"nodes_used", rep.nodes_used}};
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

}  // namespace hoggcn
