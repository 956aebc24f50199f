#pragma once

#include <filesystem>
#include <memory>

#include "hoggcn/graph.hpp"
#include "hoggcn/tape.hpp"

namespace hoggcn {

/// All model hyperparameters. Defaults follow the reference configuration:
/// two-layer MLP with 512 hidden units, two-layer convolution with 256,
/// k = 2, alpha = 1, beta = 0.1, gamma = mu = 1.
struct ModelConfig {
    int k = 2;                 // order of the propagation support
    double alpha = 1.0;        // weight of the attribute-space estimate S
    double beta = 0.1;         // weight of the topology-space estimate T
    double lambda = 1.0;       // MLP loss weight
    double gamma = 1.0;        // label propagation loss weight
    double mu = 1.0;           // ego term weight
    double xi = 1.0;           // neighborhood term weight
    int mlp_hidden = 512;
    int gcn_hidden = 256;
    int mlp_layers = 2;
    int gcn_layers = 2;
    int lp_iterations = 1;
    bool uniform_h = false;    // ablation: H fixed to 1 on the support
    std::uint64_t seed = 0;

    void validate() const;
    bool operator==(const ModelConfig&) const = default;
};

/// Tape handles produced by one forward pass.
struct ForwardValues {
    Value z_final;  // (n,C) pre-softmax representation
    Value r;        // (n,C) row-stochastic prediction
    Value b;        // (n,C) MLP soft assignment matrix
    Value y_lp;     // (n,C) generalized label propagation output
    Value h_edges;  // (nnz,1) homophily degree per stored support entry
};

struct LossValues {
    Value gcn;
    Value mlp;
    Value lp;
    Value total;
};

/// One convolution step: sigma(mu * Z W_e + xi * D^-1 (A ⊙ H) Z W_n) with
/// D the row sums of (A ⊙ H); zero-degree rows contribute no neighborhood
/// term. Gradient flows through the normalization.
Value hog_conv_layer(Tape& tape, Value z_prev, std::shared_ptr<const SupportIndex> sup,
                     Value h_edges, Value w_ego, Value w_neigh,
                     double mu, double xi, bool apply_activation);

/// Homophily-guided graph convolution model over a fixed graph. One
/// instance belongs to one training run; the graph must outlive the model.
class HogModel {
public:
    HogModel(const Graph& graph, ModelConfig cfg);

    const ModelConfig& config() const { return cfg_; }
    const Graph& graph() const { return *graph_; }
    std::shared_ptr<const SupportIndex> support() const { return support_; }

    std::vector<Parameter*> parameters();
    std::vector<Matrix> snapshot() const;
    void restore(const std::vector<Matrix>& snap);

    // --- branch operations (each records onto the tape) ---

    /// MLP over raw attributes: returns (Z_m logits, B = row_softmax(Z_m)).
    std::pair<Value, Value> mlp_forward(Tape& tape);

    /// S restricted to the support: S_e = <B_row(e), B_col(e)> per entry.
    Value attribute_homophily(Tape& tape, Value b);

    /// T: softplus of the per-pair parameter, expanded to entries. Symmetric
    /// by construction (twins share the parameter).
    Value topology_homophily(Tape& tape);

    /// Y^(l) = D^-1 (A ⊙ T) Y^(l-1), `iterations` times, no label reset.
    Value generalized_label_propagation(Tape& tape, Value t_edges, const Matrix& y0,
                                        int iterations);

    /// H = alpha * S + beta * T on the support.
    Value combine_homophily(Tape& tape, Value s_edges, Value t_edges) const;

    /// Full forward pass for one split (the split supplies the one-hot
    /// training labels Y0 of the propagation branch).
    ForwardValues forward(Tape& tape, const Split& split);

    /// L_gcn + lambda * L_mlp + gamma * L_lp over the split's training mask.
    LossValues joint_loss(Tape& tape, const ForwardValues& fv, const Split& split) const;

    /// One-hot labels on the split's training nodes, zero rows elsewhere.
    Matrix initial_label_matrix(const Split& split) const;

    void save_checkpoint(const std::filesystem::path& path) const;
    static HogModel load_checkpoint(const std::filesystem::path& path, const Graph& graph);

private:
    void init_parameters();

    const Graph* graph_;
    ModelConfig cfg_;
    std::shared_ptr<const SupportIndex> support_;
    std::shared_ptr<const SparseMatrix> x_sparse_, x_sparse_t_;  // set when features are sparse
    std::vector<Parameter> params_;
    int mlp_offset_ = 0, gcn_offset_ = 0, theta_index_ = 0;
};

/// Row argmax with lowest-index tie break.
int argmax_row(const Matrix& m, int row);

/// Fraction of `ids` whose argmax prediction matches the label.
double accuracy(const Matrix& predictions, const std::vector<int>& labels,
                const std::vector<int>& ids);

}  // namespace hoggcn
