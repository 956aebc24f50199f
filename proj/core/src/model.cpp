#include "hoggcn/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace hoggcn {

namespace {

constexpr char kMagic[4] = {'H', 'O', 'G', '1'};
constexpr std::uint32_t kVersion = 1;
constexpr double kSparseFeatureDensity = 0.25;

// ---- little-endian binary IO (checkpoints are endianness-fixed) ----

template <typename T>
void write_le(std::ostream& out, T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(buf, buf + sizeof(T));
    out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
    unsigned char buf[sizeof(T)];
    in.read(reinterpret_cast<char*>(buf), sizeof(T));
    if (!in) throw Error("checkpoint: unexpected end of file");
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(buf, buf + sizeof(T));
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
}

void write_string(std::ostream& out, const std::string& s) {
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
    const auto len = read_le<std::uint32_t>(in);
    std::string s(len, '\0');
    in.read(s.data(), len);
    if (!in) throw Error("checkpoint: unexpected end of file");
    return s;
}

double inverse_softplus_one() {
    // softplus(x) = 1  =>  x = log(e - 1)
    return std::log(std::expm1(1.0));
}

std::shared_ptr<const SparseMatrix> csr_of_dense(const Matrix& d) {
    auto s = std::make_shared<SparseMatrix>(d.rows(), d.cols());
    for (int r = 0; r < d.rows(); ++r) {
        const double* row = d.row(r);
        for (int c = 0; c < d.cols(); ++c) {
            if (row[c] != 0.0) {
                s->col_idx.push_back(c);
                s->values.push_back(row[c]);
            }
        }
        s->row_ptr[r + 1] = static_cast<std::int64_t>(s->col_idx.size());
    }
    return s;
}

}  // namespace

void ModelConfig::validate() const {
    if (k < 1) throw Error("ModelConfig: k must be >= 1");
    if (alpha < 0 || beta < 0 || lambda < 0 || gamma < 0 || mu < 0 || xi < 0)
        throw Error("ModelConfig: loss and branch weights must be nonnegative");
    if (mlp_hidden < 1 || gcn_hidden < 1) throw Error("ModelConfig: layer widths must be >= 1");
    if (mlp_layers < 1 || gcn_layers < 1) throw Error("ModelConfig: layer counts must be >= 1");
    if (lp_iterations < 1) throw Error("ModelConfig: lp_iterations must be >= 1");
}

Value hog_conv_layer(Tape& tape, Value z_prev, std::shared_ptr<const SupportIndex> sup,
                     Value h_edges, Value w_ego, Value w_neigh,
                     double mu, double xi, bool apply_activation) {
    Value ego = tape.matmul(z_prev, w_ego);
    Value nb_in = tape.matmul(z_prev, w_neigh);
    Value degree = tape.edge_row_sum(sup, h_edges);
    Value nb = tape.row_divide(tape.edge_spmm(sup, h_edges, nb_in), degree);
    Value z = tape.add(tape.scale(ego, mu), tape.scale(nb, xi));
    return apply_activation ? tape.relu(z) : z;
}

HogModel::HogModel(const Graph& graph, ModelConfig cfg) : graph_(&graph), cfg_(std::move(cfg)) {
    cfg_.validate();
    graph.validate();
    support_ = std::make_shared<const SupportIndex>(
        SupportIndex::build(k_order_structure(graph.adjacency, cfg_.k)));

    std::int64_t nonzero = 0;
    for (double v : graph.features.data())
        if (v != 0.0) ++nonzero;
    const double density = static_cast<double>(nonzero) / static_cast<double>(graph.features.size());
    if (density < kSparseFeatureDensity) {
        x_sparse_ = csr_of_dense(graph.features);
        x_sparse_t_ = std::make_shared<const SparseMatrix>(x_sparse_->transpose());
    }

    init_parameters();
}

void HogModel::init_parameters() {
    const int f = graph_->f;
    const int C = graph_->num_classes;
    Rng rng(seed_mix(cfg_.seed, 0x10d31));

    auto uniform_init = [&](const std::string& name, int in_dim, int out_dim) {
        Matrix w(in_dim, out_dim);
        const double bound = 1.0 / std::sqrt(static_cast<double>(in_dim));
        for (double& x : w.data()) x = rng.uniform(-bound, bound);
        params_.emplace_back(name, std::move(w));
    };

    mlp_offset_ = 0;
    for (int l = 0; l < cfg_.mlp_layers; ++l) {
        const int in_dim = (l == 0) ? f : cfg_.mlp_hidden;
        const int out_dim = (l + 1 == cfg_.mlp_layers) ? C : cfg_.mlp_hidden;
        uniform_init("mlp.w" + std::to_string(l), in_dim, out_dim);
    }
    gcn_offset_ = static_cast<int>(params_.size());
    for (int l = 0; l < cfg_.gcn_layers; ++l) {
        const int in_dim = (l == 0) ? f : cfg_.gcn_hidden;
        const int out_dim = (l + 1 == cfg_.gcn_layers) ? C : cfg_.gcn_hidden;
        uniform_init("gcn.we" + std::to_string(l), in_dim, out_dim);
        uniform_init("gcn.wn" + std::to_string(l), in_dim, out_dim);
    }
    theta_index_ = static_cast<int>(params_.size());
    Matrix theta(static_cast<int>(support_->pair_count), 1);
    theta.fill(inverse_softplus_one());  // untrained T is uniform propagation
    params_.emplace_back("theta_t", std::move(theta), /*weight_decay=*/false);
}

std::vector<Parameter*> HogModel::parameters() {
    std::vector<Parameter*> out;
    out.reserve(params_.size());
    for (Parameter& p : params_) out.push_back(&p);
    return out;
}

std::vector<Matrix> HogModel::snapshot() const {
    std::vector<Matrix> snap;
    snap.reserve(params_.size());
    for (const Parameter& p : params_) snap.push_back(p.value);
    return snap;
}

void HogModel::restore(const std::vector<Matrix>& snap) {
    if (snap.size() != params_.size()) throw Error("HogModel::restore: snapshot size mismatch");
    for (std::size_t i = 0; i < snap.size(); ++i) {
        if (!snap[i].same_shape(params_[i].value))
            throw Error("HogModel::restore: shape mismatch for " + params_[i].name);
        params_[i].value = snap[i];
    }
}

std::pair<Value, Value> HogModel::mlp_forward(Tape& tape) {
    std::vector<Value> w(cfg_.mlp_layers);
    for (int l = 0; l < cfg_.mlp_layers; ++l) w[l] = tape.param(params_[mlp_offset_ + l]);

    Value h{};
    for (int l = 0; l < cfg_.mlp_layers; ++l) {
        if (l == 0) {
            h = x_sparse_ ? tape.spmm(x_sparse_, x_sparse_t_, w[0])
                          : tape.matmul(tape.constant_view(graph_->features), w[0]);
        } else {
            h = tape.matmul(h, w[l]);
        }
        if (l + 1 < cfg_.mlp_layers) h = tape.relu(h);
    }
    return {h, tape.row_softmax(h)};
}

Value HogModel::attribute_homophily(Tape& tape, Value b) {
    Value rows = tape.gather_rows(b, support_->entry_row);
    Value cols = tape.gather_rows(b, support_->mat.col_idx);
    return tape.row_sum(tape.mul(rows, cols));
}

Value HogModel::topology_homophily(Tape& tape) {
    Value theta = tape.param(params_[theta_index_]);
    return tape.softplus(tape.gather_rows(theta, support_->pair_id));
}

Value HogModel::generalized_label_propagation(Tape& tape, Value t_edges, const Matrix& y0,
                                              int iterations) {
    if (iterations < 1) throw Error("generalized_label_propagation: iterations must be >= 1");
    Value degree = tape.edge_row_sum(support_, t_edges);
    Value y = tape.constant(y0);
    for (int i = 0; i < iterations; ++i)
        y = tape.row_divide(tape.edge_spmm(support_, t_edges, y), degree);
    return y;
}

Value HogModel::combine_homophily(Tape& tape, Value s_edges, Value t_edges) const {
    const Matrix& s = tape.value(s_edges);
    const Matrix& t = tape.value(t_edges);
    if (!s.same_shape(t)) throw Error("combine_homophily: S and T support mismatch");
    return tape.add(tape.scale(s_edges, cfg_.alpha), tape.scale(t_edges, cfg_.beta));
}

Matrix HogModel::initial_label_matrix(const Split& split) const {
    Matrix y0(graph_->n, graph_->num_classes);
    for (int id : split.train) {
        if (id < 0 || id >= graph_->n) throw Error("initial_label_matrix: train id out of range");
        y0(id, graph_->labels[id]) = 1.0;
    }
    return y0;
}

ForwardValues HogModel::forward(Tape& tape, const Split& split) {
    ForwardValues fv;

    auto [zm, b] = mlp_forward(tape);
    (void)zm;
    fv.b = b;

    Value t = topology_homophily(tape);
    fv.y_lp = generalized_label_propagation(tape, t, initial_label_matrix(split), cfg_.lp_iterations);

    if (cfg_.uniform_h) {
        fv.h_edges = tape.constant(Matrix::full(static_cast<int>(support_->entries()), 1, 1.0));
    } else {
        Value s = attribute_homophily(tape, b);
        fv.h_edges = combine_homophily(tape, s, t);
    }

    std::vector<Value> we(cfg_.gcn_layers), wn(cfg_.gcn_layers);
    for (int l = 0; l < cfg_.gcn_layers; ++l) {
        we[l] = tape.param(params_[gcn_offset_ + 2 * l]);
        wn[l] = tape.param(params_[gcn_offset_ + 2 * l + 1]);
    }

    Value degree = tape.edge_row_sum(support_, fv.h_edges);
    Value z{};
    for (int l = 0; l < cfg_.gcn_layers; ++l) {
        Value ego, nb_in;
        if (l == 0) {
            if (x_sparse_) {
                ego = tape.spmm(x_sparse_, x_sparse_t_, we[0]);
                nb_in = tape.spmm(x_sparse_, x_sparse_t_, wn[0]);
            } else {
                Value x = tape.constant_view(graph_->features);
                ego = tape.matmul(x, we[0]);
                nb_in = tape.matmul(x, wn[0]);
            }
        } else {
            ego = tape.matmul(z, we[l]);
            nb_in = tape.matmul(z, wn[l]);
        }
        Value nb = tape.row_divide(tape.edge_spmm(support_, fv.h_edges, nb_in), degree);
        z = tape.add(tape.scale(ego, cfg_.mu), tape.scale(nb, cfg_.xi));
        if (l + 1 < cfg_.gcn_layers) z = tape.relu(z);
    }

    fv.z_final = z;
    fv.r = tape.row_softmax(z);
    return fv;
}

LossValues HogModel::joint_loss(Tape& tape, const ForwardValues& fv, const Split& split) const {
    if (split.train.empty()) throw Error("joint_loss: empty training mask");
    LossValues lv;
    lv.gcn = tape.masked_cross_entropy(fv.r, graph_->labels, split.train);
    lv.mlp = tape.masked_cross_entropy(fv.b, graph_->labels, split.train);
    lv.lp = tape.masked_cross_entropy(fv.y_lp, graph_->labels, split.train);
    lv.total = tape.add(tape.add(lv.gcn, tape.scale(lv.mlp, cfg_.lambda)),
                        tape.scale(lv.lp, cfg_.gamma));
    return lv;
}

void HogModel::save_checkpoint(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write checkpoint: " + path.string());

    out.write(kMagic, 4);
    write_le<std::uint32_t>(out, kVersion);
    write_le<std::int32_t>(out, cfg_.k);
    write_le<std::int32_t>(out, cfg_.mlp_hidden);
    write_le<std::int32_t>(out, cfg_.gcn_hidden);
    write_le<std::int32_t>(out, cfg_.mlp_layers);
    write_le<std::int32_t>(out, cfg_.gcn_layers);
    write_le<std::int32_t>(out, cfg_.lp_iterations);
    write_le<std::uint8_t>(out, cfg_.uniform_h ? 1 : 0);
    write_le<double>(out, cfg_.alpha);
    write_le<double>(out, cfg_.beta);
    write_le<double>(out, cfg_.lambda);
    write_le<double>(out, cfg_.gamma);
    write_le<double>(out, cfg_.mu);
    write_le<double>(out, cfg_.xi);
    write_le<std::uint64_t>(out, cfg_.seed);

    write_le<std::int32_t>(out, graph_->n);
    write_le<std::int32_t>(out, graph_->f);
    write_le<std::int32_t>(out, graph_->num_classes);

    const SparseMatrix& m = support_->mat;
    write_le<std::int64_t>(out, m.nnz());
    for (std::int64_t v : m.row_ptr) write_le<std::int64_t>(out, v);
    for (int v : m.col_idx) write_le<std::int32_t>(out, v);
    for (int v : support_->pair_id) write_le<std::int32_t>(out, v);
    write_le<std::int32_t>(out, support_->pair_count);

    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(params_.size()));
    for (const Parameter& p : params_) {
        write_string(out, p.name);
        write_le<std::int32_t>(out, p.value.rows());
        write_le<std::int32_t>(out, p.value.cols());
        write_le<std::uint8_t>(out, p.weight_decay ? 1 : 0);
        for (double v : p.value.data()) write_le<double>(out, v);
    }
    if (!out) throw Error("failed writing checkpoint: " + path.string());
}

HogModel HogModel::load_checkpoint(const std::filesystem::path& path, const Graph& graph) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("missing checkpoint: " + path.string());

    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw Error("not a model checkpoint: " + path.string());
    const auto version = read_le<std::uint32_t>(in);
    if (version != kVersion)
        throw Error("unsupported checkpoint version " + std::to_string(version));

    ModelConfig cfg;
    cfg.k = read_le<std::int32_t>(in);
    cfg.mlp_hidden = read_le<std::int32_t>(in);
    cfg.gcn_hidden = read_le<std::int32_t>(in);
    cfg.mlp_layers = read_le<std::int32_t>(in);
    cfg.gcn_layers = read_le<std::int32_t>(in);
    cfg.lp_iterations = read_le<std::int32_t>(in);
    cfg.uniform_h = read_le<std::uint8_t>(in) != 0;
    cfg.alpha = read_le<double>(in);
    cfg.beta = read_le<double>(in);
    cfg.lambda = read_le<double>(in);
    cfg.gamma = read_le<double>(in);
    cfg.mu = read_le<double>(in);
    cfg.xi = read_le<double>(in);
    cfg.seed = read_le<std::uint64_t>(in);

    const auto n = read_le<std::int32_t>(in);
    const auto f = read_le<std::int32_t>(in);
    const auto C = read_le<std::int32_t>(in);
    if (n != graph.n || f != graph.f || C != graph.num_classes)
        throw Error("checkpoint was trained on a different graph (n/f/C mismatch)");

    HogModel model(graph, cfg);

    const SparseMatrix& m = model.support_->mat;
    const auto nnz = read_le<std::int64_t>(in);
    if (nnz != m.nnz()) throw Error("checkpoint support does not match the graph");
    for (std::int64_t i = 0; i <= n; ++i)
        if (read_le<std::int64_t>(in) != m.row_ptr[i])
            throw Error("checkpoint support does not match the graph");
    for (std::int64_t i = 0; i < nnz; ++i)
        if (read_le<std::int32_t>(in) != m.col_idx[i])
            throw Error("checkpoint support does not match the graph");
    for (std::int64_t i = 0; i < nnz; ++i)
        if (read_le<std::int32_t>(in) != model.support_->pair_id[i])
            throw Error("checkpoint support does not match the graph");
    if (read_le<std::int32_t>(in) != model.support_->pair_count)
        throw Error("checkpoint support does not match the graph");

    const auto param_count = read_le<std::uint32_t>(in);
    if (param_count != model.params_.size()) throw Error("checkpoint parameter count mismatch");
    for (Parameter& p : model.params_) {
        const std::string name = read_string(in);
        const auto rows = read_le<std::int32_t>(in);
        const auto cols = read_le<std::int32_t>(in);
        const bool wd = read_le<std::uint8_t>(in) != 0;
        if (name != p.name || rows != p.value.rows() || cols != p.value.cols() || wd != p.weight_decay)
            throw Error("checkpoint parameter mismatch at " + p.name);
        for (double& v : p.value.data()) v = read_le<double>(in);
    }
    return model;
}

int argmax_row(const Matrix& m, int row) {
    const double* r = m.row(row);
    int best = 0;
    for (int c = 1; c < m.cols(); ++c)
        if (r[c] > r[best]) best = c;  // ties keep the lowest index
    return best;
}

double accuracy(const Matrix& predictions, const std::vector<int>& labels,
                const std::vector<int>& ids) {
    if (ids.empty()) throw Error("accuracy: empty node set");
    std::int64_t correct = 0;
    for (int id : ids)
        if (argmax_row(predictions, id) == labels[id]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(ids.size());
}

}  // namespace hoggcn
