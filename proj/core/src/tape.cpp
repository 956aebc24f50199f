#include "hoggcn/tape.hpp"

#include <algorithm>
#include <cmath>

namespace hoggcn {

namespace {

double stable_softplus(double x) {
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

}  // namespace

Tape::Node& Tape::node(int id) { return nodes_[static_cast<std::size_t>(id)]; }
const Tape::Node& Tape::node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }

const Matrix& Tape::val_of(int id) const {
    const Node& n = node(id);
    return n.ext ? *n.ext : n.val;
}

const Matrix& Tape::value(Value v) const {
    check(v);
    return val_of(v.id);
}

Value Tape::check(Value v) const {
    if (v.id < 0 || v.id >= static_cast<int>(nodes_.size()))
        throw Error("Tape: value handle does not belong to this tape");
    return v;
}

int Tape::push(Node n) {
    if (ran_backward_) throw Error("Tape: cannot record after backward");
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
}

Matrix& Tape::grad_buf(int id) {
    Node& n = node(id);
    Matrix& buf = n.linked ? n.linked->grad : n.grad;
    if (!n.grad_ready) {
        const Matrix& v = val_of(id);
        if (buf.rows() != v.rows() || buf.cols() != v.cols())
            buf = Matrix(v.rows(), v.cols());
        else
            buf.fill(0.0);
        n.grad_ready = true;
    }
    return buf;
}

const Matrix& Tape::grad(Value v) const {
    check(v);
    if (!ran_backward_) throw Error("Tape: grad requested before backward");
    const Node& n = node(v.id);
    if (!n.requires_grad) throw Error("Tape: grad of a non-differentiable value");
    return n.linked ? n.linked->grad : n.grad;
}

Value Tape::constant(Matrix v) {
    Node n;
    n.val = std::move(v);
    return {push(std::move(n))};
}

Value Tape::constant_view(const Matrix& v) {
    Node n;
    n.ext = &v;
    return {push(std::move(n))};
}

Value Tape::variable(Matrix v) {
    Node n;
    n.val = std::move(v);
    n.requires_grad = true;
    return {push(std::move(n))};
}

Value Tape::param(Parameter& p) {
    for (const Node& existing : nodes_)
        if (existing.linked == &p)
            throw Error("Tape: parameter '" + p.name + "' registered twice on one tape");
    Node n;
    n.ext = &p.value;
    n.requires_grad = true;
    n.linked = &p;
    return {push(std::move(n))};
}

Value Tape::matmul(Value a, Value b) {
    check(a); check(b);
    Node n;
    n.op = Op::MatMul;
    n.a = a.id; n.b = b.id;
    matmul_into(n.val, val_of(a.id), val_of(b.id));
    n.requires_grad = node(a.id).requires_grad || node(b.id).requires_grad;
    return {push(std::move(n))};
}

Value Tape::add(Value a, Value b) {
    check(a); check(b);
    const Matrix& va = val_of(a.id);
    const Matrix& vb = val_of(b.id);
    if (!va.same_shape(vb)) throw Error("Tape::add: shape mismatch");
    Node n;
    n.op = Op::Add;
    n.a = a.id; n.b = b.id;
    n.val = va;
    for (std::size_t i = 0; i < n.val.size(); ++i) n.val.data()[i] += vb.data()[i];
    n.requires_grad = node(a.id).requires_grad || node(b.id).requires_grad;
    return {push(std::move(n))};
}

Value Tape::mul(Value a, Value b) {
    check(a); check(b);
    const Matrix& va = val_of(a.id);
    const Matrix& vb = val_of(b.id);
    if (!va.same_shape(vb)) throw Error("Tape::mul: shape mismatch");
    Node n;
    n.op = Op::Mul;
    n.a = a.id; n.b = b.id;
    n.val = va;
    for (std::size_t i = 0; i < n.val.size(); ++i) n.val.data()[i] *= vb.data()[i];
    n.requires_grad = node(a.id).requires_grad || node(b.id).requires_grad;
    return {push(std::move(n))};
}

Value Tape::scale(Value a, double c) {
    check(a);
    Node n;
    n.op = Op::Scale;
    n.a = a.id;
    n.scalar = c;
    n.val = val_of(a.id);
    for (double& x : n.val.data()) x *= c;
    n.requires_grad = node(a.id).requires_grad;
    return {push(std::move(n))};
}

Value Tape::relu(Value a) {
    check(a);
    Node n;
    n.op = Op::Relu;
    n.a = a.id;
    n.val = val_of(a.id);
    for (double& x : n.val.data()) x = std::max(x, 0.0);
    n.requires_grad = node(a.id).requires_grad;
    return {push(std::move(n))};
}

Value Tape::softplus(Value a) {
    check(a);
    Node n;
    n.op = Op::Softplus;
    n.a = a.id;
    n.val = val_of(a.id);
    for (double& x : n.val.data()) x = stable_softplus(x);
    n.requires_grad = node(a.id).requires_grad;
    return {push(std::move(n))};
}

Value Tape::row_softmax(Value a) {
    check(a);
    const Matrix& va = val_of(a.id);
    Node n;
    n.op = Op::RowSoftmax;
    n.a = a.id;
    n.val = Matrix(va.rows(), va.cols());
    for (int r = 0; r < va.rows(); ++r) {
        const double* in = va.row(r);
        double* out = n.val.row(r);
        double mx = in[0];
        for (int c = 1; c < va.cols(); ++c) mx = std::max(mx, in[c]);
        double sum = 0.0;
        for (int c = 0; c < va.cols(); ++c) {
            out[c] = std::exp(in[c] - mx);
            sum += out[c];
        }
        const double inv = 1.0 / sum;
        for (int c = 0; c < va.cols(); ++c) out[c] *= inv;
    }
    n.requires_grad = node(a.id).requires_grad;
    return {push(std::move(n))};
}

Value Tape::row_sum(Value a) {
    check(a);
    const Matrix& va = val_of(a.id);
    Node n;
    n.op = Op::RowSum;
    n.a = a.id;
    n.val = Matrix(va.rows(), 1);
    for (int r = 0; r < va.rows(); ++r) {
        const double* in = va.row(r);
        double acc = 0.0;
        for (int c = 0; c < va.cols(); ++c) acc += in[c];
        n.val(r, 0) = acc;
    }
    n.requires_grad = node(a.id).requires_grad;
    return {push(std::move(n))};
}

Value Tape::row_divide(Value num, Value denom) {
    check(num); check(denom);
    const Matrix& vn = val_of(num.id);
    const Matrix& vd = val_of(denom.id);
    if (vd.cols() != 1 || vd.rows() != vn.rows())
        throw Error("Tape::row_divide: denominator must be (rows,1)");
    Node n;
    n.op = Op::RowDivide;
    n.a = num.id; n.b = denom.id;
    n.val = Matrix(vn.rows(), vn.cols());
    for (int r = 0; r < vn.rows(); ++r) {
        const double d = vd(r, 0);
        if (d == 0.0) continue;  // zero row, no gradient
        const double inv = 1.0 / d;
        const double* in = vn.row(r);
        double* out = n.val.row(r);
        for (int c = 0; c < vn.cols(); ++c) out[c] = in[c] * inv;
    }
    n.requires_grad = node(num.id).requires_grad || node(denom.id).requires_grad;
    return {push(std::move(n))};
}

Value Tape::gather_rows(Value a, std::vector<int> idx) {
    check(a);
    const Matrix& va = val_of(a.id);
    for (int i : idx)
        if (i < 0 || i >= va.rows()) throw Error("Tape::gather_rows: index out of range");
    Node n;
    n.op = Op::GatherRows;
    n.a = a.id;
    n.val = Matrix(static_cast<int>(idx.size()), va.cols());
    for (std::size_t r = 0; r < idx.size(); ++r) {
        const double* in = va.row(idx[r]);
        double* out = n.val.row(static_cast<int>(r));
        std::copy(in, in + va.cols(), out);
    }
    n.idx = std::move(idx);
    n.requires_grad = node(a.id).requires_grad;
    return {push(std::move(n))};
}

Value Tape::masked_cross_entropy(Value probs, const std::vector<int>& labels,
                                 const std::vector<int>& mask) {
    check(probs);
    const Matrix& p = val_of(probs.id);
    if (mask.empty()) throw Error("masked_cross_entropy: empty mask");
    if (static_cast<int>(labels.size()) != p.rows())
        throw Error("masked_cross_entropy: labels size mismatch");
    double acc = 0.0;
    for (int a : mask) {
        if (a < 0 || a >= p.rows()) throw Error("masked_cross_entropy: mask id out of range");
        const int y = labels[a];
        if (y < 0 || y >= p.cols()) throw Error("masked_cross_entropy: label out of range");
        const double v = p(a, y);
        if (v < 0.0) throw Error("masked_cross_entropy: negative probability on mask");
        acc -= std::log(v + kLogEps);
    }
    Node n;
    n.op = Op::MaskedCE;
    n.a = probs.id;
    n.val = Matrix(1, 1, {acc / static_cast<double>(mask.size())});
    n.idx = mask;
    n.labels = labels;
    n.requires_grad = node(probs.id).requires_grad;
    return {push(std::move(n))};
}

Value Tape::spmm(std::shared_ptr<const SparseMatrix> s,
                 std::shared_ptr<const SparseMatrix> st, Value dense) {
    check(dense);
    if (!s || !st) throw Error("Tape::spmm: null sparse operand");
    if (st->rows != s->cols || st->cols != s->rows)
        throw Error("Tape::spmm: st is not the transpose of s");
    Node n;
    n.op = Op::Spmm;
    n.a = dense.id;
    n.sp = std::move(s);
    n.sp_t = std::move(st);
    spmm_into(n.val, *n.sp, val_of(dense.id));
    n.requires_grad = node(dense.id).requires_grad;
    return {push(std::move(n))};
}

Value Tape::edge_spmm(std::shared_ptr<const SupportIndex> sup, Value edge_vals, Value dense) {
    check(edge_vals); check(dense);
    if (!sup) throw Error("Tape::edge_spmm: null support");
    const Matrix& t = val_of(edge_vals.id);
    const Matrix& z = val_of(dense.id);
    if (t.rows() != static_cast<int>(sup->entries()) || t.cols() != 1)
        throw Error("Tape::edge_spmm: edge values must be (nnz,1)");
    if (z.rows() != sup->nodes()) throw Error("Tape::edge_spmm: dense rows != node count");
    Node n;
    n.op = Op::EdgeSpmm;
    n.a = edge_vals.id; n.b = dense.id;
    n.sup = std::move(sup);
    const SparseMatrix& m = n.sup->mat;
    n.val = Matrix(m.rows, z.cols());
    const int zc = z.cols();
    for (int r = 0; r < m.rows; ++r) {
        double* __restrict out = n.val.row(r);
        for (std::int64_t e = m.row_ptr[r]; e < m.row_ptr[r + 1]; ++e) {
            const double w = t(static_cast<int>(e), 0);
            const double* __restrict zr = z.row(m.col_idx[e]);
            for (int c = 0; c < zc; ++c) out[c] += w * zr[c];
        }
    }
    n.requires_grad = node(edge_vals.id).requires_grad || node(dense.id).requires_grad;
    return {push(std::move(n))};
}

Value Tape::edge_row_sum(std::shared_ptr<const SupportIndex> sup, Value edge_vals) {
    check(edge_vals);
    if (!sup) throw Error("Tape::edge_row_sum: null support");
    const Matrix& t = val_of(edge_vals.id);
    if (t.rows() != static_cast<int>(sup->entries()) || t.cols() != 1)
        throw Error("Tape::edge_row_sum: edge values must be (nnz,1)");
    Node n;
    n.op = Op::EdgeRowSum;
    n.a = edge_vals.id;
    n.sup = std::move(sup);
    const SparseMatrix& m = n.sup->mat;
    n.val = Matrix(m.rows, 1);
    for (int r = 0; r < m.rows; ++r) {
        double acc = 0.0;
        for (std::int64_t e = m.row_ptr[r]; e < m.row_ptr[r + 1]; ++e)
            acc += t(static_cast<int>(e), 0);
        n.val(r, 0) = acc;
    }
    n.requires_grad = node(edge_vals.id).requires_grad;
    return {push(std::move(n))};
}

void Tape::backward(Value loss) {
    check(loss);
    if (ran_backward_) throw Error("Tape: backward already ran");
    Node& ln = node(loss.id);
    if (ln.val.rows() != 1 || ln.val.cols() != 1)
        throw Error("Tape::backward: loss must be a (1,1) value");
    if (!ln.requires_grad)
        throw Error("Tape::backward: loss does not depend on any variable");
    ran_backward_ = true;
    grad_buf(loss.id)(0, 0) = 1.0;
    for (int id = loss.id; id >= 0; --id) {
        const Node& n = node(id);
        if (!n.requires_grad || !n.grad_ready) continue;  // not reachable from the loss
        adjoint(id);
    }
    // parameters the loss never touched still get well-defined zero gradients
    for (Node& n : nodes_) {
        if (n.linked && !n.grad_ready) {
            Matrix& buf = n.linked->grad;
            if (!buf.same_shape(n.linked->value))
                buf = Matrix(n.linked->value.rows(), n.linked->value.cols());
            else
                buf.fill(0.0);
            n.grad_ready = true;
        }
    }
}

void Tape::adjoint(int id) {
    Node& n = node(id);
    const Matrix& g = n.linked ? n.linked->grad : n.grad;
    auto needs = [&](int in) { return in >= 0 && node(in).requires_grad; };

    switch (n.op) {
        case Op::Leaf:
            break;
        case Op::MatMul: {
            if (needs(n.a)) matmul_nt_into(grad_buf(n.a), g, val_of(n.b), /*accumulate=*/true);
            if (needs(n.b)) matmul_tn_into(grad_buf(n.b), val_of(n.a), g, /*accumulate=*/true);
            break;
        }
        case Op::Add: {
            if (needs(n.a)) {
                Matrix& da = grad_buf(n.a);
                for (std::size_t i = 0; i < g.size(); ++i) da.data()[i] += g.data()[i];
            }
            if (needs(n.b)) {
                Matrix& db = grad_buf(n.b);
                for (std::size_t i = 0; i < g.size(); ++i) db.data()[i] += g.data()[i];
            }
            break;
        }
        case Op::Mul: {
            if (needs(n.a)) {
                Matrix& da = grad_buf(n.a);
                const Matrix& vb = val_of(n.b);
                for (std::size_t i = 0; i < g.size(); ++i) da.data()[i] += g.data()[i] * vb.data()[i];
            }
            if (needs(n.b)) {
                Matrix& db = grad_buf(n.b);
                const Matrix& va = val_of(n.a);
                for (std::size_t i = 0; i < g.size(); ++i) db.data()[i] += g.data()[i] * va.data()[i];
            }
            break;
        }
        case Op::Scale: {
            if (needs(n.a)) {
                Matrix& da = grad_buf(n.a);
                for (std::size_t i = 0; i < g.size(); ++i) da.data()[i] += n.scalar * g.data()[i];
            }
            break;
        }
        case Op::Relu: {
            if (needs(n.a)) {
                Matrix& da = grad_buf(n.a);
                const Matrix& va = val_of(n.a);
                for (std::size_t i = 0; i < g.size(); ++i)
                    if (va.data()[i] > 0.0) da.data()[i] += g.data()[i];
            }
            break;
        }
        case Op::Softplus: {
            if (needs(n.a)) {
                Matrix& da = grad_buf(n.a);
                const Matrix& va = val_of(n.a);
                for (std::size_t i = 0; i < g.size(); ++i)
                    da.data()[i] += g.data()[i] * sigmoid(va.data()[i]);
            }
            break;
        }
        case Op::RowSoftmax: {
            if (needs(n.a)) {
                Matrix& da = grad_buf(n.a);
                const Matrix& s = n.val;
                for (int r = 0; r < s.rows(); ++r) {
                    const double* sr = s.row(r);
                    const double* gr = g.row(r);
                    double dot = 0.0;
                    for (int c = 0; c < s.cols(); ++c) dot += sr[c] * gr[c];
                    double* dar = da.row(r);
                    for (int c = 0; c < s.cols(); ++c) dar[c] += sr[c] * (gr[c] - dot);
                }
            }
            break;
        }
        case Op::RowSum: {
            if (needs(n.a)) {
                Matrix& da = grad_buf(n.a);
                for (int r = 0; r < da.rows(); ++r) {
                    const double gr = g(r, 0);
                    double* dar = da.row(r);
                    for (int c = 0; c < da.cols(); ++c) dar[c] += gr;
                }
            }
            break;
        }
        case Op::RowDivide: {
            const Matrix& vd = val_of(n.b);
            if (needs(n.a)) {
                Matrix& da = grad_buf(n.a);
                for (int r = 0; r < da.rows(); ++r) {
                    const double d = vd(r, 0);
                    if (d == 0.0) continue;
                    const double inv = 1.0 / d;
                    const double* gr = g.row(r);
                    double* dar = da.row(r);
                    for (int c = 0; c < da.cols(); ++c) dar[c] += gr[c] * inv;
                }
            }
            if (needs(n.b)) {
                Matrix& db = grad_buf(n.b);
                const Matrix& out = n.val;
                for (int r = 0; r < out.rows(); ++r) {
                    const double d = vd(r, 0);
                    if (d == 0.0) continue;
                    const double* gr = g.row(r);
                    const double* outr = out.row(r);
                    double dot = 0.0;
                    for (int c = 0; c < out.cols(); ++c) dot += gr[c] * outr[c];
                    db(r, 0) -= dot / d;
                }
            }
            break;
        }
        case Op::GatherRows: {
            if (needs(n.a)) {
                Matrix& da = grad_buf(n.a);
                for (std::size_t r = 0; r < n.idx.size(); ++r) {
                    const double* gr = g.row(static_cast<int>(r));
                    double* dar = da.row(n.idx[r]);
                    for (int c = 0; c < da.cols(); ++c) dar[c] += gr[c];
                }
            }
            break;
        }
        case Op::MaskedCE: {
            if (needs(n.a)) {
                Matrix& da = grad_buf(n.a);
                const Matrix& p = val_of(n.a);
                const double gs = g(0, 0) / static_cast<double>(n.idx.size());
                for (int a : n.idx) {
                    const int y = n.labels[a];
                    da(a, y) -= gs / (p(a, y) + kLogEps);
                }
            }
            break;
        }
        case Op::Spmm: {
            if (needs(n.a)) spmm_into(grad_buf(n.a), *n.sp_t, g, /*accumulate=*/true);
            break;
        }
        case Op::EdgeSpmm: {
            const SparseMatrix& m = n.sup->mat;
            const Matrix& t = val_of(n.a);
            const Matrix& z = val_of(n.b);
            if (needs(n.a)) {
                Matrix& dt = grad_buf(n.a);
                const int zc = z.cols();
                for (int r = 0; r < m.rows; ++r) {
                    const double* __restrict gr = g.row(r);
                    for (std::int64_t e = m.row_ptr[r]; e < m.row_ptr[r + 1]; ++e) {
                        const double* __restrict zr = z.row(m.col_idx[e]);
                        double acc = 0.0;
                        for (int c = 0; c < zc; ++c) acc += gr[c] * zr[c];
                        dt(static_cast<int>(e), 0) += acc;
                    }
                }
            }
            if (needs(n.b)) {
                // dZ[j] += sum over twins: entries (j,i) mirror entries (i,j)
                Matrix& dz = grad_buf(n.b);
                const int dc = dz.cols();
                for (int j = 0; j < m.rows; ++j) {
                    double* __restrict dzr = dz.row(j);
                    for (std::int64_t e = m.row_ptr[j]; e < m.row_ptr[j + 1]; ++e) {
                        const double w = t(n.sup->twin[e], 0);
                        const double* __restrict gr = g.row(m.col_idx[e]);
                        for (int c = 0; c < dc; ++c) dzr[c] += w * gr[c];
                    }
                }
            }
            break;
        }
        case Op::EdgeRowSum: {
            if (needs(n.a)) {
                Matrix& dt = grad_buf(n.a);
                const SparseMatrix& m = n.sup->mat;
                for (int r = 0; r < m.rows; ++r) {
                    const double gr = g(r, 0);
                    for (std::int64_t e = m.row_ptr[r]; e < m.row_ptr[r + 1]; ++e)
                        dt(static_cast<int>(e), 0) += gr;
                }
            }
            break;
        }
    }
}

}  // namespace hoggcn
