#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hoggcn/sparse.hpp"

namespace hoggcn {

/// A named trainable tensor. `grad` is filled by Tape::backward and consumed
/// by the optimizer; it always has the shape of `value`.
struct Parameter {
    std::string name;
    Matrix value;
    Matrix grad;
    bool weight_decay = true;  // edge parameters opt out

    Parameter() = default;
    Parameter(std::string n, Matrix v, bool wd = true)
        : name(std::move(n)), value(std::move(v)), grad(value.rows(), value.cols()), weight_decay(wd) {}
};

/// Handle to a tape node.
struct Value {
    int id = -1;
    bool valid() const { return id >= 0; }
};

/// Reverse-mode differentiation over a fixed operation vocabulary: the ops
/// the model needs and nothing more. A tape lives for one forward/backward
/// pass; operations are recorded in execution order, which is already a
/// topological order, and backward replays the adjoints once in reverse.
///
/// Dense values are Matrix; "edge values" are (nnz x 1) matrices aligned
/// with the stored entries of a SupportIndex.
class Tape {
public:
    // ----- leaves -----
    Value constant(Matrix v);
    /// Constant leaf that borrows an external matrix instead of copying it;
    /// the referenced matrix must outlive the tape and stay unmodified.
    Value constant_view(const Matrix& v);
    Value variable(Matrix v);
    /// Leaf linked to a Parameter: reads p.value in place and accumulates
    /// the gradient directly into p.grad during backward.
    Value param(Parameter& p);

    // ----- dense ops -----
    Value matmul(Value a, Value b);
    Value add(Value a, Value b);
    Value mul(Value a, Value b);          // elementwise
    Value scale(Value a, double c);
    Value relu(Value a);
    Value softplus(Value a);
    Value row_softmax(Value a);
    Value row_sum(Value a);               // (n,m) -> (n,1)
    /// Rows of `num` divided by the scalar in the same row of `denom`
    /// (n,1); rows with a zero denominator yield zero and pass no gradient.
    Value row_divide(Value num, Value denom);
    Value gather_rows(Value a, std::vector<int> idx);
    /// (1/|mask|) sum over mask of -log(p[a, labels[a]] + 1e-12).
    Value masked_cross_entropy(Value probs, const std::vector<int>& labels,
                               const std::vector<int>& mask);

    // ----- sparse ops -----
    /// Constant CSR times dense. `st` must be the transpose of `s`; it
    /// carries the adjoint. Gradient flows to the dense side only.
    Value spmm(std::shared_ptr<const SparseMatrix> s,
               std::shared_ptr<const SparseMatrix> st, Value dense);
    /// (A ⊙ t) * dense where t holds one value per stored support entry.
    /// Differentiable in both t and dense.
    Value edge_spmm(std::shared_ptr<const SupportIndex> sup, Value edge_vals, Value dense);
    /// Row sums of (A ⊙ t): the degree vector used for normalization.
    Value edge_row_sum(std::shared_ptr<const SupportIndex> sup, Value edge_vals);

    // ----- execution -----
    /// Seeds d(loss)/d(loss) = 1, runs all adjoints in reverse order, and
    /// copies gradients into linked Parameters. `loss` must be (1,1).
    void backward(Value loss);

    const Matrix& value(Value v) const;
    const Matrix& grad(Value v) const;
    bool requires_grad(Value v) const { return node(v.id).requires_grad; }
    std::size_t size() const { return nodes_.size(); }

    static constexpr double kLogEps = 1e-12;

private:
    enum class Op {
        Leaf, MatMul, Add, Mul, Scale, Relu, Softplus, RowSoftmax, RowSum,
        RowDivide, GatherRows, MaskedCE, Spmm, EdgeSpmm, EdgeRowSum,
    };

    struct Node {
        Op op = Op::Leaf;
        int a = -1, b = -1;
        Matrix val;                      // owned output (empty for borrowed leaves)
        const Matrix* ext = nullptr;     // borrowed value (param / constant_view)
        Matrix grad;                     // owned gradient (params use linked->grad)
        bool requires_grad = false;
        bool grad_ready = false;         // gradient buffer shaped and zeroed
        double scalar = 0.0;
        std::shared_ptr<const SparseMatrix> sp, sp_t;
        std::shared_ptr<const SupportIndex> sup;
        std::vector<int> idx;      // gather indices / CE mask
        std::vector<int> labels;   // CE labels
        Parameter* linked = nullptr;
    };

    Node& node(int id);
    const Node& node(int id) const;
    const Matrix& val_of(int id) const;
    int push(Node n);
    Value check(Value v) const;
    Matrix& grad_buf(int id);
    void adjoint(int id);

    std::vector<Node> nodes_;
    bool ran_backward_ = false;
};

}  // namespace hoggcn
