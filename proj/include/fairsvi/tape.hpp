#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fairsvi/rng.hpp"
#include "fairsvi/tensor.hpp"

namespace fairsvi {

class Tape;

/// Handle to a node on a tape. Cheap to copy; valid for the tape's lifetime.
struct Value {
    Tape* tape = nullptr;
    int idx = -1;

    bool valid() const { return tape != nullptr && idx >= 0; }
    const Tensor& val() const;
    Index rows() const { return val().rows(); }
    Index cols() const { return val().cols(); }
};

/// Append-only reverse-mode tape. Nodes are recorded in evaluation order,
/// so a reverse sweep over the node list is a valid topological order.
/// backward() zeroes every accumulator before the sweep; calling it twice
/// on the same root therefore yields identical gradients.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    /// Record a leaf node (input or constant).
    Value leaf(Tensor v);
    Value leaf(double v) { return leaf(Tensor::scalar(v)); }

    Value make_node(Tensor v, std::vector<int> parents,
                    std::function<void(Tape&, int)> backward);

    /// Reverse sweep from a scalar root. May be called repeatedly; each call
    /// recomputes all gradients from scratch.
    void backward(const Value& root);

    const Tensor& value(const Value& v) const { return values_[v.idx]; }
    /// Accumulated gradient after backward(); zero for nodes unreachable
    /// from the root.
    const Tensor& grad(const Value& v) const;
    Tensor& grad_at(int idx) { return grads_[idx]; }
    const Tensor& value_at(int idx) const { return values_[idx]; }

    size_t size() const { return values_.size(); }

private:
    struct NodeMeta {
        std::function<void(Tape&, int)> backward;  // null for leafs
    };
    std::vector<Tensor> values_;
    std::vector<Tensor> grads_;
    std::vector<NodeMeta> nodes_;
    bool ran_backward_ = false;
};

// ---- elementwise binary, with row/column/scalar broadcasting ----
Value add(Value a, Value b);
Value sub(Value a, Value b);
Value mul(Value a, Value b);
Value div(Value a, Value b);
inline Value operator+(Value a, Value b) { return add(a, b); }
inline Value operator-(Value a, Value b) { return sub(a, b); }
inline Value operator*(Value a, Value b) { return mul(a, b); }
inline Value operator/(Value a, Value b) { return div(a, b); }

// scalar-constant variants
Value add_const(Value a, double c);
Value mul_const(Value a, double c);
inline Value operator+(Value a, double c) { return add_const(a, c); }
inline Value operator-(Value a, double c) { return add_const(a, -c); }
inline Value operator*(Value a, double c) { return mul_const(a, c); }
inline Value operator*(double c, Value a) { return mul_const(a, c); }
inline Value operator-(Value a) { return mul_const(a, -1.0); }

// ---- unary elementwise ----
Value vexp(Value a);
Value vlog(Value a);   // domain error on non-positive input
Value vsqrt(Value a);  // domain error on non-positive input
Value square(Value a);
Value relu(Value a);
Value softplus(Value a);
Value vabs(Value a);

// ---- structure ----
Value matmul(Value a, Value b);
Value transpose(Value a);
Value concat_rows(Value a, Value b);
Value concat_cols(Value a, Value b);
Value slice_cols(Value a, Index start, Index len);
Value index_select(Value a, const std::vector<Index>& rows);
Value gather(Value a, const std::vector<Index>& flat_indices);

// ---- reductions ----
Value sum_all(Value a);
Value mean_all(Value a);
Value rowwise_sum(Value a);   // [m,n] -> [m,1]
Value colwise_sum(Value a);   // [m,n] -> [1,n]
Value rowwise_mean(Value a);  // [m,n] -> [m,1]
Value colwise_mean(Value a);  // [m,n] -> [1,n]
/// Max per row with recorded argmax; gradient routes to the first maximal
/// entry of each row.
Value rowwise_max(Value a);  // [m,n] -> [m,1]

// ---- row-wise softmax family (fused, numerically stable) ----
Value softmax(Value a);
Value log_softmax(Value a);
Value logsumexp_rows(Value a);  // [m,n] -> [m,1]

// ---- stochastic / mode-dependent ----
/// Inverted dropout: keeps an entry with probability keep_prob and rescales
/// by 1/keep_prob. Identity when training is false.
Value dropout(Value a, double keep_prob, RngStream& rng, bool training);

/// Identity forward; gradient does not flow to the input.
Value detach(Value a);

/// Per-row log-density of N(mu, C C^T + I) evaluated through a Cholesky
/// factorization: x [m,D] -> [m,1]. Differentiable in x, mu and C.
Value mvn_logpdf_op(Value x, Value mu, Value cfac);

/// log W^-1(Sigma; nu, psi = I) with Sigma = C C^T + I, as a scalar node.
/// Differentiable in C. Requires nu > D - 1.
Value inverse_wishart_logpdf_op(Value cfac, double nu);

}  // namespace fairsvi
