#include "fairsvi/tape.hpp"

#include <algorithm>
#include <cmath>

namespace fairsvi {

const Tensor& Value::val() const { return tape->value(*this); }

Value Tape::leaf(Tensor v) {
    values_.push_back(std::move(v));
    grads_.emplace_back();
    nodes_.push_back({nullptr});
    return Value{this, static_cast<int>(values_.size()) - 1};
}

Value Tape::make_node(Tensor v, std::vector<int> parents,
                      std::function<void(Tape&, int)> backward) {
    (void)parents;  // parent order is captured inside the backward closure
    values_.push_back(std::move(v));
    grads_.emplace_back();
    nodes_.push_back({std::move(backward)});
    return Value{this, static_cast<int>(values_.size()) - 1};
}

void Tape::backward(const Value& root) {
    if (root.tape != this || root.idx < 0) throw ContractError("backward: foreign or invalid root");
    if (values_[root.idx].size() != 1)
        throw ContractError("backward: root must be scalar, got shape " +
                            values_[root.idx].shape_str());
    for (size_t i = 0; i < values_.size(); ++i) grads_[i] = Tensor::zeros_like(values_[i]);
    grads_[root.idx][0] = 1.0;
    for (int i = root.idx; i >= 0; --i)
        if (nodes_[i].backward) nodes_[i].backward(*this, i);
    ran_backward_ = true;
}

const Tensor& Tape::grad(const Value& v) const {
    if (!ran_backward_) throw ContractError("grad requested before backward()");
    return grads_[v.idx];
}

namespace {

Tape& same_tape(const Value& a, const Value& b, const char* op) {
    if (a.tape == nullptr || b.tape == nullptr || a.tape != b.tape)
        throw ContractError(std::string(op) + ": operands on different tapes");
    return *a.tape;
}

void check_broadcast(const Tensor& a, const Tensor& b, const char* op) {
    auto ok = [](Index x, Index y) { return x == y || x == 1 || y == 1; };
    if (!ok(a.rows(), b.rows()) || !ok(a.cols(), b.cols()))
        throw DimensionError(std::string(op) + ": incompatible shapes " + a.shape_str() + " vs " +
                             b.shape_str());
}

template <typename F>
Tensor apply_bin(const Tensor& a, const Tensor& b, F f) {
    const Index r = std::max(a.rows(), b.rows());
    const Index c = std::max(a.cols(), b.cols());
    Tensor out = Tensor::zeros(r, c);
    for (Index i = 0; i < r; ++i) {
        const Index ai = a.rows() == 1 ? 0 : i;
        const Index bi = b.rows() == 1 ? 0 : i;
        for (Index j = 0; j < c; ++j) {
            const Index aj = a.cols() == 1 ? 0 : j;
            const Index bj = b.cols() == 1 ? 0 : j;
            out(i, j) = f(a(ai, aj), b(bi, bj));
        }
    }
    return out;
}

void accum(Tape& t, int parent, const Tensor& contrib) {
    Tensor& g = t.grad_at(parent);
    const Tensor red = contrib.reduced_to(g.rows(), g.cols());
    g.array() += red.array();
}

template <typename F>
Value unary_op(Value a, F fwd, std::function<void(Tape&, int, int)> back, const char* /*op*/) {
    Tape& t = *a.tape;
    const Tensor& A = a.val();
    Tensor out = Tensor::zeros_like(A);
    for (Index k = 0; k < A.size(); ++k) out[k] = fwd(A[k]);
    const int pa = a.idx;
    return t.make_node(std::move(out), {pa},
                       [pa, back](Tape& tt, int self) { back(tt, self, pa); });
}

}  // namespace

// ---------------------------------------------------------------- binary ops

Value add(Value a, Value b) {
    Tape& t = same_tape(a, b, "add");
    check_broadcast(a.val(), b.val(), "add");
    Tensor out = apply_bin(a.val(), b.val(), [](double x, double y) { return x + y; });
    const int pa = a.idx, pb = b.idx;
    return t.make_node(std::move(out), {pa, pb}, [pa, pb](Tape& tt, int self) {
        const Tensor& g = tt.grad_at(self);
        accum(tt, pa, g);
        accum(tt, pb, g);
    });
}

Value sub(Value a, Value b) {
    Tape& t = same_tape(a, b, "sub");
    check_broadcast(a.val(), b.val(), "sub");
    Tensor out = apply_bin(a.val(), b.val(), [](double x, double y) { return x - y; });
    const int pa = a.idx, pb = b.idx;
    return t.make_node(std::move(out), {pa, pb}, [pa, pb](Tape& tt, int self) {
        const Tensor& g = tt.grad_at(self);
        accum(tt, pa, g);
        Tensor neg = g;
        neg.array() *= -1.0;
        accum(tt, pb, neg);
    });
}

Value mul(Value a, Value b) {
    Tape& t = same_tape(a, b, "mul");
    check_broadcast(a.val(), b.val(), "mul");
    Tensor out = apply_bin(a.val(), b.val(), [](double x, double y) { return x * y; });
    const int pa = a.idx, pb = b.idx;
    return t.make_node(std::move(out), {pa, pb}, [pa, pb](Tape& tt, int self) {
        const Tensor& g = tt.grad_at(self);
        accum(tt, pa, apply_bin(g, tt.value_at(pb), [](double x, double y) { return x * y; }));
        accum(tt, pb, apply_bin(g, tt.value_at(pa), [](double x, double y) { return x * y; }));
    });
}

Value div(Value a, Value b) {
    Tape& t = same_tape(a, b, "div");
    check_broadcast(a.val(), b.val(), "div");
    Tensor out = apply_bin(a.val(), b.val(), [](double x, double y) { return x / y; });
    const int pa = a.idx, pb = b.idx;
    return t.make_node(std::move(out), {pa, pb}, [pa, pb](Tape& tt, int self) {
        const Tensor& g = tt.grad_at(self);
        const Tensor& out_v = tt.value_at(self);
        accum(tt, pa, apply_bin(g, tt.value_at(pb), [](double x, double y) { return x / y; }));
        Tensor gout = g;
        gout.array() *= out_v.array();
        accum(tt, pb,
              apply_bin(gout, tt.value_at(pb), [](double x, double y) { return -x / y; }));
    });
}

Value add_const(Value a, double c) {
    return unary_op(
        a, [c](double x) { return x + c; },
        [](Tape& tt, int self, int pa) { accum(tt, pa, tt.grad_at(self)); }, "add_const");
}

Value mul_const(Value a, double c) {
    return unary_op(
        a, [c](double x) { return x * c; },
        [c](Tape& tt, int self, int pa) {
            Tensor g = tt.grad_at(self);
            g.array() *= c;
            accum(tt, pa, g);
        },
        "mul_const");
}

// ----------------------------------------------------------------- unary ops

Value vexp(Value a) {
    return unary_op(
        a, [](double x) { return std::exp(x); },
        [](Tape& tt, int self, int pa) {
            Tensor g = tt.grad_at(self);
            g.array() *= tt.value_at(self).array();
            accum(tt, pa, g);
        },
        "exp");
}

Value vlog(Value a) {
    const Tensor& A = a.val();
    for (Index k = 0; k < A.size(); ++k)
        if (!(A[k] > 0.0)) throw DomainError("log of non-positive input");
    return unary_op(
        a, [](double x) { return std::log(x); },
        [](Tape& tt, int self, int pa) {
            Tensor g = tt.grad_at(self);
            g.array() /= tt.value_at(pa).array();
            accum(tt, pa, g);
        },
        "log");
}

Value vsqrt(Value a) {
    const Tensor& A = a.val();
    for (Index k = 0; k < A.size(); ++k)
        if (!(A[k] > 0.0)) throw DomainError("sqrt of non-positive input");
    return unary_op(
        a, [](double x) { return std::sqrt(x); },
        [](Tape& tt, int self, int pa) {
            Tensor g = tt.grad_at(self);
            g.array() /= 2.0 * tt.value_at(self).array();
            accum(tt, pa, g);
        },
        "sqrt");
}

Value square(Value a) {
    return unary_op(
        a, [](double x) { return x * x; },
        [](Tape& tt, int self, int pa) {
            Tensor g = tt.grad_at(self);
            g.array() *= 2.0 * tt.value_at(pa).array();
            accum(tt, pa, g);
        },
        "square");
}

Value relu(Value a) {
    return unary_op(
        a, [](double x) { return x > 0.0 ? x : 0.0; },
        [](Tape& tt, int self, int pa) {
            Tensor g = tt.grad_at(self);
            const Tensor& A = tt.value_at(pa);
            for (Index k = 0; k < g.size(); ++k)
                if (!(A[k] > 0.0)) g[k] = 0.0;
            accum(tt, pa, g);
        },
        "relu");
}

namespace {
double softplus_fwd(double x) {
    if (x > 30.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}
double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}
}  // namespace

Value softplus(Value a) {
    return unary_op(
        a, softplus_fwd,
        [](Tape& tt, int self, int pa) {
            Tensor g = tt.grad_at(self);
            const Tensor& A = tt.value_at(pa);
            for (Index k = 0; k < g.size(); ++k) g[k] *= sigmoid(A[k]);
            accum(tt, pa, g);
        },
        "softplus");
}

Value vabs(Value a) {
    return unary_op(
        a, [](double x) { return std::abs(x); },
        [](Tape& tt, int self, int pa) {
            Tensor g = tt.grad_at(self);
            const Tensor& A = tt.value_at(pa);
            for (Index k = 0; k < g.size(); ++k)
                g[k] *= (A[k] > 0.0) ? 1.0 : (A[k] < 0.0 ? -1.0 : 0.0);
            accum(tt, pa, g);
        },
        "abs");
}

// ------------------------------------------------------------------ structure

Value matmul(Value a, Value b) {
    Tape& t = same_tape(a, b, "matmul");
    const Tensor& A = a.val();
    const Tensor& B = b.val();
    if (A.cols() != B.rows())
        throw DimensionError("matmul: " + A.shape_str() + " x " + B.shape_str());
    Tensor out = Tensor::zeros(A.rows(), B.cols());
    out.mat() = A.mat() * B.mat();
    const int pa = a.idx, pb = b.idx;
    return t.make_node(std::move(out), {pa, pb}, [pa, pb](Tape& tt, int self) {
        const Tensor& g = tt.grad_at(self);
        const Tensor& A2 = tt.value_at(pa);
        const Tensor& B2 = tt.value_at(pb);
        tt.grad_at(pa).mat() += g.mat() * B2.mat().transpose();
        tt.grad_at(pb).mat() += A2.mat().transpose() * g.mat();
    });
}

Value transpose(Value a) {
    Tape& t = *a.tape;
    const Tensor& A = a.val();
    Tensor out = Tensor::zeros(A.cols(), A.rows());
    out.mat() = A.mat().transpose();
    const int pa = a.idx;
    return t.make_node(std::move(out), {pa}, [pa](Tape& tt, int self) {
        tt.grad_at(pa).mat() += tt.grad_at(self).mat().transpose();
    });
}

Value concat_rows(Value a, Value b) {
    Tape& t = same_tape(a, b, "concat_rows");
    const Tensor& A = a.val();
    const Tensor& B = b.val();
    if (A.cols() != B.cols())
        throw DimensionError("concat_rows: " + A.shape_str() + " vs " + B.shape_str());
    Tensor out = Tensor::zeros(A.rows() + B.rows(), A.cols());
    out.mat().topRows(A.rows()) = A.mat();
    out.mat().bottomRows(B.rows()) = B.mat();
    const int pa = a.idx, pb = b.idx;
    const Index ra = A.rows(), rb = B.rows();
    return t.make_node(std::move(out), {pa, pb}, [pa, pb, ra, rb](Tape& tt, int self) {
        const Tensor& g = tt.grad_at(self);
        tt.grad_at(pa).mat() += g.mat().topRows(ra);
        tt.grad_at(pb).mat() += g.mat().bottomRows(rb);
    });
}

Value concat_cols(Value a, Value b) {
    Tape& t = same_tape(a, b, "concat_cols");
    const Tensor& A = a.val();
    const Tensor& B = b.val();
    if (A.rows() != B.rows())
        throw DimensionError("concat_cols: " + A.shape_str() + " vs " + B.shape_str());
    Tensor out = Tensor::zeros(A.rows(), A.cols() + B.cols());
    out.mat().leftCols(A.cols()) = A.mat();
    out.mat().rightCols(B.cols()) = B.mat();
    const int pa = a.idx, pb = b.idx;
    const Index ca = A.cols(), cb = B.cols();
    return t.make_node(std::move(out), {pa, pb}, [pa, pb, ca, cb](Tape& tt, int self) {
        const Tensor& g = tt.grad_at(self);
        tt.grad_at(pa).mat() += g.mat().leftCols(ca);
        tt.grad_at(pb).mat() += g.mat().rightCols(cb);
    });
}

Value slice_cols(Value a, Index start, Index len) {
    Tape& t = *a.tape;
    const Tensor& A = a.val();
    if (start < 0 || len <= 0 || start + len > A.cols())
        throw DimensionError("slice_cols: range [" + std::to_string(start) + "," +
                             std::to_string(start + len) + ") out of " + A.shape_str());
    Tensor out = Tensor::zeros(A.rows(), len);
    out.mat() = A.mat().middleCols(start, len);
    const int pa = a.idx;
    return t.make_node(std::move(out), {pa}, [pa, start, len](Tape& tt, int self) {
        tt.grad_at(pa).mat().middleCols(start, len) += tt.grad_at(self).mat();
    });
}

Value index_select(Value a, const std::vector<Index>& rows) {
    Tape& t = *a.tape;
    const Tensor& A = a.val();
    for (Index r : rows)
        if (r < 0 || r >= A.rows()) throw DimensionError("index_select: row out of range");
    Tensor out = Tensor::zeros(static_cast<Index>(rows.size()), A.cols());
    for (size_t i = 0; i < rows.size(); ++i) out.mat().row(static_cast<Index>(i)) = A.mat().row(rows[i]);
    const int pa = a.idx;
    return t.make_node(std::move(out), {pa}, [pa, rows](Tape& tt, int self) {
        const Tensor& g = tt.grad_at(self);
        Tensor& ga = tt.grad_at(pa);
        for (size_t i = 0; i < rows.size(); ++i)
            ga.mat().row(rows[i]) += g.mat().row(static_cast<Index>(i));
    });
}

Value gather(Value a, const std::vector<Index>& flat_indices) {
    Tape& t = *a.tape;
    const Tensor& A = a.val();
    for (Index k : flat_indices)
        if (k < 0 || k >= A.size()) throw DimensionError("gather: index out of range");
    Tensor out = Tensor::zeros(1, static_cast<Index>(flat_indices.size()));
    for (size_t i = 0; i < flat_indices.size(); ++i) out[static_cast<Index>(i)] = A[flat_indices[i]];
    const int pa = a.idx;
    return t.make_node(std::move(out), {pa}, [pa, flat_indices](Tape& tt, int self) {
        const Tensor& g = tt.grad_at(self);
        Tensor& ga = tt.grad_at(pa);
        for (size_t i = 0; i < flat_indices.size(); ++i)
            ga[flat_indices[i]] += g[static_cast<Index>(i)];
    });
}

// ----------------------------------------------------------------- reductions

Value sum_all(Value a) {
    Tape& t = *a.tape;
    Tensor out = Tensor::scalar(a.val().array().sum());
    const int pa = a.idx;
    return t.make_node(std::move(out), {pa}, [pa](Tape& tt, int self) {
        tt.grad_at(pa).array() += tt.grad_at(self)[0];
    });
}

Value mean_all(Value a) {
    const double n = static_cast<double>(a.val().size());
    return mul_const(sum_all(a), 1.0 / n);
}

Value rowwise_sum(Value a) {
    Tape& t = *a.tape;
    const Tensor& A = a.val();
    Tensor out = Tensor::zeros(A.rows(), 1);
    out.mat() = A.mat().rowwise().sum();
    const int pa = a.idx;
    return t.make_node(std::move(out), {pa}, [pa](Tape& tt, int self) {
        const Tensor& g = tt.grad_at(self);
        tt.grad_at(pa).mat().colwise() += g.mat().col(0);
    });
}

Value colwise_sum(Value a) {
    Tape& t = *a.tape;
    const Tensor& A = a.val();
    Tensor out = Tensor::zeros(1, A.cols());
    out.mat() = A.mat().colwise().sum();
    const int pa = a.idx;
    return t.make_node(std::move(out), {pa}, [pa](Tape& tt, int self) {
        const Tensor& g = tt.grad_at(self);
        tt.grad_at(pa).mat().rowwise() += g.mat().row(0);
    });
}

Value rowwise_mean(Value a) {
    return mul_const(rowwise_sum(a), 1.0 / static_cast<double>(a.val().cols()));
}

Value colwise_mean(Value a) {
    return mul_const(colwise_sum(a), 1.0 / static_cast<double>(a.val().rows()));
}

Value rowwise_max(Value a) {
    Tape& t = *a.tape;
    const Tensor& A = a.val();
    Tensor out = Tensor::zeros(A.rows(), 1);
    std::vector<Index> arg(static_cast<size_t>(A.rows()), 0);
    for (Index i = 0; i < A.rows(); ++i) {
        double best = A(i, 0);
        Index bj = 0;
        for (Index j = 1; j < A.cols(); ++j)
            if (A(i, j) > best) {
                best = A(i, j);
                bj = j;
            }
        out(i, 0) = best;
        arg[static_cast<size_t>(i)] = bj;
    }
    const int pa = a.idx;
    return t.make_node(std::move(out), {pa}, [pa, arg](Tape& tt, int self) {
        const Tensor& g = tt.grad_at(self);
        Tensor& ga = tt.grad_at(pa);
        for (Index i = 0; i < g.rows(); ++i) ga(i, arg[static_cast<size_t>(i)]) += g(i, 0);
    });
}

// ------------------------------------------------------------ softmax family

Value softmax(Value a) {
    Tape& t = *a.tape;
    const Tensor& A = a.val();
    Tensor out = Tensor::zeros_like(A);
    for (Index i = 0; i < A.rows(); ++i) {
        const double m = A.mat().row(i).maxCoeff();
        double s = 0.0;
        for (Index j = 0; j < A.cols(); ++j) {
            out(i, j) = std::exp(A(i, j) - m);
            s += out(i, j);
        }
        for (Index j = 0; j < A.cols(); ++j) out(i, j) /= s;
    }
    const int pa = a.idx;
    return t.make_node(std::move(out), {pa}, [pa](Tape& tt, int self) {
        const Tensor& g = tt.grad_at(self);
        const Tensor& s = tt.value_at(self);
        Tensor& ga = tt.grad_at(pa);
        for (Index i = 0; i < g.rows(); ++i) {
            const double dot = (g.mat().row(i).array() * s.mat().row(i).array()).sum();
            for (Index j = 0; j < g.cols(); ++j)
                ga(i, j) += s(i, j) * (g(i, j) - dot);
        }
    });
}

Value log_softmax(Value a) {
    Tape& t = *a.tape;
    const Tensor& A = a.val();
    Tensor out = Tensor::zeros_like(A);
    for (Index i = 0; i < A.rows(); ++i) {
        const double m = A.mat().row(i).maxCoeff();
        double s = 0.0;
        for (Index j = 0; j < A.cols(); ++j) s += std::exp(A(i, j) - m);
        const double lse = m + std::log(s);
        for (Index j = 0; j < A.cols(); ++j) out(i, j) = A(i, j) - lse;
    }
    const int pa = a.idx;
    return t.make_node(std::move(out), {pa}, [pa](Tape& tt, int self) {
        const Tensor& g = tt.grad_at(self);
        const Tensor& ls = tt.value_at(self);
        Tensor& ga = tt.grad_at(pa);
        for (Index i = 0; i < g.rows(); ++i) {
            const double gsum = g.mat().row(i).sum();
            for (Index j = 0; j < g.cols(); ++j)
                ga(i, j) += g(i, j) - std::exp(ls(i, j)) * gsum;
        }
    });
}

Value logsumexp_rows(Value a) {
    Tape& t = *a.tape;
    const Tensor& A = a.val();
    Tensor out = Tensor::zeros(A.rows(), 1);
    for (Index i = 0; i < A.rows(); ++i) {
        const double m = A.mat().row(i).maxCoeff();
        double s = 0.0;
        for (Index j = 0; j < A.cols(); ++j) s += std::exp(A(i, j) - m);
        out(i, 0) = m + std::log(s);
    }
    const int pa = a.idx;
    return t.make_node(std::move(out), {pa}, [pa](Tape& tt, int self) {
        const Tensor& g = tt.grad_at(self);
        const Tensor& lse = tt.value_at(self);
        const Tensor& A2 = tt.value_at(pa);
        Tensor& ga = tt.grad_at(pa);
        for (Index i = 0; i < A2.rows(); ++i)
            for (Index j = 0; j < A2.cols(); ++j)
                ga(i, j) += g(i, 0) * std::exp(A2(i, j) - lse(i, 0));
    });
}

// ---------------------------------------------------- stochastic / detachment

Value dropout(Value a, double keep_prob, RngStream& rng, bool training) {
    if (!(keep_prob > 0.0 && keep_prob <= 1.0))
        throw DomainError("dropout: keep probability must be in (0,1]");
    Tape& t = *a.tape;
    const Tensor& A = a.val();
    if (!training || keep_prob == 1.0) {
        const int pa = a.idx;
        return t.make_node(A, {pa},
                           [pa](Tape& tt, int self) { accum(tt, pa, tt.grad_at(self)); });
    }
    Tensor mask = Tensor::zeros_like(A);
    for (Index k = 0; k < mask.size(); ++k)
        mask[k] = rng.uniform() < keep_prob ? 1.0 / keep_prob : 0.0;
    Tensor out = A;
    out.array() *= mask.array();
    const int pa = a.idx;
    return t.make_node(std::move(out), {pa}, [pa, mask](Tape& tt, int self) {
        Tensor g = tt.grad_at(self);
        g.array() *= mask.array();
        accum(tt, pa, g);
    });
}

Value detach(Value a) { return a.tape->leaf(a.val()); }

// -------------------------------------------------- fused density operations

Value mvn_logpdf_op(Value x, Value mu, Value cfac) {
    Tape& t = same_tape(x, mu, "mvn_logpdf");
    same_tape(mu, cfac, "mvn_logpdf");
    const Tensor& X = x.val();
    const Tensor& M = mu.val();
    const Tensor& C = cfac.val();
    const Index d = X.cols();
    if (M.rows() != 1 || M.cols() != d || C.rows() != d)
        throw DimensionError("mvn_logpdf: x " + X.shape_str() + ", mu " + M.shape_str() +
                             ", C " + C.shape_str());

    Eigen::MatrixXd sigma = C.mat() * C.mat().transpose();
    sigma.diagonal().array() += 1.0;
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success) throw DomainError("mvn_logpdf: covariance not SPD");
    const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();

    Eigen::MatrixXd dev = X.mat();
    dev.rowwise() -= M.mat().row(0);
    const Eigen::MatrixXd v = llt.solve(dev.transpose());  // d x m, = Sigma^-1 dev^T

    const double c0 = -0.5 * (static_cast<double>(d) * std::log(2.0 * M_PI) + logdet);
    Tensor out = Tensor::zeros(X.rows(), 1);
    for (Index j = 0; j < X.rows(); ++j)
        out(j, 0) = c0 - 0.5 * dev.row(j).dot(v.col(j));

    const int px = x.idx, pm = mu.idx, pc = cfac.idx;
    return t.make_node(std::move(out), {px, pm, pc}, [px, pm, pc, llt, dev, v](Tape& tt, int self) {
        const Tensor& g = tt.grad_at(self);
        const Index m = g.rows();
        const Index d2 = dev.cols();
        Eigen::VectorXd gv(m);
        for (Index j = 0; j < m; ++j) gv(j) = g(j, 0);

        // d/dmu sum_j g_j l_j = Sigma^-1 sum_j g_j dev_j = v * g
        Eigen::VectorXd gmu = v * gv;
        tt.grad_at(pm).mat().row(0) += gmu.transpose();
        // d/dx_j = -g_j Sigma^-1 dev_j
        Tensor& gx = tt.grad_at(px);
        for (Index j = 0; j < m; ++j) gx.mat().row(j) -= gv(j) * v.col(j).transpose();

        // dL/dSigma = 0.5 * (v diag(g) v^T - (sum g) Sigma^-1); dL/dC = 2 dL/dSigma C
        Eigen::MatrixXd sinv = llt.solve(Eigen::MatrixXd::Identity(d2, d2));
        Eigen::MatrixXd dsigma = 0.5 * (v * gv.asDiagonal() * v.transpose() - gv.sum() * sinv);
        const Tensor& C2 = tt.value_at(pc);
        tt.grad_at(pc).mat() += 2.0 * dsigma * C2.mat();
    });
}

namespace {
double log_multigamma(int d, double a) {
    double out = 0.25 * d * (d - 1) * std::log(M_PI);
    for (int j = 1; j <= d; ++j) out += std::lgamma(a + 0.5 * (1.0 - j));
    return out;
}
}  // namespace

Value inverse_wishart_logpdf_op(Value cfac, double nu) {
    Tape& t = *cfac.tape;
    const Tensor& C = cfac.val();
    const int d = static_cast<int>(C.rows());
    if (!(nu > d - 1)) throw DomainError("inverse_wishart: nu must exceed dim - 1");

    Eigen::MatrixXd sigma = C.mat() * C.mat().transpose();
    sigma.diagonal().array() += 1.0;
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success) throw DomainError("inverse_wishart: matrix not SPD");
    const Eigen::MatrixXd sinv = llt.solve(Eigen::MatrixXd::Identity(d, d));
    const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();

    // psi = I: (nu/2) log det psi = 0.
    const double ll = -0.5 * nu * d * std::log(2.0) - log_multigamma(d, 0.5 * nu) -
                      0.5 * (nu + d + 1) * logdet - 0.5 * sinv.trace();

    const int pc = cfac.idx;
    return t.make_node(Tensor::scalar(ll), {pc}, [pc, sinv, nu, d](Tape& tt, int self) {
        const double g = tt.grad_at(self)[0];
        // dl/dSigma = -((nu+d+1)/2) Sigma^-1 + 0.5 Sigma^-2
        Eigen::MatrixXd dsigma = -0.5 * (nu + d + 1) * sinv + 0.5 * sinv * sinv;
        const Tensor& C2 = tt.value_at(pc);
        tt.grad_at(pc).mat() += g * 2.0 * dsigma * C2.mat();
    });
}

}  // namespace fairsvi
