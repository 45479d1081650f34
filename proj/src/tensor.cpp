#include "fairsvi/tensor.hpp"

#include <cmath>
#include <sstream>

namespace fairsvi {

Tensor::Tensor(Index rows, Index cols, int rank)
    : data_(static_cast<size_t>(rows * cols), 0.0), rows_(rows), cols_(cols), rank_(rank) {
    if (rows < 0 || cols < 0) throw DimensionError("negative tensor dimension");
}

Tensor Tensor::zeros(Index rows, Index cols) { return Tensor(rows, cols, 2); }

Tensor Tensor::zeros_like(const Tensor& t) {
    Tensor out(t.rows_, t.cols_, t.rank_);
    return out;
}

Tensor Tensor::full(Index rows, Index cols, double v) {
    Tensor out(rows, cols, 2);
    out.array().setConstant(v);
    return out;
}

Tensor Tensor::scalar(double v) {
    Tensor out(1, 1, 0);
    out.data_[0] = v;
    return out;
}

Tensor Tensor::row(std::initializer_list<double> vals) {
    return row(std::vector<double>(vals));
}

Tensor Tensor::row(const std::vector<double>& vals) {
    Tensor out(1, static_cast<Index>(vals.size()), 1);
    out.data_ = vals;
    return out;
}

Tensor Tensor::from_matrix(const Eigen::MatrixXd& m) {
    Tensor out(m.rows(), m.cols(), 2);
    out.mat() = m;
    return out;
}

Tensor Tensor::from_flat(Index rows, Index cols, std::vector<double> vals) {
    if (static_cast<Index>(vals.size()) != rows * cols)
        throw DimensionError("from_flat: value count does not match shape");
    Tensor out(rows, cols, 2);
    out.data_ = std::move(vals);
    return out;
}

std::vector<Index> Tensor::shape() const {
    switch (rank_) {
        case 0: return {};
        case 1: return {cols_};
        default: return {rows_, cols_};
    }
}

std::string Tensor::shape_str() const {
    std::ostringstream os;
    os << "[" << rows_ << "," << cols_ << "]";
    return os.str();
}

double Tensor::item() const {
    if (size() != 1) throw DimensionError("item(): tensor has " + shape_str() + " elements");
    return data_[0];
}

bool Tensor::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

Tensor Tensor::reduced_to(Index target_rows, Index target_cols) const {
    if (target_rows == rows_ && target_cols == cols_) return *this;
    if ((target_rows != rows_ && target_rows != 1) || (target_cols != cols_ && target_cols != 1))
        throw DimensionError("reduced_to: " + shape_str() + " cannot reduce to [" +
                             std::to_string(target_rows) + "," + std::to_string(target_cols) + "]");
    Tensor out = Tensor::zeros(target_rows, target_cols);
    for (Index i = 0; i < rows_; ++i) {
        const Index ti = target_rows == 1 ? 0 : i;
        for (Index j = 0; j < cols_; ++j) {
            const Index tj = target_cols == 1 ? 0 : j;
            out(ti, tj) += (*this)(i, j);
        }
    }
    return out;
}

}  // namespace fairsvi
