#pragma once

#include <Eigen/Dense>

#include <initializer_list>
#include <string>
#include <vector>

#include "fairsvi/errors.hpp"

namespace fairsvi {

using Eigen::Index;
using MatrixRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<MatrixRM>;
using ConstMatMap = Eigen::Map<const MatrixRM>;

/// Dense 64-bit float tensor of rank 0, 1 or 2, stored flat in row-major
/// order. Rank-1 tensors behave as 1 x n row vectors in matrix contexts.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(Index rows, Index cols);
    static Tensor zeros_like(const Tensor& t);
    static Tensor full(Index rows, Index cols, double v);
    static Tensor scalar(double v);
    static Tensor row(std::initializer_list<double> vals);
    static Tensor row(const std::vector<double>& vals);
    static Tensor from_matrix(const Eigen::MatrixXd& m);
    static Tensor from_flat(Index rows, Index cols, std::vector<double> vals);

    Index rows() const { return rows_; }
    Index cols() const { return cols_; }
    Index size() const { return rows_ * cols_; }
    int rank() const { return rank_; }
    std::vector<Index> shape() const;
    std::string shape_str() const;
    bool same_shape(const Tensor& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    double& operator()(Index i, Index j) { return data_[i * cols_ + j]; }
    double operator()(Index i, Index j) const { return data_[i * cols_ + j]; }
    double& operator[](Index k) { return data_[k]; }
    double operator[](Index k) const { return data_[k]; }

    /// Value of a 1-element tensor.
    double item() const;

    MatMap mat() { return MatMap(data_.data(), rows_, cols_); }
    ConstMatMap mat() const { return ConstMatMap(data_.data(), rows_, cols_); }
    Eigen::Map<Eigen::ArrayXd> array() { return {data_.data(), size()}; }
    Eigen::Map<const Eigen::ArrayXd> array() const { return {data_.data(), size()}; }

    bool all_finite() const;
    void set_zero() { array().setZero(); }

    /// Sum-reduce to the given target dims; each target dim must equal this
    /// tensor's dim or 1. Used to fold broadcast gradients back.
    Tensor reduced_to(Index target_rows, Index target_cols) const;

private:
    Tensor(Index rows, Index cols, int rank);

    std::vector<double> data_;
    Index rows_ = 0;
    Index cols_ = 0;
    int rank_ = 2;
};

}  // namespace fairsvi
