#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace nlrt {

/// Ordered dimensions (n_1, ..., n_m) of an m-way tensor, m >= 1.
class Shape {
public:
    Shape() = default;
    explicit Shape(std::vector<std::size_t> dims);

    std::size_t order() const { return dims_.size(); }
    std::size_t dim(std::size_t mode) const { return dims_.at(mode); }
    std::size_t num_elements() const { return count_; }
    const std::vector<std::size_t>& dims() const { return dims_; }

    /// Product of all dimensions except `mode`.
    std::size_t codim(std::size_t mode) const;

    bool operator==(const Shape& other) const { return dims_ == other.dims_; }
    bool operator!=(const Shape& other) const { return !(*this == other); }

    std::string to_string() const;

private:
    std::vector<std::size_t> dims_;
    std::size_t count_ = 0;
};

/// Dense column-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i + rows_ * j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i + rows_ * j]; }
    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::size_t size() const { return data_.size(); }

    Matrix transposed() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);

/// Dense m-way tensor, column-major storage (first index varies fastest).
/// Immutable by convention once constructed; all free functions below are pure.
class DenseTensor {
public:
    DenseTensor() = default;
    explicit DenseTensor(Shape shape);  // zero-filled
    DenseTensor(Shape shape, std::vector<double> data);

    const Shape& shape() const { return shape_; }
    std::size_t order() const { return shape_.order(); }
    std::size_t num_elements() const { return shape_.num_elements(); }
    const std::vector<double>& values() const { return data_; }
    double value(std::size_t flat_index) const { return data_[flat_index]; }
    const double* data() const { return data_.data(); }

    /// Element access by multi-index (0-based).
    double at(const std::vector<std::size_t>& idx) const;

    /// Mutable access is internal plumbing for builders; the public contract
    /// treats tensors as values.
    std::vector<double>& mutable_values() { return data_; }

private:
    Shape shape_;
    std::vector<double> data_;
};

/// Mode-k unfolding (0-based mode). The n_k x N_k result enumerates columns
/// over the remaining modes in cyclic order (k+1, ..., m-1, 0, ..., k-1),
/// first listed mode varying fastest.
Matrix unfold(const DenseTensor& t, std::size_t mode);

/// Inverse of unfold for the same mode and shape.
DenseTensor fold(const Matrix& mat, std::size_t mode, const Shape& shape);

/// k-mode product: contracts u (p x n_k) against mode k, result has n_k
/// replaced by p.
DenseTensor mode_product(const DenseTensor& t, const Matrix& u, std::size_t mode);

double inner(const DenseTensor& a, const DenseTensor& b);
double fro_norm(const DenseTensor& t);
double fro_norm(const Matrix& m);

}  // namespace nlrt
