#include "nlrt/tensor.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace nlrt {

namespace {

using EigenMap = Eigen::Map<Eigen::MatrixXd>;
using ConstEigenMap = Eigen::Map<const Eigen::MatrixXd>;

void check_finite(const std::vector<double>& data, const char* what) {
    for (double v : data) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument(std::string(what) + ": non-finite value");
        }
    }
}

}  // namespace

Shape::Shape(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
    if (dims_.empty()) {
        throw std::invalid_argument("Shape: order must be >= 1");
    }
    count_ = 1;
    for (std::size_t d : dims_) {
        if (d == 0) {
            throw std::invalid_argument("Shape: every dimension must be >= 1");
        }
        if (count_ > std::numeric_limits<std::size_t>::max() / d) {
            throw std::invalid_argument("Shape: element count overflows size_t");
        }
        count_ *= d;
    }
}

std::size_t Shape::codim(std::size_t mode) const {
    if (mode >= dims_.size()) {
        throw std::out_of_range("Shape::codim: mode out of range");
    }
    return count_ / dims_[mode];
}

std::string Shape::to_string() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < dims_.size(); ++i) {
        if (i) os << "x";
        os << dims_[i];
    }
    return os.str();
}

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {
    if (rows == 0 || cols == 0) {
        throw std::invalid_argument("Matrix: dimensions must be positive");
    }
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (rows == 0 || cols == 0) {
        throw std::invalid_argument("Matrix: dimensions must be positive");
    }
    if (data_.size() != rows * cols) {
        throw std::invalid_argument("Matrix: data length does not match rows*cols");
    }
    check_finite(data_, "Matrix");
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::transposed() const {
    Matrix out(cols_, rows_);
    ConstEigenMap in(data(), static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols_));
    EigenMap dst(out.data(), static_cast<Eigen::Index>(cols_), static_cast<Eigen::Index>(rows_));
    dst = in.transpose();
    return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw std::invalid_argument("matmul: inner dimensions mismatch");
    }
    Matrix out(a.rows(), b.cols());
    ConstEigenMap ma(a.data(), static_cast<Eigen::Index>(a.rows()),
                     static_cast<Eigen::Index>(a.cols()));
    ConstEigenMap mb(b.data(), static_cast<Eigen::Index>(b.rows()),
                     static_cast<Eigen::Index>(b.cols()));
    EigenMap dst(out.data(), static_cast<Eigen::Index>(out.rows()),
                 static_cast<Eigen::Index>(out.cols()));
    dst.noalias() = ma * mb;
    return out;
}

DenseTensor::DenseTensor(Shape shape)
    : shape_(std::move(shape)), data_(shape_.num_elements(), 0.0) {}

DenseTensor::DenseTensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != shape_.num_elements()) {
        throw std::invalid_argument("DenseTensor: data length does not match shape");
    }
    check_finite(data_, "DenseTensor");
}

double DenseTensor::at(const std::vector<std::size_t>& idx) const {
    if (idx.size() != order()) {
        throw std::invalid_argument("DenseTensor::at: index arity mismatch");
    }
    std::size_t flat = 0;
    std::size_t stride = 1;
    for (std::size_t j = 0; j < idx.size(); ++j) {
        if (idx[j] >= shape_.dim(j)) {
            throw std::out_of_range("DenseTensor::at: index out of range");
        }
        flat += idx[j] * stride;
        stride *= shape_.dim(j);
    }
    return data_[flat];
}

namespace {

/// Per-mode weights of the flat unfolding index: out = sum_j idx_j * w_j with
/// w_mode = 1 (row position) and the remaining modes laid out in cyclic order
/// (mode+1, ..., m-1, 0, ..., mode-1), first listed fastest, scaled by n_mode.
std::vector<std::size_t> unfold_weights(const Shape& shape, std::size_t mode) {
    const std::size_t m = shape.order();
    std::vector<std::size_t> w(m, 0);
    w[mode] = 1;
    std::size_t stride = shape.dim(mode);  // rows of the unfolding
    for (std::size_t step = 1; step < m; ++step) {
        const std::size_t j = (mode + step) % m;
        w[j] = stride;
        stride *= shape.dim(j);
    }
    return w;
}

/// Walks the tensor in storage order while tracking the unfolding offset via
/// an odometer, calling fn(storage_index, unfold_index) for every element.
template <typename Fn>
void for_each_unfold_index(const Shape& shape, std::size_t mode, Fn&& fn) {
    const std::size_t m = shape.order();
    const std::size_t total = shape.num_elements();
    const std::vector<std::size_t> w = unfold_weights(shape, mode);
    std::vector<std::size_t> idx(m, 0);
    std::size_t out = 0;
    for (std::size_t p = 0; p < total; ++p) {
        fn(p, out);
        for (std::size_t j = 0; j < m; ++j) {
            out += w[j];
            if (++idx[j] < shape.dim(j)) break;
            idx[j] = 0;
            out -= w[j] * shape.dim(j);
        }
    }
}

}  // namespace

Matrix unfold(const DenseTensor& t, std::size_t mode) {
    const Shape& shape = t.shape();
    if (mode >= shape.order()) {
        throw std::out_of_range("unfold: mode out of range");
    }
    Matrix out(shape.dim(mode), shape.codim(mode));
    const double* src = t.data();
    double* dst = out.data();
    if (mode == 0) {
        // Column-major storage makes the mode-0 unfolding a reinterpretation.
        std::copy(src, src + shape.num_elements(), dst);
        return out;
    }
    for_each_unfold_index(shape, mode,
                          [&](std::size_t p, std::size_t q) { dst[q] = src[p]; });
    return out;
}

DenseTensor fold(const Matrix& mat, std::size_t mode, const Shape& shape) {
    if (mode >= shape.order()) {
        throw std::out_of_range("fold: mode out of range");
    }
    if (mat.rows() != shape.dim(mode) || mat.cols() != shape.codim(mode)) {
        throw std::invalid_argument("fold: matrix dimensions do not match shape/mode");
    }
    std::vector<double> data(shape.num_elements());
    const double* src = mat.data();
    if (mode == 0) {
        std::copy(src, src + shape.num_elements(), data.begin());
    } else {
        double* dst = data.data();
        for_each_unfold_index(shape, mode,
                              [&](std::size_t p, std::size_t q) { dst[p] = src[q]; });
    }
    return DenseTensor(shape, std::move(data));
}

DenseTensor mode_product(const DenseTensor& t, const Matrix& u, std::size_t mode) {
    const Shape& shape = t.shape();
    if (mode >= shape.order()) {
        throw std::out_of_range("mode_product: mode out of range");
    }
    if (u.cols() != shape.dim(mode)) {
        throw std::invalid_argument("mode_product: inner dimension mismatch");
    }
    std::vector<std::size_t> dims = shape.dims();
    dims[mode] = u.rows();
    const Shape out_shape(dims);
    return fold(matmul(u, unfold(t, mode)), mode, out_shape);
}

double inner(const DenseTensor& a, const DenseTensor& b) {
    if (a.shape() != b.shape()) {
        throw std::invalid_argument("inner: shape mismatch");
    }
    const std::size_t n = a.num_elements();
    Eigen::Map<const Eigen::VectorXd> va(a.data(), static_cast<Eigen::Index>(n));
    Eigen::Map<const Eigen::VectorXd> vb(b.data(), static_cast<Eigen::Index>(n));
    return va.dot(vb);
}

double fro_norm(const DenseTensor& t) {
    Eigen::Map<const Eigen::VectorXd> v(t.data(),
                                        static_cast<Eigen::Index>(t.num_elements()));
    return v.norm();
}

double fro_norm(const Matrix& m) {
    Eigen::Map<const Eigen::VectorXd> v(m.data(), static_cast<Eigen::Index>(m.size()));
    return v.norm();
}

}  // namespace nlrt
