#include "nlrt/svd.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace nlrt {

namespace {

constexpr double kJacobiTol = 1e-14;
constexpr int kJacobiMaxSweeps = 100;
constexpr double kRankCutoff = 1e-12;  // relative to sigma_1

using Ematrix = Eigen::MatrixXd;
using ConstMap = Eigen::Map<const Ematrix>;
using MutMap = Eigen::Map<Ematrix>;

void check_finite(const Matrix& mat, const char* what) {
    const double* p = mat.data();
    for (std::size_t i = 0; i < mat.size(); ++i) {
        if (!std::isfinite(p[i])) {
            throw std::invalid_argument(std::string(what) + ": non-finite input");
        }
    }
}

double offdiag_norm(const Ematrix& g) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < g.cols(); ++j) {
        for (Eigen::Index i = 0; i < g.rows(); ++i) {
            if (i != j) sum += g(i, j) * g(i, j);
        }
    }
    return std::sqrt(sum);
}

/// Cyclic-by-row Jacobi on a symmetric matrix. Rotations accumulate into v.
/// Stops when the off-diagonal Frobenius norm drops below tol * ||G||_F.
void jacobi_eig(Ematrix& g, Ematrix& v) {
    const Eigen::Index n = g.rows();
    v = Ematrix::Identity(n, n);
    const double gnorm = g.norm();
    if (gnorm == 0.0 || n == 1) return;
    const double threshold = kJacobiTol * gnorm;
    for (int sweep = 0; sweep < kJacobiMaxSweeps; ++sweep) {
        if (offdiag_norm(g) <= threshold) break;
        for (Eigen::Index p = 0; p + 1 < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = g(p, q);
                if (apq == 0.0) continue;
                const double app = g(p, p);
                const double aqq = g(q, q);
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0.0)
                                     ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                     : 1.0 / (tau - std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double gkp = g(k, p);
                    const double gkq = g(k, q);
                    g(k, p) = c * gkp - s * gkq;
                    g(k, q) = s * gkp + c * gkq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double gpk = g(p, k);
                    const double gqk = g(q, k);
                    g(p, k) = c * gpk - s * gqk;
                    g(q, k) = s * gpk + c * gqk;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
}

struct SortedEig {
    std::vector<double> values;  // descending, clamped to >= 0
    Ematrix vectors;
};

SortedEig gram_eig_impl(const Matrix& mat) {
    check_finite(mat, "gram_eigs");
    const Eigen::Index n = static_cast<Eigen::Index>(mat.rows());
    ConstMap x(mat.data(), n, static_cast<Eigen::Index>(mat.cols()));
    Ematrix g(n, n);
    g.setZero();
    g.selfadjointView<Eigen::Lower>().rankUpdate(x);
    g.triangularView<Eigen::StrictlyUpper>() = g.transpose();

    Ematrix v;
    jacobi_eig(g, v);

    std::vector<std::size_t> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return g(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a)) >
               g(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(b));
    });

    SortedEig out;
    out.values.resize(static_cast<std::size_t>(n));
    out.vectors.resize(n, n);
    for (std::size_t i = 0; i < order.size(); ++i) {
        const Eigen::Index src = static_cast<Eigen::Index>(order[i]);
        out.values[i] = std::max(0.0, g(src, src));
        out.vectors.col(static_cast<Eigen::Index>(i)) = v.col(src);
    }
    return out;
}

/// Flip the column pair so the largest-magnitude entry of u (ties: lowest
/// index) is nonnegative.
void apply_sign_convention(Eigen::Ref<Eigen::VectorXd> u, Eigen::Ref<Eigen::VectorXd> v) {
    Eigen::Index arg = 0;
    double best = std::abs(u(0));
    for (Eigen::Index i = 1; i < u.size(); ++i) {
        const double a = std::abs(u(i));
        if (a > best) {
            best = a;
            arg = i;
        }
    }
    if (u(arg) < 0.0) {
        u = -u;
        v = -v;
    }
}

/// Deterministic completion of column `col` of v: first canonical basis
/// vector that keeps norm > 0.5 after orthogonalizing against columns [0,col).
void complete_column(Ematrix& v, Eigen::Index col) {
    const Eigen::Index n = v.rows();
    for (Eigen::Index cand = 0; cand < n; ++cand) {
        Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
        w(cand) = 1.0;
        for (Eigen::Index j = 0; j < col; ++j) {
            w -= v.col(j).dot(w) * v.col(j);
        }
        const double norm = w.norm();
        if (norm > 0.5) {
            v.col(col) = w / norm;
            return;
        }
    }
    throw std::runtime_error("truncated_svd: failed to complete orthonormal basis");
}

}  // namespace

SymEig gram_eigs(const Matrix& mat) {
    SortedEig eig = gram_eig_impl(mat);
    SymEig out;
    out.values = std::move(eig.values);
    out.vectors = Matrix(mat.rows(), mat.rows());
    MutMap(out.vectors.data(), eig.vectors.rows(), eig.vectors.cols()) = eig.vectors;
    return out;
}

SvdTriplets truncated_svd(const Matrix& mat, std::size_t r) {
    if (r < 1 || r > std::min(mat.rows(), mat.cols())) {
        throw std::invalid_argument("truncated_svd: rank out of range");
    }
    check_finite(mat, "truncated_svd");

    const bool transposed = mat.rows() > mat.cols();
    const Matrix* work = &mat;
    Matrix flipped;
    if (transposed) {
        flipped = mat.transposed();
        work = &flipped;
    }

    const Eigen::Index n = static_cast<Eigen::Index>(work->rows());
    const Eigen::Index big = static_cast<Eigen::Index>(work->cols());
    ConstMap x(work->data(), n, big);

    SortedEig eig = gram_eig_impl(*work);

    SvdTriplets out;
    out.rank = r;
    out.sigmas.resize(r);
    const double sigma1 = std::sqrt(eig.values[0]);
    Ematrix u(n, static_cast<Eigen::Index>(r));
    Ematrix v(big, static_cast<Eigen::Index>(r));
    for (std::size_t i = 0; i < r; ++i) {
        const Eigen::Index ei = static_cast<Eigen::Index>(i);
        const double sigma = std::sqrt(eig.values[i]);
        out.sigmas[i] = sigma;
        u.col(ei) = eig.vectors.col(ei);
        if (sigma > kRankCutoff * sigma1 && sigma > 0.0) {
            v.col(ei).noalias() = x.transpose() * u.col(ei) / sigma;
        } else {
            out.sigmas[i] = 0.0;
            out.rank_deficient = true;
            complete_column(v, ei);
        }
    }

    // The Gram route loses right-vector orthogonality near the rank cutoff;
    // a modified Gram-Schmidt pass restores it without moving well-separated
    // directions meaningfully.
    for (std::size_t i = 0; i < r; ++i) {
        const Eigen::Index ei = static_cast<Eigen::Index>(i);
        for (std::size_t j = 0; j < i; ++j) {
            const Eigen::Index ej = static_cast<Eigen::Index>(j);
            v.col(ei) -= v.col(ej).dot(v.col(ei)) * v.col(ej);
        }
        const double norm = v.col(ei).norm();
        if (norm > 0.0) {
            v.col(ei) /= norm;
        } else {
            complete_column(v, ei);
        }
    }

    if (transposed) {
        u.swap(v);
    }
    for (std::size_t i = 0; i < r; ++i) {
        const Eigen::Index ei = static_cast<Eigen::Index>(i);
        apply_sign_convention(u.col(ei), v.col(ei));
    }
    out.left = Matrix(mat.rows(), r);
    out.right = Matrix(mat.cols(), r);
    MutMap(out.left.data(), u.rows(), u.cols()) = u;
    MutMap(out.right.data(), v.rows(), v.cols()) = v;
    return out;
}

Matrix reconstruct(const SvdTriplets& svd) { return reconstruct_leading(svd, svd.rank); }

Matrix reconstruct_leading(const SvdTriplets& svd, std::size_t count) {
    if (count > svd.rank) {
        throw std::invalid_argument("reconstruct_leading: count exceeds stored rank");
    }
    Matrix out(svd.left.rows(), svd.right.rows());
    if (count == 0) return out;
    ConstMap u(svd.left.data(), static_cast<Eigen::Index>(svd.left.rows()),
               static_cast<Eigen::Index>(svd.left.cols()));
    ConstMap v(svd.right.data(), static_cast<Eigen::Index>(svd.right.rows()),
               static_cast<Eigen::Index>(svd.right.cols()));
    Eigen::VectorXd s(static_cast<Eigen::Index>(count));
    for (std::size_t i = 0; i < count; ++i) s(static_cast<Eigen::Index>(i)) = svd.sigmas[i];
    const Eigen::Index c = static_cast<Eigen::Index>(count);
    MutMap(out.data(), u.rows(), v.rows()).noalias() =
        u.leftCols(c) * s.asDiagonal() * v.leftCols(c).transpose();
    return out;
}

}  // namespace nlrt
