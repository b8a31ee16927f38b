#pragma once

#include <cstddef>
#include <vector>

#include "nlrt/tensor.hpp"

namespace nlrt {

/// Top-r singular triplets of a matrix. Sigmas descend; left (n x r) and
/// right (N x r) have orthonormal columns. Sign convention: in each left
/// singular vector the entry of largest magnitude (ties: lowest index) is
/// nonnegative.
struct SvdTriplets {
    std::size_t rank = 0;
    std::vector<double> sigmas;
    Matrix left;
    Matrix right;
    /// Set when a requested singular value fell below 1e-12 * sigma_1 and the
    /// corresponding right vector had to be completed synthetically.
    bool rank_deficient = false;
};

struct SymEig {
    std::vector<double> values;  // descending, clamped at 0
    Matrix vectors;              // columns are eigenvectors
};

/// Symmetric eigendecomposition of mat * mat^T via cyclic Jacobi.
/// Eigenvalues below -1e-12 * ||mat||_F^2 would indicate a bug; small
/// negative round-off is clamped to zero.
SymEig gram_eigs(const Matrix& mat);

/// Deterministic truncated SVD, 1 <= r <= min(rows, cols). Computed through
/// the Gram matrix of the short side, so cost is O(min(n,N)^2 * max(n,N)).
SvdTriplets truncated_svd(const Matrix& mat, std::size_t r);

/// left * diag(sigmas) * right^T.
Matrix reconstruct(const SvdTriplets& svd);

/// Partial reconstruction from the leading `count` triplets.
Matrix reconstruct_leading(const SvdTriplets& svd, std::size_t count);

}  // namespace nlrt
