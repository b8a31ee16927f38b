#pragma once

#include <cstddef>
#include <vector>

#include "nlrt/svd.hpp"
#include "nlrt/tensor.hpp"

namespace nlrt {

/// Point in the m-fold product space: m tensors of one shared shape.
struct ProductPoint {
    std::vector<DenseTensor> parts;

    void validate() const;  // throws on shape inconsistency
};

/// Target multilinear rank (r_1, ..., r_m).
struct RankVector {
    std::vector<std::size_t> ranks;

    /// Throws unless 1 <= r_k <= min(n_k, N_k) for every mode.
    void validate(const Shape& shape) const;
    std::size_t sum() const;
    std::size_t product() const;
    std::size_t max() const;
};

/// Elementwise max(value, 0): nearest nonnegative tensor in Frobenius norm.
DenseTensor project_nonneg(const DenseTensor& t);

struct ModeProjection {
    DenseTensor tensor;
    SvdTriplets factors;
};

/// Nearest tensor whose mode-k unfolding has rank <= r_k: fold of the rank-r_k
/// truncated SVD of unfold(t, mode). Also returns the triplets used.
ModeProjection project_mode_k(const DenseTensor& t, std::size_t mode, std::size_t rank);

/// Every output part is the mean of the nonnegative-clipped input parts; all
/// parts of the result are identical (summation order fixed by part index).
ProductPoint project_omega1(const ProductPoint& p);

struct Omega2Projection {
    ProductPoint point;
    std::vector<SvdTriplets> factors;
};

/// Fast path for the constant tuple produced by project_omega1: part k of the
/// output is project_mode_k(common, k, r_k). Mode projections are independent
/// and run on up to `threads` workers; results are assembled in mode order.
Omega2Projection project_omega2(const DenseTensor& common, const RankVector& ranks,
                                std::size_t threads = 1);

/// Tuple overload; requires all parts equal (checks shapes, and values in the
/// general variant below are projected per part instead).
Omega2Projection project_omega2(const ProductPoint& p, const RankVector& ranks,
                                std::size_t threads = 1);

/// General-input variant: projects part k with its own mode-k projection,
/// with no constancy requirement.
Omega2Projection project_omega2_general(const ProductPoint& p, const RankVector& ranks);

}  // namespace nlrt
