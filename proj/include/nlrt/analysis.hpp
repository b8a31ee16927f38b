#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "nlrt/baselines.hpp"
#include "nlrt/solver.hpp"

namespace nlrt {

struct ResidualCurve {
    std::string method;
    std::vector<std::size_t> component_counts;  // j = 1..J
    std::vector<double> residuals;              // relative residual at each j
};

/// Point j: relative residual of fold_k of the top-j singular triplets from
/// result.mode_factors[mode], measured against a.
ResidualCurve residual_curve_nlrt(const DenseTensor& a, const SolverResult& result,
                                  std::size_t mode, std::size_t count);

/// Point j: relative residual of the reconstruction restricted to the j
/// core slices / factor columns with the largest weight, where the core is
/// partially contracted over all modes except `mode`, each slice is scaled to
/// unit Frobenius norm, and the scale is folded into the matching factor
/// column before ranking columns by l2 norm.
ResidualCurve residual_curve_ntd(const DenseTensor& a, const TuckerFactors& f,
                                 std::size_t mode, std::size_t count);

/// Point j: relative residual of the top-j rank-1 terms after normalizing all
/// factor columns to unit l2 norm, folding scales into lambda, and sorting
/// lambda descending.
ResidualCurve residual_curve_ncpd(const DenseTensor& a, const CpFactors& f,
                                  std::size_t count);

/// Pixel features: coefficient rows of the mode-`spectral_mode` unfolding of
/// `approximation` in the basis of result.mode_factors[spectral_mode]'s top
/// `count` left singular vectors. Rows index pixels (unfolding columns).
Matrix spectral_features_nlrt(const DenseTensor& approximation, const SolverResult& result,
                              std::size_t spectral_mode, std::size_t count);

/// Same feature construction for an arbitrary reconstruction: the basis is the
/// top `count` left singular vectors of its mode-`spectral_mode` unfolding.
Matrix spectral_features(const DenseTensor& reconstruction, std::size_t spectral_mode,
                         std::size_t count);

struct LabeledPixels {
    Matrix features;                     // pixels x feature-count
    std::vector<int> labels;             // one label per pixel
    std::vector<std::size_t> train_idx;  // disjoint from test_idx
    std::vector<std::size_t> test_idx;
};

/// Euclidean k-NN with majority vote; plurality ties go to the nearest
/// neighbor's class, distance ties to the lowest index. Returns test accuracy.
double knn_classify(const LabeledPixels& data, std::size_t k);

/// Seeded train/test split with `per_class` training samples drawn uniformly
/// without replacement from each class; the rest become test samples.
LabeledPixels split_per_class(const Matrix& features, const std::vector<int>& labels,
                              std::size_t per_class, std::uint64_t seed);

}  // namespace nlrt
