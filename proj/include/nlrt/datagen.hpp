#pragma once

#include <cstdint>

#include "nlrt/projections.hpp"
#include "nlrt/tensor.hpp"

namespace nlrt {

using Seed = std::uint64_t;

/// Case 1 ground truth: U[0,1] core of shape (r_1,...,r_m) and U[0,1] factors
/// n_i x r_i, combined by mode products, then divided elementwise by the
/// maximum so the largest entry is exactly 1.
DenseTensor case1_ground_truth(const Shape& shape, const RankVector& ranks, Seed seed);

/// Noise model for add_noise_snr. gaussian_clip draws standard normals and
/// clips the noisy tensor at 0. uniform draws U[0,1) noise (nonnegative by
/// construction, so no clipping occurs); this is the model that reproduces
/// the published Case 1 benchmark errors: the fit absorbs the constant noise
/// mean (3/4 of the energy for U[0,1]), leaving error = sqrt(3)/2 times the
/// noise level.
enum class NoiseModel { gaussian_clip, uniform };

/// Adds i.i.d. noise scaled so that 20 log10(||t||_F / ||noise||_F) equals
/// snr_db before clipping, then clips negatives of the noisy tensor to 0.
DenseTensor add_noise_snr(const DenseTensor& t, double snr_db, Seed seed,
                          NoiseModel model = NoiseModel::gaussian_clip);

/// Case 2: i.i.d. U[0,1) tensor, deterministic per seed.
DenseTensor case2_random(const Shape& shape, Seed seed);

/// Constructive feasible point: nonnegative core with full per-mode unfolding
/// ranks (resampled up to 20 times) and factors [I; random nonnegative block],
/// giving a nonnegative tensor of multilinear rank exactly (r_1,...,r_m).
DenseTensor feasible_point(const Shape& shape, const RankVector& ranks, Seed seed);

}  // namespace nlrt
