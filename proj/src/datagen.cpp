#include "nlrt/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nlrt/rng.hpp"
#include "nlrt/svd.hpp"

namespace nlrt {

namespace {

Matrix uniform_matrix(std::size_t rows, std::size_t cols, SplitMix64& rng) {
    Matrix m(rows, cols);
    double* p = m.data();
    for (std::size_t i = 0; i < rows * cols; ++i) p[i] = rng.uniform();
    return m;
}

DenseTensor uniform_tensor(const Shape& shape, SplitMix64& rng) {
    std::vector<double> data(shape.num_elements());
    for (double& v : data) v = rng.uniform();
    return DenseTensor(shape, std::move(data));
}

DenseTensor apply_factors(const DenseTensor& core, const std::vector<Matrix>& factors) {
    DenseTensor t = core;
    for (std::size_t k = 0; k < factors.size(); ++k) {
        t = mode_product(t, factors[k], k);
    }
    return t;
}

}  // namespace

DenseTensor case1_ground_truth(const Shape& shape, const RankVector& ranks, Seed seed) {
    ranks.validate(shape);
    SplitMix64 rng(seed);
    const Shape core_shape(std::vector<std::size_t>(ranks.ranks.begin(), ranks.ranks.end()));
    DenseTensor core = uniform_tensor(core_shape, rng);
    std::vector<Matrix> factors;
    factors.reserve(shape.order());
    for (std::size_t k = 0; k < shape.order(); ++k) {
        factors.push_back(uniform_matrix(shape.dim(k), ranks.ranks[k], rng));
    }
    DenseTensor t = apply_factors(core, factors);
    const double max_value = *std::max_element(t.values().begin(), t.values().end());
    std::vector<double> data(t.values());
    for (double& v : data) v /= max_value;
    return DenseTensor(shape, std::move(data));
}

DenseTensor add_noise_snr(const DenseTensor& t, double snr_db, Seed seed,
                          NoiseModel model) {
    if (!std::isfinite(snr_db)) {
        throw std::invalid_argument("add_noise_snr: snr_db must be finite");
    }
    for (double v : t.values()) {
        if (v < 0.0) throw std::invalid_argument("add_noise_snr: input must be nonnegative");
    }
    SplitMix64 rng(seed);
    const std::size_t n = t.num_elements();
    std::vector<double> noise(n);
    double noise_norm_sq = 0.0;
    for (double& v : noise) {
        v = model == NoiseModel::gaussian_clip ? rng.normal() : rng.uniform();
        noise_norm_sq += v * v;
    }
    const double signal_norm = fro_norm(t);
    // 20 log10(||t|| / ||scaled noise||) = snr_db, calibrated before clipping.
    const double scale =
        signal_norm / (std::sqrt(noise_norm_sq) * std::pow(10.0, snr_db / 20.0));
    std::vector<double> data(n);
    const double* src = t.data();
    for (std::size_t i = 0; i < n; ++i) {
        data[i] = std::max(src[i] + scale * noise[i], 0.0);
    }
    return DenseTensor(t.shape(), std::move(data));
}

DenseTensor case2_random(const Shape& shape, Seed seed) {
    SplitMix64 rng(seed);
    return uniform_tensor(shape, rng);
}

DenseTensor feasible_point(const Shape& shape, const RankVector& ranks, Seed seed) {
    ranks.validate(shape);
    for (std::size_t k = 0; k < shape.order(); ++k) {
        if (ranks.ranks[k] > shape.dim(k)) {
            throw std::invalid_argument("feasible_point: rank exceeds dimension");
        }
    }
    SplitMix64 rng(seed);
    const Shape core_shape(std::vector<std::size_t>(ranks.ranks.begin(), ranks.ranks.end()));
    for (std::size_t k = 0; k < core_shape.order(); ++k) {
        if (ranks.ranks[k] > core_shape.codim(k)) {
            throw std::invalid_argument(
                "feasible_point: rank vector not realizable (r_k exceeds product of "
                "the other ranks)");
        }
    }

    // Resample the core until every mode unfolding has full numerical rank.
    constexpr int kMaxDraws = 20;
    DenseTensor core;
    bool core_ok = false;
    for (int draw = 0; draw < kMaxDraws && !core_ok; ++draw) {
        core = uniform_tensor(core_shape, rng);
        core_ok = true;
        for (std::size_t k = 0; k < core.order(); ++k) {
            const std::size_t r = std::min(core_shape.dim(k), core_shape.codim(k));
            SvdTriplets svd = truncated_svd(unfold(core, k), r);
            if (svd.sigmas[r - 1] <= 1e-8 * svd.sigmas[0]) {
                core_ok = false;
                break;
            }
        }
    }
    if (!core_ok) {
        throw std::runtime_error("feasible_point: resampling budget exceeded");
    }

    // Factor k is [I_{r_k}; random nonnegative block], n_k x r_k.
    std::vector<Matrix> factors;
    factors.reserve(shape.order());
    for (std::size_t k = 0; k < shape.order(); ++k) {
        const std::size_t n_k = shape.dim(k);
        const std::size_t r_k = ranks.ranks[k];
        Matrix p(n_k, r_k);
        for (std::size_t j = 0; j < r_k; ++j) p(j, j) = 1.0;
        for (std::size_t i = r_k; i < n_k; ++i) {
            for (std::size_t j = 0; j < r_k; ++j) p(i, j) = rng.uniform();
        }
        factors.push_back(std::move(p));
    }
    return apply_factors(core, factors);
}

}  // namespace nlrt
