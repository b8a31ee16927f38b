#include "nlrt/projections.hpp"

#include <algorithm>
#include <stdexcept>
#include <thread>

namespace nlrt {

void ProductPoint::validate() const {
    if (parts.empty()) {
        throw std::invalid_argument("ProductPoint: no parts");
    }
    for (const DenseTensor& p : parts) {
        if (p.shape() != parts.front().shape()) {
            throw std::invalid_argument("ProductPoint: parts have inconsistent shapes");
        }
    }
}

void RankVector::validate(const Shape& shape) const {
    if (ranks.size() != shape.order()) {
        throw std::invalid_argument("RankVector: arity does not match tensor order");
    }
    for (std::size_t k = 0; k < ranks.size(); ++k) {
        const std::size_t bound = std::min(shape.dim(k), shape.codim(k));
        if (ranks[k] < 1 || ranks[k] > bound) {
            throw std::invalid_argument("RankVector: rank out of range for mode " +
                                        std::to_string(k));
        }
    }
}

std::size_t RankVector::sum() const {
    std::size_t s = 0;
    for (std::size_t r : ranks) s += r;
    return s;
}

std::size_t RankVector::product() const {
    std::size_t p = 1;
    for (std::size_t r : ranks) p *= r;
    return p;
}

std::size_t RankVector::max() const {
    return *std::max_element(ranks.begin(), ranks.end());
}

DenseTensor project_nonneg(const DenseTensor& t) {
    std::vector<double> data(t.values());
    for (double& v : data) v = std::max(v, 0.0);
    return DenseTensor(t.shape(), std::move(data));
}

ModeProjection project_mode_k(const DenseTensor& t, std::size_t mode, std::size_t rank) {
    SvdTriplets svd = truncated_svd(unfold(t, mode), rank);
    DenseTensor projected = fold(reconstruct(svd), mode, t.shape());
    return ModeProjection{std::move(projected), std::move(svd)};
}

ProductPoint project_omega1(const ProductPoint& p) {
    p.validate();
    const std::size_t m = p.parts.size();
    const std::size_t n = p.parts.front().num_elements();
    std::vector<double> mean(n, 0.0);
    // Fixed summation order over parts keeps the result bit-identical
    // regardless of caller parallelism.
    for (std::size_t k = 0; k < m; ++k) {
        const double* src = p.parts[k].data();
        for (std::size_t i = 0; i < n; ++i) {
            mean[i] += std::max(src[i], 0.0);
        }
    }
    const double scale = 1.0 / static_cast<double>(m);
    for (double& v : mean) v *= scale;
    DenseTensor common(p.parts.front().shape(), std::move(mean));
    ProductPoint out;
    out.parts.assign(m, common);
    return out;
}

Omega2Projection project_omega2(const DenseTensor& common, const RankVector& ranks,
                                std::size_t threads) {
    ranks.validate(common.shape());
    const std::size_t m = common.order();
    Omega2Projection out;
    out.point.parts.resize(m);
    out.factors.resize(m);

    auto project_one = [&](std::size_t k) {
        ModeProjection mp = project_mode_k(common, k, ranks.ranks[k]);
        out.point.parts[k] = std::move(mp.tensor);
        out.factors[k] = std::move(mp.factors);
    };

    if (threads <= 1 || m == 1) {
        for (std::size_t k = 0; k < m; ++k) project_one(k);
        return out;
    }
    const std::size_t workers = std::min(threads, m);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t k = w; k < m; k += workers) project_one(k);
        });
    }
    for (std::thread& t : pool) t.join();
    return out;
}

Omega2Projection project_omega2(const ProductPoint& p, const RankVector& ranks,
                                std::size_t threads) {
    p.validate();
    if (p.parts.size() != p.parts.front().order()) {
        throw std::invalid_argument("project_omega2: part count must equal tensor order");
    }
    for (std::size_t k = 1; k < p.parts.size(); ++k) {
        if (p.parts[k].values() != p.parts.front().values()) {
            throw std::invalid_argument(
                "project_omega2: parts must be identical (use project_omega2_general)");
        }
    }
    return project_omega2(p.parts.front(), ranks, threads);
}

Omega2Projection project_omega2_general(const ProductPoint& p, const RankVector& ranks) {
    p.validate();
    if (p.parts.size() != p.parts.front().order()) {
        throw std::invalid_argument("project_omega2_general: part count must equal order");
    }
    ranks.validate(p.parts.front().shape());
    Omega2Projection out;
    out.point.parts.resize(p.parts.size());
    out.factors.resize(p.parts.size());
    for (std::size_t k = 0; k < p.parts.size(); ++k) {
        ModeProjection mp = project_mode_k(p.parts[k], k, ranks.ranks[k]);
        out.point.parts[k] = std::move(mp.tensor);
        out.factors[k] = std::move(mp.factors);
    }
    return out;
}

}  // namespace nlrt
