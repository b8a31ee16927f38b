#include "nlrt/solver.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace nlrt {

namespace {

constexpr double kNegativityTolerance = 1e-12;

double product_space_distance(const std::vector<DenseTensor>& parts,
                              const DenseTensor& common) {
    double sum = 0.0;
    for (const DenseTensor& part : parts) {
        const double* a = part.data();
        const double* b = common.data();
        double acc = 0.0;
        for (std::size_t i = 0; i < part.num_elements(); ++i) {
            const double d = a[i] - b[i];
            acc += d * d;
        }
        sum += acc;
    }
    return std::sqrt(sum);
}

double diff_norm(const DenseTensor& a, const DenseTensor& b) {
    const double* pa = a.data();
    const double* pb = b.data();
    double acc = 0.0;
    for (std::size_t i = 0; i < a.num_elements(); ++i) {
        const double d = pa[i] - pb[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

/// Mean of the nonnegative-clipped parts, summed in mode order.
DenseTensor omega1_common(const std::vector<DenseTensor>& parts) {
    const std::size_t n = parts.front().num_elements();
    std::vector<double> mean(n, 0.0);
    for (const DenseTensor& part : parts) {
        const double* src = part.data();
        for (std::size_t i = 0; i < n; ++i) mean[i] += std::max(src[i], 0.0);
    }
    const double scale = 1.0 / static_cast<double>(parts.size());
    for (double& v : mean) v *= scale;
    return DenseTensor(parts.front().shape(), std::move(mean));
}

}  // namespace

SolverResult nlrt_approximate(const DenseTensor& a, const SolverConfig& cfg) {
    const Shape& shape = a.shape();
    cfg.ranks.validate(shape);
    if (cfg.tol <= 0.0) throw std::invalid_argument("nlrt_approximate: tol must be > 0");
    if (cfg.max_iters < 1) {
        throw std::invalid_argument("nlrt_approximate: max_iters must be >= 1");
    }
    for (double v : a.values()) {
        if (v < -kNegativityTolerance) {
            throw std::invalid_argument("nlrt_approximate: input has negative entries");
        }
    }

    const std::size_t m = shape.order();
    std::vector<DenseTensor> z_parts(m, a);
    DenseTensor y_prev;
    SolverResult result;

    for (std::size_t s = 1; s <= cfg.max_iters; ++s) {
        DenseTensor y = omega1_common(z_parts);
        Omega2Projection z = project_omega2(y, cfg.ranks, cfg.threads);
        z_parts = std::move(z.point.parts);

        const double y_norm = fro_norm(y);
        if (!std::isfinite(y_norm)) {
            throw std::runtime_error("nlrt_approximate: non-finite iterate at s=" +
                                     std::to_string(s));
        }

        double rel_change = std::numeric_limits<double>::infinity();
        if (s > 1) {
            const double denom =
                std::max(fro_norm(y_prev), std::numeric_limits<double>::epsilon());
            rel_change = diff_norm(y, y_prev) / denom;
        }

        result.iterations = s;
        if (cfg.trace_every >= 1 && (s % cfg.trace_every == 0 || s == 1)) {
            TraceEntry entry;
            entry.iteration = s;
            entry.rel_change = std::isfinite(rel_change) ? rel_change : 0.0;
            entry.inter_set_distance = product_space_distance(z_parts, y);
            entry.objective = diff_norm(a, y);
            result.trace.entries.push_back(entry);
        }

        if (s > 1 && rel_change < cfg.tol) {
            result.converged = true;
            result.approximation = std::move(y);
            result.mode_factors = std::move(z.factors);
            return result;
        }
        y_prev = std::move(y);
        if (s == cfg.max_iters) {
            result.approximation = std::move(y_prev);
            result.mode_factors = std::move(z.factors);
        }
    }
    result.converged = false;
    return result;
}

FlopsEstimate flops_estimate(const Shape& shape, const RankVector& ranks) {
    ranks.validate(shape);
    FlopsEstimate out;
    std::uint64_t prod = 1;
    for (std::size_t d : shape.dims()) {
        const std::uint64_t v = static_cast<std::uint64_t>(d);
        if (prod > std::numeric_limits<std::uint64_t>::max() / v) {
            out.value = std::numeric_limits<std::uint64_t>::max();
            out.saturated = true;
            return out;
        }
        prod *= v;
    }
    const std::uint64_t rank_sum = static_cast<std::uint64_t>(ranks.sum());
    if (rank_sum != 0 && prod > std::numeric_limits<std::uint64_t>::max() / rank_sum) {
        out.value = std::numeric_limits<std::uint64_t>::max();
        out.saturated = true;
        return out;
    }
    out.value = prod * rank_sum;
    return out;
}

}  // namespace nlrt
