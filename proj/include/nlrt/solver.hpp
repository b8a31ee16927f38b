#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "nlrt/projections.hpp"

namespace nlrt {

struct SolverConfig {
    RankVector ranks;
    double tol = 1e-5;
    std::size_t max_iters = 5000;
    std::size_t trace_every = 1;
    std::size_t threads = 1;
};

struct TraceEntry {
    std::size_t iteration;
    double rel_change;          // ||Y_s - Y_{s-1}|| / max(||Y_{s-1}||, eps)
    double inter_set_distance;  // product-space distance between Z_s and Y_s
    double objective;           // ||A - Y_s||_F
};

struct ConvergenceTrace {
    std::vector<TraceEntry> entries;
};

struct SolverResult {
    DenseTensor approximation;  // final common nonnegative tensor Y
    std::vector<SvdTriplets> mode_factors;
    std::size_t iterations = 0;
    bool converged = false;
    ConvergenceTrace trace;
};

/// Alternating projections between the constant-nonnegative set and the
/// per-mode fixed-rank set. Starts from the constant tuple (a, ..., a),
/// alternates Y_s = proj_omega1(Z_{s-1}), Z_s = proj_omega2(Y_s), and stops
/// when the relative change of Y drops below cfg.tol.
///
/// The reported approximation is Y (exactly nonnegative, approximately low
/// rank); mode_factors carry the final per-mode singular triplets so callers
/// can reconstruct the exactly-low-rank Z side.
SolverResult nlrt_approximate(const DenseTensor& a, const SolverConfig& cfg);

struct FlopsEstimate {
    std::uint64_t value = 0;
    bool saturated = false;
};

/// Per-iteration cost (prod n_j) * (sum r_i) with unit constant; saturates on
/// 64-bit overflow and flags it.
FlopsEstimate flops_estimate(const Shape& shape, const RankVector& ranks);

}  // namespace nlrt
