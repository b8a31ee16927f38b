#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "nlrt/projections.hpp"
#include "nlrt/tensor.hpp"

namespace nlrt {

/// Nonnegative Tucker factors: core (r_1 x ... x r_m) and per-mode factor
/// matrices n_k x r_k, all entries >= 0.
struct TuckerFactors {
    DenseTensor core;
    std::vector<Matrix> factors;
};

/// Nonnegative CP factors: weights lambda (length Z) and m factor matrices
/// n_t x Z, all entries >= 0. Columns are kept at unit l2 norm with the scale
/// absorbed into lambda after every sweep.
struct CpFactors {
    std::vector<double> weights;
    std::vector<Matrix> factors;
};

struct BaselineConfig {
    double tol = 1e-5;
    std::size_t max_iters = 500;
    std::uint64_t seed = 0;
};

struct BaselineTrace {
    std::vector<double> objective;  // ||a - reconstruction||_F per sweep
    std::size_t iterations = 0;
    bool converged = false;
};

struct NtdResult {
    TuckerFactors factors;
    BaselineTrace trace;
};

struct CpResult {
    CpFactors factors;
    BaselineTrace trace;
};

/// Multiplicative-update nonnegative Tucker decomposition.
NtdResult ntd_mu(const DenseTensor& a, const RankVector& ranks, const BaselineConfig& cfg);

/// HALS nonnegative Tucker decomposition (column-wise factor updates,
/// multiplicative core update).
NtdResult ntd_hals(const DenseTensor& a, const RankVector& ranks, const BaselineConfig& cfg);

/// Multiplicative-update nonnegative CP decomposition.
CpResult ncpd_mu(const DenseTensor& a, std::size_t cp_rank, const BaselineConfig& cfg);

/// HALS nonnegative CP decomposition.
CpResult ncpd_hals(const DenseTensor& a, std::size_t cp_rank, const BaselineConfig& cfg);

DenseTensor reconstruct_tucker(const TuckerFactors& f);
DenseTensor reconstruct_cp(const CpFactors& f);

}  // namespace nlrt
