#include "nlrt/baselines.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "nlrt/rng.hpp"

namespace nlrt {

namespace {

constexpr double kEpsGuard = 1e-16;

using Ematrix = Eigen::MatrixXd;
using ConstMap = Eigen::Map<const Ematrix>;
using MutMap = Eigen::Map<Ematrix>;

ConstMap map_of(const Matrix& m) {
    return ConstMap(m.data(), static_cast<Eigen::Index>(m.rows()),
                    static_cast<Eigen::Index>(m.cols()));
}

Matrix to_matrix(const Ematrix& e) {
    Matrix out(static_cast<std::size_t>(e.rows()), static_cast<std::size_t>(e.cols()));
    MutMap(out.data(), e.rows(), e.cols()) = e;
    return out;
}

void check_nonnegative(const DenseTensor& a, const char* what) {
    for (double v : a.values()) {
        if (v < 0.0) throw std::invalid_argument(std::string(what) + ": input must be >= 0");
    }
}

Ematrix uniform_init(std::size_t rows, std::size_t cols, SplitMix64& rng) {
    Ematrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = rng.uniform();
    }
    return m;
}

/// core x_j factors[j] over all modes except `skip` (pass order() to contract
/// every mode).
DenseTensor contract_except(const DenseTensor& core, const std::vector<Ematrix>& factors,
                            std::size_t skip) {
    DenseTensor t = core;
    for (std::size_t k = 0; k < factors.size(); ++k) {
        if (k == skip) continue;
        t = mode_product(t, to_matrix(factors[k]), k);
    }
    return t;
}

double iterate_rel_change(const Ematrix& current, const Ematrix& previous) {
    const double denom = std::max(previous.norm(), std::numeric_limits<double>::epsilon());
    return (current - previous).norm() / denom;
}

// ---------------------------------------------------------------------------
// Nonnegative Tucker decomposition
// ---------------------------------------------------------------------------

enum class FactorUpdate { multiplicative, hals };

NtdResult ntd_solve(const DenseTensor& a, const RankVector& ranks, const BaselineConfig& cfg,
                    FactorUpdate update) {
    check_nonnegative(a, "ntd");
    const Shape& shape = a.shape();
    ranks.validate(shape);
    const std::size_t m = shape.order();

    SplitMix64 rng(cfg.seed);
    const Shape core_shape(std::vector<std::size_t>(ranks.ranks.begin(), ranks.ranks.end()));
    std::vector<double> core_init(core_shape.num_elements());
    for (double& v : core_init) v = rng.uniform();
    DenseTensor core(core_shape, std::move(core_init));
    std::vector<Ematrix> factors;
    factors.reserve(m);
    for (std::size_t k = 0; k < m; ++k) {
        factors.push_back(uniform_init(shape.dim(k), ranks.ranks[k], rng));
    }

    std::vector<Matrix> unfoldings;
    unfoldings.reserve(m);
    for (std::size_t k = 0; k < m; ++k) unfoldings.push_back(unfold(a, k));

    // Rescale the random start so the initial model matches the data norm;
    // multiplicative updates recover badly from a large scale mismatch.
    {
        const double model_norm = fro_norm(contract_except(core, factors, m));
        if (model_norm > 0.0) {
            const double scale = fro_norm(a) / model_norm;
            std::vector<double> data(core.values());
            for (double& v : data) v *= scale;
            core = DenseTensor(core_shape, std::move(data));
        }
    }

    NtdResult result;
    Ematrix prev_recon;
    for (std::size_t sweep = 1; sweep <= cfg.max_iters; ++sweep) {
        for (std::size_t k = 0; k < m; ++k) {
            // B = mode-k unfolding of the core contracted with the other factors.
            Matrix b_mat = unfold(contract_except(core, factors, k), k);
            ConstMap b = map_of(b_mat);
            ConstMap a_k = map_of(unfoldings[k]);
            const Ematrix w = a_k * b.transpose();   // n_k x r_k
            const Ematrix g = b * b.transpose();     // r_k x r_k
            Ematrix& p = factors[k];
            if (update == FactorUpdate::multiplicative) {
                const Ematrix den = p * g;
                for (Eigen::Index j = 0; j < p.cols(); ++j) {
                    for (Eigen::Index i = 0; i < p.rows(); ++i) {
                        p(i, j) *= w(i, j) / (den(i, j) + kEpsGuard);
                    }
                }
            } else {
                for (Eigen::Index j = 0; j < p.cols(); ++j) {
                    const double gjj = std::max(g(j, j), kEpsGuard);
                    const Eigen::VectorXd delta = (w.col(j) - p * g.col(j)) / gjj;
                    p.col(j) = (p.col(j) + delta).cwiseMax(0.0);
                }
            }
        }

        // Multiplicative core update.
        {
            DenseTensor numerator = a;
            DenseTensor denominator = core;
            for (std::size_t k = 0; k < m; ++k) {
                numerator = mode_product(numerator, to_matrix(factors[k].transpose()), k);
                denominator =
                    mode_product(denominator, to_matrix(factors[k].transpose() * factors[k]), k);
            }
            std::vector<double> data(core.values());
            const double* num = numerator.data();
            const double* den = denominator.data();
            for (std::size_t i = 0; i < data.size(); ++i) {
                data[i] *= num[i] / (den[i] + kEpsGuard);
            }
            core = DenseTensor(core_shape, std::move(data));
        }

        const Matrix recon_mat = unfold(contract_except(core, factors, m), 0);
        const Ematrix recon = map_of(recon_mat);
        ConstMap a_0 = map_of(unfoldings[0]);
        result.trace.objective.push_back((a_0 - recon).norm());
        result.trace.iterations = sweep;
        if (sweep > 1 && iterate_rel_change(recon, prev_recon) < cfg.tol) {
            result.trace.converged = true;
            prev_recon = recon;
            break;
        }
        prev_recon = recon;
    }

    result.factors.core = std::move(core);
    result.factors.factors.reserve(m);
    for (std::size_t k = 0; k < m; ++k) {
        result.factors.factors.push_back(to_matrix(factors[k]));
    }
    return result;
}

// ---------------------------------------------------------------------------
// Nonnegative CP decomposition
// ---------------------------------------------------------------------------

/// Khatri-Rao product of all factor columns except mode `skip`, rows laid out
/// in the unfolding's cyclic order (skip+1, ..., m-1, 0, ..., skip-1), first
/// listed mode fastest. Result is N_skip x Z.
Ematrix khatri_rao_except(const std::vector<Ematrix>& factors, const Shape& shape,
                          std::size_t skip) {
    const std::size_t m = factors.size();
    const Eigen::Index z = factors[0].cols();
    const std::size_t n_rows = shape.codim(skip);
    Ematrix kr(static_cast<Eigen::Index>(n_rows), z);
    std::vector<double> buf(n_rows);
    for (Eigen::Index col = 0; col < z; ++col) {
        std::size_t filled = 0;
        for (std::size_t step = 1; step < m; ++step) {
            const std::size_t j = (skip + step) % m;
            const Ematrix& f = factors[j];
            const std::size_t nj = static_cast<std::size_t>(f.rows());
            if (filled == 0) {
                for (std::size_t i = 0; i < nj; ++i) buf[i] = f(static_cast<Eigen::Index>(i), col);
                filled = nj;
            } else {
                // Kronecker with the new mode varying slower; filling from the
                // top keeps the source block intact until the i == 0 pass.
                for (std::size_t i = nj; i-- > 0;) {
                    const double scale = f(static_cast<Eigen::Index>(i), col);
                    double* dst = buf.data() + i * filled;
                    for (std::size_t p = 0; p < filled; ++p) dst[p] = buf[p] * scale;
                }
                filled *= nj;
            }
        }
        for (std::size_t i = 0; i < n_rows; ++i) kr(static_cast<Eigen::Index>(i), col) = buf[i];
    }
    return kr;
}

/// Normalizes every column of every factor to unit l2 norm, folding scales
/// into the weights. Zero columns get a deterministic uniform unit vector and
/// weight 0.
void normalize_cp(std::vector<Ematrix>& factors, Eigen::VectorXd& weights) {
    for (Ematrix& f : factors) {
        for (Eigen::Index z = 0; z < f.cols(); ++z) {
            const double norm = f.col(z).norm();
            if (norm > 0.0) {
                f.col(z) /= norm;
                weights(z) *= norm;
            } else {
                f.col(z).setConstant(1.0 / std::sqrt(static_cast<double>(f.rows())));
                weights(z) = 0.0;
            }
        }
    }
}

CpResult ncpd_solve(const DenseTensor& a, std::size_t cp_rank, const BaselineConfig& cfg,
                    FactorUpdate update) {
    check_nonnegative(a, "ncpd");
    if (cp_rank < 1) throw std::invalid_argument("ncpd: CP rank must be >= 1");
    const Shape& shape = a.shape();
    const std::size_t m = shape.order();
    const Eigen::Index z = static_cast<Eigen::Index>(cp_rank);

    SplitMix64 rng(cfg.seed);
    std::vector<Ematrix> factors;
    factors.reserve(m);
    for (std::size_t k = 0; k < m; ++k) {
        factors.push_back(uniform_init(shape.dim(k), cp_rank, rng));
    }
    Eigen::VectorXd weights = Eigen::VectorXd::Ones(z);
    normalize_cp(factors, weights);

    std::vector<Matrix> unfoldings;
    unfoldings.reserve(m);
    for (std::size_t k = 0; k < m; ++k) unfoldings.push_back(unfold(a, k));

    std::vector<Ematrix> grams(m);  // factor^T factor of unit-norm factors
    for (std::size_t k = 0; k < m; ++k) grams[k] = factors[k].transpose() * factors[k];

    // Match the initial model norm to the data, as in ntd_solve.
    {
        const Ematrix kr0 = khatri_rao_except(factors, shape, 0);
        const double model_norm = (factors[0] * weights.asDiagonal() * kr0.transpose()).norm();
        if (model_norm > 0.0) weights *= fro_norm(a) / model_norm;
    }

    CpResult result;
    Ematrix prev_recon;
    for (std::size_t sweep = 1; sweep <= cfg.max_iters; ++sweep) {
        for (std::size_t k = 0; k < m; ++k) {
            const Ematrix kr = khatri_rao_except(factors, shape, k);
            ConstMap a_k = map_of(unfoldings[k]);
            const Ematrix w = a_k * kr;  // n_k x Z
            Ematrix g = Ematrix::Ones(z, z);
            for (std::size_t j = 0; j < m; ++j) {
                if (j != k) g = g.cwiseProduct(grams[j]);
            }
            // Fold the weights into the factor being updated.
            Ematrix scaled = factors[k] * weights.asDiagonal();
            if (update == FactorUpdate::multiplicative) {
                const Ematrix den = scaled * g;
                for (Eigen::Index col = 0; col < z; ++col) {
                    for (Eigen::Index i = 0; i < scaled.rows(); ++i) {
                        scaled(i, col) *= w(i, col) / (den(i, col) + kEpsGuard);
                    }
                }
            } else {
                for (Eigen::Index col = 0; col < z; ++col) {
                    const double gcc = std::max(g(col, col), kEpsGuard);
                    const Eigen::VectorXd delta = (w.col(col) - scaled * g.col(col)) / gcc;
                    scaled.col(col) = (scaled.col(col) + delta).cwiseMax(0.0);
                }
            }
            for (Eigen::Index col = 0; col < z; ++col) {
                const double norm = scaled.col(col).norm();
                if (norm > 0.0) {
                    factors[k].col(col) = scaled.col(col) / norm;
                    weights(col) = norm;
                } else {
                    factors[k].col(col).setConstant(
                        1.0 / std::sqrt(static_cast<double>(scaled.rows())));
                    weights(col) = 0.0;
                }
            }
            grams[k] = factors[k].transpose() * factors[k];
        }

        const Ematrix kr0 = khatri_rao_except(factors, shape, 0);
        const Ematrix recon = factors[0] * weights.asDiagonal() * kr0.transpose();
        ConstMap a_0 = map_of(unfoldings[0]);
        result.trace.objective.push_back((a_0 - recon).norm());
        result.trace.iterations = sweep;
        if (sweep > 1 && iterate_rel_change(recon, prev_recon) < cfg.tol) {
            result.trace.converged = true;
            prev_recon = recon;
            break;
        }
        prev_recon = recon;
    }

    result.factors.weights.assign(weights.data(), weights.data() + z);
    result.factors.factors.reserve(m);
    for (std::size_t k = 0; k < m; ++k) {
        result.factors.factors.push_back(to_matrix(factors[k]));
    }
    return result;
}

}  // namespace

NtdResult ntd_mu(const DenseTensor& a, const RankVector& ranks, const BaselineConfig& cfg) {
    return ntd_solve(a, ranks, cfg, FactorUpdate::multiplicative);
}

NtdResult ntd_hals(const DenseTensor& a, const RankVector& ranks, const BaselineConfig& cfg) {
    return ntd_solve(a, ranks, cfg, FactorUpdate::hals);
}

CpResult ncpd_mu(const DenseTensor& a, std::size_t cp_rank, const BaselineConfig& cfg) {
    return ncpd_solve(a, cp_rank, cfg, FactorUpdate::multiplicative);
}

CpResult ncpd_hals(const DenseTensor& a, std::size_t cp_rank, const BaselineConfig& cfg) {
    return ncpd_solve(a, cp_rank, cfg, FactorUpdate::hals);
}

DenseTensor reconstruct_tucker(const TuckerFactors& f) {
    DenseTensor t = f.core;
    for (std::size_t k = 0; k < f.factors.size(); ++k) {
        t = mode_product(t, f.factors[k], k);
    }
    return t;
}

DenseTensor reconstruct_cp(const CpFactors& f) {
    const std::size_t m = f.factors.size();
    if (m == 0) throw std::invalid_argument("reconstruct_cp: no factors");
    const std::size_t z = f.weights.size();
    for (const Matrix& fac : f.factors) {
        if (fac.cols() != z) throw std::invalid_argument("reconstruct_cp: Z mismatch");
    }
    std::vector<std::size_t> dims;
    dims.reserve(m);
    for (const Matrix& fac : f.factors) dims.push_back(fac.rows());
    const Shape shape(dims);

    std::vector<Ematrix> factors;
    factors.reserve(m);
    for (const Matrix& fac : f.factors) factors.push_back(map_of(fac));
    const Ematrix kr0 = khatri_rao_except(factors, shape, 0);
    Eigen::VectorXd weights(static_cast<Eigen::Index>(z));
    for (std::size_t i = 0; i < z; ++i) weights(static_cast<Eigen::Index>(i)) = f.weights[i];
    const Ematrix recon = factors[0] * weights.asDiagonal() * kr0.transpose();
    return fold(to_matrix(recon), 0, shape);
}

}  // namespace nlrt
