#include "nlrt/analysis.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "nlrt/rng.hpp"
#include "nlrt/svd.hpp"

namespace nlrt {

namespace {

using Ematrix = Eigen::MatrixXd;
using ConstMap = Eigen::Map<const Ematrix>;

ConstMap map_of(const Matrix& m) {
    return ConstMap(m.data(), static_cast<Eigen::Index>(m.rows()),
                    static_cast<Eigen::Index>(m.cols()));
}

/// Indices of the `count` largest weights, descending, ties by lower index.
std::vector<std::size_t> top_indices(const std::vector<double>& weights, std::size_t count) {
    std::vector<std::size_t> order(weights.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return weights[a] > weights[b]; });
    order.resize(count);
    return order;
}

}  // namespace

ResidualCurve residual_curve_nlrt(const DenseTensor& a, const SolverResult& result,
                                  std::size_t mode, std::size_t count) {
    if (mode >= result.mode_factors.size()) {
        throw std::out_of_range("residual_curve_nlrt: mode out of range");
    }
    const SvdTriplets& svd = result.mode_factors[mode];
    if (count < 1 || count > svd.rank) {
        throw std::invalid_argument("residual_curve_nlrt: component count out of range");
    }
    const Matrix a_k = unfold(a, mode);
    const double a_norm = fro_norm(a);
    ConstMap am = map_of(a_k);
    ConstMap u(svd.left.data(), static_cast<Eigen::Index>(svd.left.rows()),
               static_cast<Eigen::Index>(svd.left.cols()));
    ConstMap v(svd.right.data(), static_cast<Eigen::Index>(svd.right.rows()),
               static_cast<Eigen::Index>(svd.right.cols()));

    ResidualCurve curve;
    curve.method = "nlrt";
    Ematrix partial = Ematrix::Zero(am.rows(), am.cols());
    for (std::size_t j = 1; j <= count; ++j) {
        const Eigen::Index i = static_cast<Eigen::Index>(j - 1);
        partial.noalias() += svd.sigmas[j - 1] * u.col(i) * v.col(i).transpose();
        curve.component_counts.push_back(j);
        curve.residuals.push_back((am - partial).norm() / a_norm);
    }
    return curve;
}

ResidualCurve residual_curve_ntd(const DenseTensor& a, const TuckerFactors& f,
                                 std::size_t mode, std::size_t count) {
    const std::size_t m = f.factors.size();
    if (mode >= m) throw std::out_of_range("residual_curve_ntd: mode out of range");
    const std::size_t r_mode = f.core.shape().dim(mode);
    if (count < 1 || count > r_mode) {
        throw std::invalid_argument("residual_curve_ntd: component count out of range");
    }

    // Contract the core with every factor except `mode`.
    DenseTensor contracted = f.core;
    for (std::size_t k = 0; k < m; ++k) {
        if (k != mode) contracted = mode_product(contracted, f.factors[k], k);
    }
    const Matrix t_unf = unfold(contracted, mode);  // r_mode x (prod of others)
    ConstMap t(t_unf.data(), static_cast<Eigen::Index>(t_unf.rows()),
               static_cast<Eigen::Index>(t_unf.cols()));
    ConstMap u = map_of(f.factors[mode]);

    // Slice norms fold into the matching factor columns; ranking uses the l2
    // norms of the rescaled columns so the full index set reproduces the
    // reconstruction exactly.
    std::vector<double> weights(r_mode);
    for (std::size_t c = 0; c < r_mode; ++c) {
        const double slice_norm = t.row(static_cast<Eigen::Index>(c)).norm();
        weights[c] = slice_norm * u.col(static_cast<Eigen::Index>(c)).norm();
    }
    const std::vector<std::size_t> order = top_indices(weights, count);

    const Matrix a_unf = unfold(a, mode);
    ConstMap am = map_of(a_unf);
    const double a_norm = fro_norm(a);

    ResidualCurve curve;
    curve.method = "ntd";
    Ematrix partial = Ematrix::Zero(am.rows(), am.cols());
    for (std::size_t j = 0; j < count; ++j) {
        const Eigen::Index c = static_cast<Eigen::Index>(order[j]);
        partial.noalias() += u.col(c) * t.row(c);
        curve.component_counts.push_back(j + 1);
        curve.residuals.push_back((am - partial).norm() / a_norm);
    }
    return curve;
}

ResidualCurve residual_curve_ncpd(const DenseTensor& a, const CpFactors& f,
                                  std::size_t count) {
    const std::size_t m = f.factors.size();
    const std::size_t z = f.weights.size();
    if (count < 1 || count > z) {
        throw std::invalid_argument("residual_curve_ncpd: component count out of range");
    }
    // Normalize columns to unit l2 norm, folding scales into lambda.
    std::vector<Ematrix> factors;
    factors.reserve(m);
    for (const Matrix& fac : f.factors) factors.push_back(map_of(fac));
    std::vector<double> lambda(f.weights);
    for (Ematrix& fac : factors) {
        for (std::size_t c = 0; c < z; ++c) {
            const Eigen::Index ec = static_cast<Eigen::Index>(c);
            const double norm = fac.col(ec).norm();
            if (norm > 0.0) {
                fac.col(ec) /= norm;
                lambda[c] *= norm;
            }
        }
    }
    const std::vector<std::size_t> order = top_indices(lambda, count);

    const Matrix a_unf = unfold(a, 0);
    ConstMap am = map_of(a_unf);
    const double a_norm = fro_norm(a);

    ResidualCurve curve;
    curve.method = "ncpd";
    Ematrix partial = Ematrix::Zero(am.rows(), am.cols());
    for (std::size_t j = 0; j < count; ++j) {
        const std::size_t term = order[j];
        // Rank-1 term: lambda * a^0 outer (KR of the other modes, cyclic order).
        Eigen::VectorXd kr = Eigen::VectorXd::Ones(1);
        for (std::size_t step = 1; step < m; ++step) {
            const std::size_t mode = step % m;
            const Eigen::VectorXd col = factors[mode].col(static_cast<Eigen::Index>(term));
            Eigen::VectorXd next(kr.size() * col.size());
            for (Eigen::Index i = 0; i < col.size(); ++i) {
                next.segment(i * kr.size(), kr.size()) = col(i) * kr;
            }
            kr = std::move(next);
        }
        partial.noalias() +=
            lambda[term] * factors[0].col(static_cast<Eigen::Index>(term)) * kr.transpose();
        curve.component_counts.push_back(j + 1);
        curve.residuals.push_back((am - partial).norm() / a_norm);
    }
    return curve;
}

Matrix spectral_features_nlrt(const DenseTensor& approximation, const SolverResult& result,
                              std::size_t spectral_mode, std::size_t count) {
    if (spectral_mode >= result.mode_factors.size()) {
        throw std::out_of_range("spectral_features_nlrt: mode out of range");
    }
    const SvdTriplets& svd = result.mode_factors[spectral_mode];
    if (count < 1 || count > svd.rank) {
        throw std::invalid_argument("spectral_features_nlrt: count out of range");
    }
    const Matrix x_k = unfold(approximation, spectral_mode);
    ConstMap xm = map_of(x_k);
    ConstMap u(svd.left.data(), static_cast<Eigen::Index>(svd.left.rows()),
               static_cast<Eigen::Index>(svd.left.cols()));
    Matrix out(x_k.cols(), count);
    Eigen::Map<Ematrix>(out.data(), static_cast<Eigen::Index>(out.rows()),
                        static_cast<Eigen::Index>(out.cols()))
        .noalias() = xm.transpose() * u.leftCols(static_cast<Eigen::Index>(count));
    return out;
}

Matrix spectral_features(const DenseTensor& reconstruction, std::size_t spectral_mode,
                         std::size_t count) {
    const Matrix x_k = unfold(reconstruction, spectral_mode);
    if (count < 1 || count > std::min(x_k.rows(), x_k.cols())) {
        throw std::invalid_argument("spectral_features: count out of range");
    }
    const SvdTriplets svd = truncated_svd(x_k, count);
    ConstMap xm = map_of(x_k);
    ConstMap u(svd.left.data(), static_cast<Eigen::Index>(svd.left.rows()),
               static_cast<Eigen::Index>(svd.left.cols()));
    Matrix out(x_k.cols(), count);
    Eigen::Map<Ematrix>(out.data(), static_cast<Eigen::Index>(out.rows()),
                        static_cast<Eigen::Index>(out.cols()))
        .noalias() = xm.transpose() * u;
    return out;
}

double knn_classify(const LabeledPixels& data, std::size_t k) {
    if (k == 0) throw std::invalid_argument("knn_classify: k must be >= 1");
    if (data.train_idx.empty()) throw std::invalid_argument("knn_classify: empty train set");
    if (data.labels.size() != data.features.rows()) {
        throw std::invalid_argument("knn_classify: label count mismatch");
    }
    ConstMap feats = map_of(data.features);
    const std::size_t n_train = data.train_idx.size();
    const std::size_t k_eff = std::min(k, n_train);

    std::size_t correct = 0;
    std::vector<std::pair<double, std::size_t>> dist(n_train);  // (distance^2, train pos)
    for (std::size_t test : data.test_idx) {
        const auto query = feats.row(static_cast<Eigen::Index>(test));
        for (std::size_t t = 0; t < n_train; ++t) {
            const auto ref = feats.row(static_cast<Eigen::Index>(data.train_idx[t]));
            dist[t] = {(query - ref).squaredNorm(), t};
        }
        // Distance ties resolve to the lowest train position.
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k_eff),
                          dist.end());
        std::map<int, std::size_t> votes;
        for (std::size_t i = 0; i < k_eff; ++i) {
            ++votes[data.labels[data.train_idx[dist[i].second]]];
        }
        std::size_t best_count = 0;
        for (const auto& [cls, n] : votes) best_count = std::max(best_count, n);
        // Plurality ties go to the nearest neighbor's class.
        int predicted = data.labels[data.train_idx[dist[0].second]];
        if (votes[predicted] != best_count) {
            for (std::size_t i = 0; i < k_eff; ++i) {
                const int cls = data.labels[data.train_idx[dist[i].second]];
                if (votes[cls] == best_count) {
                    predicted = cls;
                    break;
                }
            }
        }
        if (predicted == data.labels[test]) ++correct;
    }
    if (data.test_idx.empty()) return 1.0;
    return static_cast<double>(correct) / static_cast<double>(data.test_idx.size());
}

LabeledPixels split_per_class(const Matrix& features, const std::vector<int>& labels,
                              std::size_t per_class, std::uint64_t seed) {
    if (labels.size() != features.rows()) {
        throw std::invalid_argument("split_per_class: label count mismatch");
    }
    if (per_class == 0) throw std::invalid_argument("split_per_class: per_class must be >= 1");
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);

    LabeledPixels out;
    out.features = features;
    out.labels = labels;
    SplitMix64 rng(seed);
    for (auto& [cls, members] : by_class) {
        // Fisher-Yates, seeded.
        for (std::size_t i = members.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(rng.next() % i);
            std::swap(members[i - 1], members[j]);
        }
        const std::size_t take = std::min(per_class, members.size());
        for (std::size_t i = 0; i < members.size(); ++i) {
            (i < take ? out.train_idx : out.test_idx).push_back(members[i]);
        }
    }
    std::sort(out.train_idx.begin(), out.train_idx.end());
    std::sort(out.test_idx.begin(), out.test_idx.end());
    return out;
}

}  // namespace nlrt
