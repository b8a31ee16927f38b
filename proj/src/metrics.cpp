#include "nlrt/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace nlrt {

namespace {

constexpr std::size_t kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;

std::vector<double> gaussian_kernel() {
    std::vector<double> k(kSsimWindow);
    const double center = (kSsimWindow - 1) / 2.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < kSsimWindow; ++i) {
        const double d = static_cast<double>(i) - center;
        k[i] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
        sum += k[i];
    }
    for (double& v : k) v /= sum;
    return k;
}

/// Separable valid-region Gaussian filter; output is
/// (rows-10) x (cols-10).
Matrix gaussian_filter_valid(const Matrix& img) {
    const std::vector<double> k = gaussian_kernel();
    const std::size_t rows = img.rows();
    const std::size_t cols = img.cols();
    const std::size_t out_rows = rows - kSsimWindow + 1;
    // Vertical pass.
    Matrix tmp(out_rows, cols);
    for (std::size_t j = 0; j < cols; ++j) {
        for (std::size_t i = 0; i < out_rows; ++i) {
            double acc = 0.0;
            for (std::size_t w = 0; w < kSsimWindow; ++w) acc += k[w] * img(i + w, j);
            tmp(i, j) = acc;
        }
    }
    // Horizontal pass.
    const std::size_t out_cols = cols - kSsimWindow + 1;
    Matrix out(out_rows, out_cols);
    for (std::size_t j = 0; j < out_cols; ++j) {
        for (std::size_t i = 0; i < out_rows; ++i) {
            double acc = 0.0;
            for (std::size_t w = 0; w < kSsimWindow; ++w) acc += k[w] * tmp(i, j + w);
            out(i, j) = acc;
        }
    }
    return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] * b.data()[i];
    return out;
}

/// Mode-k slice of a 3-way tensor as a matrix over the two remaining modes
/// (lower mode indexes rows).
Matrix slice_3d(const DenseTensor& t, std::size_t mode, std::size_t index) {
    const Shape& shape = t.shape();
    std::vector<std::size_t> other;
    for (std::size_t j = 0; j < 3; ++j) {
        if (j != mode) other.push_back(j);
    }
    Matrix out(shape.dim(other[0]), shape.dim(other[1]));
    std::vector<std::size_t> idx(3, 0);
    idx[mode] = index;
    for (std::size_t c = 0; c < shape.dim(other[1]); ++c) {
        idx[other[1]] = c;
        for (std::size_t r = 0; r < shape.dim(other[0]); ++r) {
            idx[other[0]] = r;
            out(r, c) = t.at(idx);
        }
    }
    return out;
}

}  // namespace

double rel_error(const DenseTensor& estimate, const DenseTensor& truth) {
    if (estimate.shape() != truth.shape()) {
        throw std::invalid_argument("rel_error: shape mismatch");
    }
    const double truth_norm = fro_norm(truth);
    if (truth_norm == 0.0) {
        throw std::invalid_argument("rel_error: truth has zero norm");
    }
    double acc = 0.0;
    const double* a = estimate.data();
    const double* b = truth.data();
    for (std::size_t i = 0; i < truth.num_elements(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc) / truth_norm;
}

double psnr(const Matrix& estimate, const Matrix& truth, double peak) {
    if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols()) {
        throw std::invalid_argument("psnr: shape mismatch");
    }
    if (peak <= 0.0) throw std::invalid_argument("psnr: peak must be > 0");
    double mse = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const double d = estimate.data()[i] - truth.data()[i];
        mse += d * d;
    }
    mse /= static_cast<double>(truth.size());
    if (mse == 0.0) return kPsnrCapDb;
    return 10.0 * std::log10(peak * peak / mse);
}

double ssim(const Matrix& estimate, const Matrix& truth, double dynamic_range) {
    if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols()) {
        throw std::invalid_argument("ssim: shape mismatch");
    }
    if (estimate.rows() < kSsimWindow || estimate.cols() < kSsimWindow) {
        throw std::invalid_argument(
            "ssim: image smaller than the 11x11 window; crop or pad the input");
    }
    const double c1 = (0.01 * dynamic_range) * (0.01 * dynamic_range);
    const double c2 = (0.03 * dynamic_range) * (0.03 * dynamic_range);

    const Matrix mu_x = gaussian_filter_valid(estimate);
    const Matrix mu_y = gaussian_filter_valid(truth);
    const Matrix xx = gaussian_filter_valid(hadamard(estimate, estimate));
    const Matrix yy = gaussian_filter_valid(hadamard(truth, truth));
    const Matrix xy = gaussian_filter_valid(hadamard(estimate, truth));

    double total = 0.0;
    for (std::size_t i = 0; i < mu_x.size(); ++i) {
        const double mx = mu_x.data()[i];
        const double my = mu_y.data()[i];
        const double var_x = xx.data()[i] - mx * mx;
        const double var_y = yy.data()[i] - my * my;
        const double cov = xy.data()[i] - mx * my;
        total += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) /
                 ((mx * mx + my * my + c1) * (var_x + var_y + c2));
    }
    return total / static_cast<double>(mu_x.size());
}

BandReport band_report(const DenseTensor& estimate, const DenseTensor& truth,
                       std::size_t spectral_mode, double peak, double dynamic_range) {
    if (estimate.shape() != truth.shape()) {
        throw std::invalid_argument("band_report: shape mismatch");
    }
    if (estimate.order() != 3) {
        throw std::invalid_argument("band_report: expects 3-way tensors");
    }
    if (spectral_mode >= 3) {
        throw std::out_of_range("band_report: spectral mode out of range");
    }
    const std::size_t bands = estimate.shape().dim(spectral_mode);
    BandReport report;
    report.psnr.reserve(bands);
    report.ssim.reserve(bands);
    for (std::size_t b = 0; b < bands; ++b) {
        const Matrix est = slice_3d(estimate, spectral_mode, b);
        const Matrix tru = slice_3d(truth, spectral_mode, b);
        report.psnr.push_back(psnr(est, tru, peak));
        report.ssim.push_back(ssim(est, tru, dynamic_range));
        report.mean_psnr += report.psnr.back();
        report.mean_ssim += report.ssim.back();
    }
    report.mean_psnr /= static_cast<double>(bands);
    report.mean_ssim /= static_cast<double>(bands);
    return report;
}

}  // namespace nlrt
