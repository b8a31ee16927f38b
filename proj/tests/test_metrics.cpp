#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "nlrt/metrics.hpp"
#include "nlrt/rng.hpp"
#include "oracles.hpp"

using namespace nlrt;

namespace {

/// Brute-force SSIM: per-window 2D Gaussian weights and direct moment sums,
/// no separable filtering.
double ssim_bruteforce(const Matrix& x, const Matrix& y, double range) {
    const int win = 11;
    const double sigma = 1.5;
    std::vector<double> w(win * win);
    double wsum = 0.0;
    for (int a = 0; a < win; ++a) {
        for (int b = 0; b < win; ++b) {
            const double da = a - 5.0;
            const double db = b - 5.0;
            w[a * win + b] = std::exp(-(da * da + db * db) / (2.0 * sigma * sigma));
            wsum += w[a * win + b];
        }
    }
    for (double& v : w) v /= wsum;

    const double c1 = (0.01 * range) * (0.01 * range);
    const double c2 = (0.03 * range) * (0.03 * range);
    double total = 0.0;
    std::size_t windows = 0;
    for (std::size_t i0 = 0; i0 + win <= x.rows(); ++i0) {
        for (std::size_t j0 = 0; j0 + win <= x.cols(); ++j0) {
            double mx = 0.0, my = 0.0, xx = 0.0, yy = 0.0, xy = 0.0;
            for (int a = 0; a < win; ++a) {
                for (int b = 0; b < win; ++b) {
                    const double weight = w[a * win + b];
                    const double xv = x(i0 + a, j0 + b);
                    const double yv = y(i0 + a, j0 + b);
                    mx += weight * xv;
                    my += weight * yv;
                    xx += weight * xv * xv;
                    yy += weight * yv * yv;
                    xy += weight * xv * yv;
                }
            }
            const double var_x = xx - mx * mx;
            const double var_y = yy - my * my;
            const double cov = xy - mx * my;
            total += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) /
                     ((mx * mx + my * my + c1) * (var_x + var_y + c2));
            ++windows;
        }
    }
    return total / static_cast<double>(windows);
}

Matrix constant_matrix(std::size_t rows, std::size_t cols, double v) {
    return Matrix(rows, cols, std::vector<double>(rows * cols, v));
}

}  // namespace

TEST_CASE("rel_error on hand examples") {
    const DenseTensor truth(Shape({2, 2}), {3, 0, 4, 0});
    const DenseTensor est(Shape({2, 2}), {3, 0, 4, 5});
    CHECK(rel_error(est, truth) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rel_error(truth, truth) == 0.0);

    const DenseTensor zero(Shape({2, 2}), {0, 0, 0, 0});
    CHECK_THROWS_AS(rel_error(est, zero), std::invalid_argument);
    CHECK_THROWS_AS(rel_error(est, DenseTensor(Shape({4}), {1, 2, 3, 4})),
                    std::invalid_argument);
}

TEST_CASE("psnr formula values and cap") {
    const Matrix truth = constant_matrix(2, 2, 0.0);
    const Matrix off = constant_matrix(2, 2, 0.1);
    // MSE 0.01 against peak 1 is exactly 20 dB.
    CHECK(psnr(off, truth, 1.0) == doctest::Approx(20.0).epsilon(1e-12));
    CHECK(psnr(off, truth, 2.0) == doctest::Approx(20.0 + 20.0 * std::log10(2.0)).epsilon(1e-12));
    CHECK(psnr(truth, truth, 1.0) == kPsnrCapDb);
    CHECK_THROWS_AS(psnr(off, truth, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(psnr(off, constant_matrix(3, 2, 0.0), 1.0), std::invalid_argument);
}

TEST_CASE("psnr is strictly decreasing in MSE") {
    const Matrix truth = constant_matrix(4, 4, 0.5);
    double prev = kPsnrCapDb;
    for (double delta : {0.001, 0.01, 0.05, 0.2}) {
        const double value = psnr(constant_matrix(4, 4, 0.5 + delta), truth, 1.0);
        CHECK(value < prev);
        prev = value;
    }
}

TEST_CASE("ssim basics") {
    SplitMix64 rng(71);
    const Matrix img = oracle::random_matrix(14, 17, rng);
    CHECK(ssim(img, img, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(ssim(constant_matrix(10, 12, 0.0), constant_matrix(10, 12, 0.0), 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(ssim(img, oracle::random_matrix(14, 18, rng), 1.0),
                    std::invalid_argument);
}

TEST_CASE("ssim on constant images has a closed form") {
    // Zero variance everywhere: SSIM reduces to the luminance term.
    const double a = 0.3, b = 0.7, range = 1.0;
    const double c1 = 0.01 * 0.01;
    const double expected = (2.0 * a * b + c1) / (a * a + b * b + c1);
    CHECK(ssim(constant_matrix(12, 13, a), constant_matrix(12, 13, b), range) ==
          doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("ssim matches the per-window brute-force oracle") {
    SplitMix64 rng(72);
    const Matrix x = oracle::random_matrix(16, 19, rng);
    Matrix y = x;
    for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] += 0.1 * rng.uniform();
    CHECK(ssim(x, y, 1.0) == doctest::Approx(ssim_bruteforce(x, y, 1.0)).epsilon(1e-10));
    CHECK(ssim(x, y, 1.0) < 1.0);
}

TEST_CASE("band_report slices and means") {
    SplitMix64 rng(73);
    const Shape shape({12, 13, 4});
    const DenseTensor truth = oracle::random_tensor(shape, rng);
    DenseTensor est = truth;
    for (std::size_t i = 0; i < est.num_elements(); ++i) {
        est.mutable_values()[i] += 0.05 * rng.uniform();
    }
    const BandReport report = band_report(est, truth, 2, 1.0, 1.0);
    REQUIRE(report.psnr.size() == 4);
    REQUIRE(report.ssim.size() == 4);

    double psnr_mean = 0.0, ssim_mean = 0.0;
    for (std::size_t b = 0; b < 4; ++b) {
        Matrix eb(12, 13), tb(12, 13);
        for (std::size_t j = 0; j < 13; ++j) {
            for (std::size_t i = 0; i < 12; ++i) {
                eb(i, j) = est.at({i, j, b});
                tb(i, j) = truth.at({i, j, b});
            }
        }
        CHECK(report.psnr[b] == doctest::Approx(psnr(eb, tb, 1.0)).epsilon(1e-12));
        CHECK(report.ssim[b] == doctest::Approx(ssim(eb, tb, 1.0)).epsilon(1e-12));
        psnr_mean += report.psnr[b];
        ssim_mean += report.ssim[b];
    }
    CHECK(report.mean_psnr == doctest::Approx(psnr_mean / 4.0).epsilon(1e-12));
    CHECK(report.mean_ssim == doctest::Approx(ssim_mean / 4.0).epsilon(1e-12));

    CHECK_THROWS_AS(band_report(est, truth, 3, 1.0, 1.0), std::out_of_range);
    CHECK_THROWS_AS(band_report(DenseTensor(Shape({4, 4}), std::vector<double>(16, 1.0)),
                                DenseTensor(Shape({4, 4}), std::vector<double>(16, 1.0)), 0,
                                1.0, 1.0),
                    std::invalid_argument);
}
