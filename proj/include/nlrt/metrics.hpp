#pragma once

#include <cstddef>
#include <vector>

#include "nlrt/tensor.hpp"

namespace nlrt {

/// ||estimate - truth||_F / ||truth||_F. Throws on zero truth norm.
double rel_error(const DenseTensor& estimate, const DenseTensor& truth);

/// PSNR cap used when MSE is exactly zero.
inline constexpr double kPsnrCapDb = 99.0;

/// 10 log10(peak^2 / MSE), capped at kPsnrCapDb for identical slices.
double psnr(const Matrix& estimate, const Matrix& truth, double peak);

/// Mean local SSIM with an 11x11 Gaussian window (sigma 1.5),
/// C1 = (0.01 L)^2, C2 = (0.03 L)^2. Windows fully inside the image only;
/// throws if either image dimension is below 11.
double ssim(const Matrix& estimate, const Matrix& truth, double dynamic_range);

struct BandReport {
    std::vector<double> psnr;
    std::vector<double> ssim;
    double mean_psnr = 0.0;
    double mean_ssim = 0.0;
};

/// Per-band PSNR/SSIM over mode-`spectral_mode` slices of two 3-way tensors,
/// plus arithmetic means. `peak` and `dynamic_range` apply to every band.
BandReport band_report(const DenseTensor& estimate, const DenseTensor& truth,
                       std::size_t spectral_mode, double peak, double dynamic_range);

}  // namespace nlrt
