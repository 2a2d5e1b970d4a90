#pragma once

#include "ssr/core.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace ssr {

// Reported in place of +inf for identical bands.
inline constexpr double kPsnrCap = 99.0;

struct SamResult {
    double mean_radians = 0.0;
    std::size_t skipped_pixels = 0;  // zero-norm spectra
};

struct QualityReport {
    std::string scene;
    std::vector<double> psnr_db;    // per band
    std::vector<double> ssim;       // per band
    std::vector<double> rmse_8bit;  // per band
    double mean_psnr_db = 0.0;
    double mean_ssim = 0.0;
    double rmse_8bit_global = 0.0;  // over all voxels
    double sam_radians = 0.0;
    std::size_t sam_skipped = 0;
};

// All metrics work on the 0-255 scale of the [0,1] data.
double rmse_8bit(const SpectralCube& a, const SpectralCube& b);
double psnr_db(const SpectralCube& a, const SpectralCube& b);
double ssim(const SpectralCube& a, const SpectralCube& b);
SamResult sam(const SpectralCube& a, const SpectralCube& b);
double sam_radians(const SpectralCube& a, const SpectralCube& b);

double band_psnr_db(std::span<const double> a, std::span<const double> b);
// 11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03, L = 255. Near the
// border the window is truncated to the image and renormalized.
double band_ssim(std::span<const double> a, std::span<const double> b, std::size_t h, std::size_t w);

QualityReport evaluate(const SpectralCube& reference, const SpectralCube& estimate,
                       const std::string& scene);

// key = value lines, one record per metric.
std::string format_report(const QualityReport& report);

// |a - b| per pixel, multiplied by `gain` and clipped to [0,1].
BandImage error_map(std::span<const double> a, std::span<const double> b, std::size_t h,
                    std::size_t w, double gain = 1.0);

}  // namespace ssr
