#pragma once

#include "ssr/core.hpp"
#include "ssr/operators.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace ssr {

struct ApertureCapture {
    BandImage image;
    NotchFilter filter;
    GeometricTransform transform;
    std::size_t aperture_index = 0;
};

// The K low-resolution captures of one exposure.
struct ApertureStack {
    std::vector<ApertureCapture> captures;
    std::size_t r = 1;
    std::vector<double> wavelengths_nm;

    std::size_t size() const { return captures.size(); }
    std::size_t low_height() const { return captures.empty() ? 0 : captures.front().image.height; }
    std::size_t low_width() const { return captures.empty() ? 0 : captures.front().image.width; }
    std::size_t high_height() const { return low_height() * r; }
    std::size_t high_width() const { return low_width() * r; }

    std::vector<GeometricTransform> transforms() const;
    std::vector<NotchFilter> filters() const;
    // Y_L: all captures concatenated in aperture order.
    std::vector<double> concatenated() const;
    void validate() const;
};

struct OpticsSpec {
    double aperture_diameter_mm = 25.0 / 2.2;
    double focal_length_mm = 25.0;
    double pixel_pitch_um = 6.9;
    double wavelength_nm = 700.0;
    int k_apertures = 9;
};

// min(2 A p / (1.22 lambda f), sqrt(K)).
double sr_factor(const OpticsSpec& o);
// The diffraction/Nyquist ratio alone.
double diffraction_nyquist_ratio(const OpticsSpec& o);

// 0 where |lambda - centre| <= half width, 1 elsewhere; all ones for a pan filter.
std::vector<double> notch_transmittance(const NotchFilter& filter,
                                        std::span<const double> wavelengths_nm);

FilterBank build_filter_bank(std::span<const NotchFilter> filters,
                             std::span<const double> wavelengths_nm);

// Eight notch filters across 420-690 nm with the panchromatic aperture in
// the centre of the 3x3 array (index 4).
std::vector<NotchFilter> default_filters();
inline constexpr std::size_t kDefaultPanIndex = 4;

// 3x3 lattice of integer high-res shifts (col-1, row-1) with a seeded jitter
// of at most `max_jitter` pixels; the centre aperture is left untouched.
std::vector<GeometricTransform> lattice_transforms(std::size_t grid, std::uint64_t seed,
                                                   double max_jitter = 0.1);

struct CaptureOptions {
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;
    DecimationKernel kernel = DecimationKernel::BoxAverage;
};

// filter -> warp -> decimate -> optional Gaussian noise clamped to [0,1].
ApertureStack simulate_capture(const SpectralCube& truth, std::span<const NotchFilter> filters,
                               std::span<const GeometricTransform> transforms, std::size_t r,
                               const CaptureOptions& options = {});

}  // namespace ssr
