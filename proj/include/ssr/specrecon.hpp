#pragma once

#include "ssr/core.hpp"
#include "ssr/dictionary.hpp"

#include <span>
#include <vector>

namespace ssr {

// Stacked transmittance (normalized like apply_filter) and the matching
// high-resolution filtered images, one band per aperture.
struct StackedResponse {
    FilterBank transmittance;
    MultiBandField observations;
    std::vector<double> wavelengths_nm;

    // Normalizes the raw (binary) filter bank rows.
    static StackedResponse from_raw(const FilterBank& raw, MultiBandField observations,
                                    std::vector<double> wavelengths_nm);
    void validate() const;
};

struct AdmmTrace {
    std::vector<double> theta_z1_residual;   // ||theta - Z1||_F
    std::vector<double> x_z2_residual;       // ||D theta - Z2||_F
    std::vector<double> z1_zero_fraction;    // exact zeros in Z1
};

struct SpecreconResult {
    SpectralCube cube;       // D theta clamped to [0,1]
    MultiBandField raw;      // D theta before clamping
    AdmmTrace trace;
};

// sign(x) max(|x| - tau, 0)
std::vector<double> soft_threshold(std::span<const double> x, double tau);

SpecreconResult spectral_reconstruct(const StackedResponse& obs, const Dictionary& dict,
                                     const BandImage& pan, const SsrParams& params);

}  // namespace ssr
