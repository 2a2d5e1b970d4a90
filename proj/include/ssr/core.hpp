#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ssr {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Single-plane image, row-major.
struct BandImage {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<double> data;

    BandImage() = default;
    BandImage(std::size_t h, std::size_t w, double fill = 0.0);
    BandImage(std::size_t h, std::size_t w, std::vector<double> values);

    std::size_t size() const { return data.size(); }
    double& at(std::size_t y, std::size_t x) { return data[y * width + x]; }
    double at(std::size_t y, std::size_t x) const { return data[y * width + x]; }
};

// Stack of equally sized planes with no range restriction. Used for solver
// iterates (pan-sharpened apertures, dual fields, unclamped reconstructions).
struct MultiBandField {
    std::size_t bands = 0;
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<double> data;

    MultiBandField() = default;
    MultiBandField(std::size_t b, std::size_t h, std::size_t w, double fill = 0.0);

    std::size_t plane_size() const { return height * width; }
    std::span<double> band(std::size_t b);
    std::span<const double> band(std::size_t b) const;
    BandImage band_image(std::size_t b) const;
    void set_band(std::size_t b, const BandImage& img);
};

// Q-band cube, band-major, values in [0,1]. Immutable once built.
class SpectralCube {
public:
    SpectralCube() = default;
    SpectralCube(std::vector<double> wavelengths_nm, std::size_t height, std::size_t width,
                 std::vector<double> data);

    static SpectralCube from_bands(std::vector<double> wavelengths_nm,
                                   const std::vector<BandImage>& bands);
    // Clamps to [0,1]; used at the very end of reconstruction.
    static SpectralCube from_field_clamped(std::vector<double> wavelengths_nm,
                                           const MultiBandField& field);

    std::size_t q_bands() const { return wavelengths_.size(); }
    std::size_t height() const { return height_; }
    std::size_t width() const { return width_; }
    std::size_t plane_size() const { return height_ * width_; }
    const std::vector<double>& wavelengths() const { return wavelengths_; }
    const std::vector<double>& data() const { return data_; }
    std::span<const double> band(std::size_t b) const;
    double at(std::size_t b, std::size_t y, std::size_t x) const {
        return data_[(b * height_ + y) * width_ + x];
    }
    MultiBandField to_field() const;

private:
    std::vector<double> wavelengths_;
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<double> data_;
};

// 400:10:700 nm, the 31-band grid of the CAVE dataset.
std::vector<double> cave_wavelengths();

struct NotchFilter {
    double center_nm = 0.0;
    double half_width_nm = 0.0;
    bool is_panchromatic = false;

    static NotchFilter panchromatic() { return {0.0, 0.0, true}; }
    static NotchFilter notch(double center, double half_width) { return {center, half_width, false}; }
    void validate(std::span<const double> wavelengths_nm) const;
};

// K transmittance rows, one per aperture, in aperture order.
struct FilterBank {
    std::vector<std::vector<double>> rows;

    std::size_t apertures() const { return rows.size(); }
    std::size_t q_bands() const { return rows.empty() ? 0 : rows.front().size(); }
    // Each row divided by its pass-band count, the same scaling apply_filter uses.
    FilterBank normalized() const;
    void validate() const;
};

// Warp parameters in high-resolution pixels. The warped image samples the
// source at R(theta)(p - c) + c + (dx, dy), with c the image centre.
struct GeometricTransform {
    double dx = 0.0;
    double dy = 0.0;
    double rotation_deg = 0.0;

    GeometricTransform inverse() const;
    bool is_identity() const { return dx == 0.0 && dy == 0.0 && rotation_deg == 0.0; }
};

struct VtvParams {
    int inner_iters = 30;
    double dual_step = 0.125;
    bool warm_start = false;
};

struct PansharpenParams {
    double lipschitz = 1.0;
    double t1 = 1.0;
    double gamma = 0.05;
    int iter_max = 200;
    double rel_tol = 1e-6;
    bool momentum = true;
    // Keep the previous iterate when the new prox point raises the energy.
    bool monotone = true;
};

struct SpecreconParams {
    double rho1 = 1e-6;
    double rho2 = 2e-3;
    double eta_tv = 1e-3;
    double eta = 1e-3;
    int iter_max = 40;
};

struct SsrParams {
    int masr_iters = 50;
    PansharpenParams pansharpen;
    SpecreconParams specrecon;
    VtvParams vtv;

    void validate() const;
};

BandImage cube_band(const SpectralCube& cube, std::size_t band_index);

// Per-pixel <spectrum, t_row> divided by sum(t_row).
BandImage apply_filter(const SpectralCube& cube, std::span<const double> t_row);

}  // namespace ssr
