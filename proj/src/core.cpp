#include "ssr/core.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace ssr {

namespace {

void require_finite(std::span<const double> values, const char* what) {
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw Error(std::string(what) + ": non-finite value");
        }
    }
}

}  // namespace

BandImage::BandImage(std::size_t h, std::size_t w, double fill)
    : height(h), width(w), data(h * w, fill) {}

BandImage::BandImage(std::size_t h, std::size_t w, std::vector<double> values)
    : height(h), width(w), data(std::move(values)) {
    if (data.size() != h * w) {
        throw Error("BandImage: data length does not match height*width");
    }
    require_finite(data, "BandImage");
}

MultiBandField::MultiBandField(std::size_t b, std::size_t h, std::size_t w, double fill)
    : bands(b), height(h), width(w), data(b * h * w, fill) {}

std::span<double> MultiBandField::band(std::size_t b) {
    return {data.data() + b * plane_size(), plane_size()};
}

std::span<const double> MultiBandField::band(std::size_t b) const {
    return {data.data() + b * plane_size(), plane_size()};
}

BandImage MultiBandField::band_image(std::size_t b) const {
    auto plane = band(b);
    return BandImage(height, width, std::vector<double>(plane.begin(), plane.end()));
}

void MultiBandField::set_band(std::size_t b, const BandImage& img) {
    if (img.height != height || img.width != width) {
        throw Error("MultiBandField: band shape mismatch");
    }
    std::copy(img.data.begin(), img.data.end(), band(b).begin());
}

SpectralCube::SpectralCube(std::vector<double> wavelengths_nm, std::size_t height,
                           std::size_t width, std::vector<double> data)
    : wavelengths_(std::move(wavelengths_nm)), height_(height), width_(width),
      data_(std::move(data)) {
    if (wavelengths_.empty()) {
        throw Error("SpectralCube: at least one band required");
    }
    for (std::size_t i = 1; i < wavelengths_.size(); ++i) {
        if (!(wavelengths_[i] > wavelengths_[i - 1])) {
            throw Error("SpectralCube: wavelengths must be strictly increasing");
        }
    }
    if (data_.size() != wavelengths_.size() * height_ * width_) {
        throw Error("SpectralCube: data length does not match q_bands*height*width");
    }
    for (double v : data_) {
        if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
            throw Error("SpectralCube: values must be finite and within [0,1]");
        }
    }
}

SpectralCube SpectralCube::from_bands(std::vector<double> wavelengths_nm,
                                      const std::vector<BandImage>& bands) {
    if (bands.size() != wavelengths_nm.size() || bands.empty()) {
        throw Error("SpectralCube: band count does not match wavelength count");
    }
    const std::size_t h = bands.front().height;
    const std::size_t w = bands.front().width;
    std::vector<double> data;
    data.reserve(bands.size() * h * w);
    for (const auto& b : bands) {
        if (b.height != h || b.width != w) {
            throw Error("SpectralCube: bands differ in shape");
        }
        data.insert(data.end(), b.data.begin(), b.data.end());
    }
    return SpectralCube(std::move(wavelengths_nm), h, w, std::move(data));
}

SpectralCube SpectralCube::from_field_clamped(std::vector<double> wavelengths_nm,
                                              const MultiBandField& field) {
    if (field.bands != wavelengths_nm.size()) {
        throw Error("SpectralCube: field band count does not match wavelength count");
    }
    std::vector<double> data(field.data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double v = field.data[i];
        if (!std::isfinite(v)) {
            throw Error("SpectralCube: non-finite value in reconstruction");
        }
        data[i] = std::clamp(v, 0.0, 1.0);
    }
    return SpectralCube(std::move(wavelengths_nm), field.height, field.width, std::move(data));
}

std::span<const double> SpectralCube::band(std::size_t b) const {
    return {data_.data() + b * plane_size(), plane_size()};
}

MultiBandField SpectralCube::to_field() const {
    MultiBandField f;
    f.bands = q_bands();
    f.height = height_;
    f.width = width_;
    f.data = data_;
    return f;
}

std::vector<double> cave_wavelengths() {
    std::vector<double> wl(31);
    for (std::size_t i = 0; i < wl.size(); ++i) {
        wl[i] = 400.0 + 10.0 * static_cast<double>(i);
    }
    return wl;
}

void NotchFilter::validate(std::span<const double> wavelengths_nm) const {
    if (is_panchromatic) {
        return;
    }
    if (!(half_width_nm > 0.0) || !std::isfinite(half_width_nm)) {
        throw Error("NotchFilter: half width must be positive");
    }
    if (!wavelengths_nm.empty() &&
        (center_nm < wavelengths_nm.front() || center_nm > wavelengths_nm.back())) {
        std::ostringstream os;
        os << "NotchFilter: centre " << center_nm << " nm outside the cube's wavelength span";
        throw Error(os.str());
    }
}

FilterBank FilterBank::normalized() const {
    FilterBank out = *this;
    for (auto& row : out.rows) {
        double pass = 0.0;
        for (double t : row) pass += t;
        if (!(pass > 0.0)) {
            throw Error("FilterBank: row with empty pass band cannot be normalized");
        }
        for (double& t : row) t /= pass;
    }
    return out;
}

void FilterBank::validate() const {
    if (rows.empty()) {
        throw Error("FilterBank: no apertures");
    }
    const std::size_t q = rows.front().size();
    for (const auto& row : rows) {
        if (row.size() != q) {
            throw Error("FilterBank: rows differ in length");
        }
        for (double t : row) {
            if (!(t >= 0.0 && t <= 1.0)) {
                throw Error("FilterBank: transmittance outside [0,1]");
            }
        }
    }
}

GeometricTransform GeometricTransform::inverse() const {
    // x = R(th)(p - c) + c + d  =>  p = R(-th)(x - c) + c - R(-th) d
    const double th = -rotation_deg * std::numbers::pi / 180.0;
    const double c = std::cos(th);
    const double s = std::sin(th);
    GeometricTransform inv;
    inv.rotation_deg = -rotation_deg;
    inv.dx = -(c * dx - s * dy);
    inv.dy = -(s * dx + c * dy);
    return inv;
}

void SsrParams::validate() const {
    if (masr_iters < 1 || pansharpen.iter_max < 1 || specrecon.iter_max < 1 || vtv.inner_iters < 1) {
        throw Error("SsrParams: iteration counts must be >= 1");
    }
    if (!(pansharpen.lipschitz > 0.0) || !(pansharpen.t1 >= 1.0)) {
        throw Error("SsrParams: pansharpen requires L > 0 and t1 >= 1");
    }
    if (!(specrecon.rho1 > 0.0) || !(specrecon.rho2 > 0.0)) {
        throw Error("SsrParams: rho1 and rho2 must be positive");
    }
    if (pansharpen.gamma < 0.0 || specrecon.eta < 0.0 || specrecon.eta_tv < 0.0) {
        throw Error("SsrParams: gamma, eta and eta_tv must be non-negative");
    }
    if (!(vtv.dual_step > 0.0) || vtv.dual_step > 0.125) {
        throw Error("SsrParams: vtv dual step must lie in (0, 1/8]");
    }
}

BandImage cube_band(const SpectralCube& cube, std::size_t band_index) {
    if (band_index >= cube.q_bands()) {
        std::ostringstream os;
        os << "cube_band: index " << band_index << " out of range for " << cube.q_bands()
           << " bands";
        throw Error(os.str());
    }
    auto plane = cube.band(band_index);
    return BandImage(cube.height(), cube.width(), std::vector<double>(plane.begin(), plane.end()));
}

BandImage apply_filter(const SpectralCube& cube, std::span<const double> t_row) {
    if (t_row.size() != cube.q_bands()) {
        throw Error("apply_filter: transmittance length does not match band count");
    }
    double pass = 0.0;
    for (double t : t_row) pass += t;
    if (!(pass > 0.0)) {
        throw Error("apply_filter: transmittance has an empty pass band");
    }
    BandImage out(cube.height(), cube.width(), 0.0);
    const std::size_t n = cube.plane_size();
    for (std::size_t b = 0; b < cube.q_bands(); ++b) {
        if (t_row[b] == 0.0) continue;
        auto plane = cube.band(b);
        for (std::size_t i = 0; i < n; ++i) {
            out.data[i] += t_row[b] * plane[i];
        }
    }
    for (double& v : out.data) v /= pass;
    return out;
}

}  // namespace ssr
