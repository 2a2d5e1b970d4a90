#include "ssr/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace ssr {

std::vector<GeometricTransform> ApertureStack::transforms() const {
    std::vector<GeometricTransform> out;
    out.reserve(captures.size());
    for (const auto& c : captures) out.push_back(c.transform);
    return out;
}

std::vector<NotchFilter> ApertureStack::filters() const {
    std::vector<NotchFilter> out;
    out.reserve(captures.size());
    for (const auto& c : captures) out.push_back(c.filter);
    return out;
}

std::vector<double> ApertureStack::concatenated() const {
    std::vector<double> y;
    y.reserve(captures.size() * low_height() * low_width());
    for (const auto& c : captures) y.insert(y.end(), c.image.data.begin(), c.image.data.end());
    return y;
}

void ApertureStack::validate() const {
    if (captures.empty()) {
        throw Error("ApertureStack: no captures");
    }
    if (r < 1) {
        throw Error("ApertureStack: downsampling factor must be >= 1");
    }
    for (std::size_t i = 0; i < captures.size(); ++i) {
        const auto& c = captures[i];
        if (c.image.height != low_height() || c.image.width != low_width()) {
            throw Error("ApertureStack: captures differ in shape");
        }
        if (c.aperture_index != i) {
            throw Error("ApertureStack: captures are not in aperture order");
        }
    }
}

double diffraction_nyquist_ratio(const OpticsSpec& o) {
    if (!(o.aperture_diameter_mm > 0 && o.focal_length_mm > 0 && o.pixel_pitch_um > 0 &&
          o.wavelength_nm > 0 && o.k_apertures > 0)) {
        throw Error("sr_factor: optics parameters must be positive");
    }
    const double a = o.aperture_diameter_mm * 1e-3;
    const double f = o.focal_length_mm * 1e-3;
    const double p = o.pixel_pitch_um * 1e-6;
    const double lambda = o.wavelength_nm * 1e-9;
    return 2.0 * a * p / (1.22 * lambda * f);
}

double sr_factor(const OpticsSpec& o) {
    return std::min(diffraction_nyquist_ratio(o), std::sqrt(static_cast<double>(o.k_apertures)));
}

std::vector<double> notch_transmittance(const NotchFilter& filter,
                                        std::span<const double> wavelengths_nm) {
    std::vector<double> t(wavelengths_nm.size(), 1.0);
    if (filter.is_panchromatic) {
        return t;
    }
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (std::abs(wavelengths_nm[i] - filter.center_nm) <= filter.half_width_nm) t[i] = 0.0;
    }
    return t;
}

FilterBank build_filter_bank(std::span<const NotchFilter> filters,
                             std::span<const double> wavelengths_nm) {
    FilterBank bank;
    for (const auto& f : filters) {
        f.validate(wavelengths_nm);
        bank.rows.push_back(notch_transmittance(f, wavelengths_nm));
    }
    bank.validate();
    return bank;
}

std::vector<NotchFilter> default_filters() {
    const double centres[8] = {420, 460, 500, 530, 570, 610, 650, 690};
    std::vector<NotchFilter> out;
    for (std::size_t i = 0, c = 0; i < 9; ++i) {
        if (i == kDefaultPanIndex) {
            out.push_back(NotchFilter::panchromatic());
        } else {
            out.push_back(NotchFilter::notch(centres[c++], 20.0));
        }
    }
    return out;
}

std::vector<GeometricTransform> lattice_transforms(std::size_t grid, std::uint64_t seed,
                                                   double max_jitter) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> jitter(-max_jitter, max_jitter);
    const std::size_t centre = grid / 2;
    std::vector<GeometricTransform> out;
    for (std::size_t row = 0; row < grid; ++row) {
        for (std::size_t col = 0; col < grid; ++col) {
            GeometricTransform t;
            t.dx = static_cast<double>(col) - static_cast<double>(centre);
            t.dy = static_cast<double>(row) - static_cast<double>(centre);
            const double jx = jitter(rng);
            const double jy = jitter(rng);
            if (row != centre || col != centre) {
                t.dx += jx;
                t.dy += jy;
            }
            out.push_back(t);
        }
    }
    return out;
}

ApertureStack simulate_capture(const SpectralCube& truth, std::span<const NotchFilter> filters,
                               std::span<const GeometricTransform> transforms, std::size_t r,
                               const CaptureOptions& options) {
    if (filters.size() != transforms.size() || filters.empty()) {
        throw Error("simulate_capture: filter and transform lists must have equal, non-zero length");
    }
    if (!(options.noise_sigma >= 0.0)) {
        throw Error("simulate_capture: noise sigma must be non-negative");
    }
    const std::size_t h = truth.height();
    const std::size_t w = truth.width();
    if (r < 1 || h % r != 0 || w % r != 0) {
        std::ostringstream os;
        os << "simulate_capture: " << h << "x" << w << " cube is not divisible by r=" << r;
        throw Error(os.str());
    }
    const SparseOperator dec = build_decimation(r, h, w, options.kernel);

    ApertureStack stack;
    stack.r = r;
    stack.wavelengths_nm = truth.wavelengths();
    stack.captures.resize(filters.size());
    for (std::size_t i = 0; i < filters.size(); ++i) {
        filters[i].validate(truth.wavelengths());
        const auto t_row = notch_transmittance(filters[i], truth.wavelengths());
        const BandImage filtered = apply_filter(truth, t_row);
        const SparseOperator warp = build_warp(transforms[i], h, w);
        const BandImage warped = apply_operator(warp, filtered, h, w);
        BandImage low = apply_operator(dec, warped, h / r, w / r);
        if (options.noise_sigma > 0.0) {
            std::seed_seq seq{static_cast<std::uint32_t>(options.seed),
                              static_cast<std::uint32_t>(options.seed >> 32),
                              static_cast<std::uint32_t>(i)};
            std::mt19937_64 rng(seq);
            std::normal_distribution<double> noise(0.0, options.noise_sigma);
            for (double& v : low.data) v = std::clamp(v + noise(rng), 0.0, 1.0);
        }
        stack.captures[i] = {std::move(low), filters[i], transforms[i], i};
    }
    return stack;
}

}  // namespace ssr
