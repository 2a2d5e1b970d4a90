#include "ssr/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace ssr {

namespace {

// Sum of a floor, up to three Gaussian bumps and a logistic edge, scaled to
// peak at `peak`.
std::vector<double> smooth_spectrum(std::span<const double> wl, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double lo = wl.front();
    const double hi = wl.back();
    std::vector<double> s(wl.size(), 0.05 + 0.2 * u(rng));
    const int bumps = static_cast<int>(u(rng) * 3.0);
    for (int j = 0; j < bumps; ++j) {
        const double mu = lo + (hi - lo) * u(rng);
        const double sigma = 30.0 + 60.0 * u(rng);
        const double amp = 0.3 + 0.7 * u(rng);
        for (std::size_t q = 0; q < wl.size(); ++q) {
            const double d = (wl[q] - mu) / sigma;
            s[q] += amp * std::exp(-0.5 * d * d);
        }
    }
    const double edge = lo + (hi - lo) * u(rng);
    const double rise = (u(rng) < 0.5 ? -1.0 : 1.0) * (0.5 + 0.5 * u(rng));
    for (std::size_t q = 0; q < wl.size(); ++q) {
        s[q] += rise > 0 ? rise / (1.0 + std::exp(-(wl[q] - edge) / 15.0))
                         : -rise / (1.0 + std::exp((wl[q] - edge) / 15.0));
    }
    const double peak = 0.3 + 0.6 * u(rng);
    const double mx = *std::max_element(s.begin(), s.end());
    for (double& v : s) v *= peak / mx;
    return s;
}

// Materials shared by every scene, so spectra learned on some scenes carry
// over to others.
constexpr std::uint64_t kLibrarySeed = 0x5eedf00d;
constexpr int kLibrarySize = 12;

std::vector<std::vector<double>> material_library(std::span<const double> wl) {
    std::mt19937_64 rng(kLibrarySeed);
    std::vector<std::vector<double>> lib;
    for (int i = 0; i < kLibrarySize; ++i) lib.push_back(smooth_spectrum(wl, rng));
    return lib;
}

// Convex mix of two library materials.
std::vector<double> scene_spectrum(const std::vector<std::vector<double>>& lib, std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> pick(0, lib.size() - 1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto& a = lib[pick(rng)];
    const auto& b = lib[pick(rng)];
    const double t = u(rng);
    std::vector<double> s(a.size());
    for (std::size_t q = 0; q < a.size(); ++q) s[q] = t * a[q] + (1.0 - t) * b[q];
    return s;
}

struct Region {
    bool ellipse = true;
    double cy = 0, cx = 0, ry = 0, rx = 0;
    std::vector<double> spectrum;

    bool contains(double y, double x) const {
        const double dy = (y - cy) / ry;
        const double dx = (x - cx) / rx;
        return ellipse ? dy * dy + dx * dx <= 1.0 : std::abs(dy) <= 1.0 && std::abs(dx) <= 1.0;
    }
};

}  // namespace

SpectralCube synthetic_scene(std::size_t height, std::size_t width,
                             std::span<const double> wavelengths_nm, std::uint64_t seed) {
    if (height == 0 || width == 0 || wavelengths_nm.empty()) {
        throw Error("synthetic_scene: empty shape");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double h = static_cast<double>(height);
    const double w = static_cast<double>(width);

    const auto lib = material_library(wavelengths_nm);
    const std::vector<double> background = scene_spectrum(lib, rng);
    std::vector<Region> regions(5 + static_cast<std::size_t>(u(rng) * 5.0));
    for (auto& reg : regions) {
        reg.ellipse = u(rng) < 0.6;
        reg.cy = h * u(rng);
        reg.cx = w * u(rng);
        reg.ry = h * (0.08 + 0.25 * u(rng));
        reg.rx = w * (0.08 + 0.25 * u(rng));
        reg.spectrum = scene_spectrum(lib, rng);
    }
    const double gy = u(rng) - 0.5;
    const double gx = u(rng) - 0.5;
    const double fy = 2.0 * std::numbers::pi * (0.5 + 1.5 * u(rng)) / h;
    const double fx = 2.0 * std::numbers::pi * (0.5 + 1.5 * u(rng)) / w;
    const double tex_f = 2.0 * std::numbers::pi * (0.15 + 0.1 * u(rng));

    const std::size_t q_bands = wavelengths_nm.size();
    const std::size_t plane = height * width;
    std::vector<double> data(q_bands * plane);
    for (std::size_t y = 0; y < height; ++y) {
        for (std::size_t x = 0; x < width; ++x) {
            const double yy = static_cast<double>(y) + 0.5;
            const double xx = static_cast<double>(x) + 0.5;
            const std::vector<double>* spec = &background;
            // Later regions paint over earlier ones.
            for (const auto& reg : regions) {
                if (reg.contains(yy, xx)) spec = &reg.spectrum;
            }
            const double shade = 0.8 + 0.15 * (gy * yy / h + gx * xx / w) +
                                 0.05 * std::sin(fy * yy) * std::cos(fx * xx);
            const double texture = 1.0 + 0.04 * std::sin(tex_f * xx) * std::sin(tex_f * yy);
            for (std::size_t q = 0; q < q_bands; ++q) {
                data[q * plane + y * width + x] = std::clamp((*spec)[q] * shade * texture, 0.02, 0.95);
            }
        }
    }
    return SpectralCube(std::vector<double>(wavelengths_nm.begin(), wavelengths_nm.end()), height,
                        width, std::move(data));
}

}  // namespace ssr
