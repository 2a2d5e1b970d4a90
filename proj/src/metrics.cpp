#include "ssr/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>

namespace ssr {

namespace {

constexpr double kPeak = 255.0;
constexpr int kRadius = 5;

void check_shapes(const SpectralCube& a, const SpectralCube& b) {
    if (a.q_bands() != b.q_bands() || a.height() != b.height() || a.width() != b.width()) {
        throw Error("metrics: cube shapes differ");
    }
}

std::array<double, 2 * kRadius + 1> gaussian_taps() {
    std::array<double, 2 * kRadius + 1> g{};
    double s = 0.0;
    for (int i = -kRadius; i <= kRadius; ++i) {
        g[static_cast<std::size_t>(i + kRadius)] = std::exp(-(i * i) / (2.0 * 1.5 * 1.5));
        s += g[static_cast<std::size_t>(i + kRadius)];
    }
    for (double& v : g) v /= s;
    return g;
}

}  // namespace

double rmse_8bit(const SpectralCube& a, const SpectralCube& b) {
    check_shapes(a, b);
    double acc = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) {
        const double d = kPeak * (a.data()[i] - b.data()[i]);
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(a.data().size()));
}

double band_psnr_db(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = kPeak * (a[i] - b[i]);
        acc += d * d;
    }
    const double mse = acc / static_cast<double>(a.size());
    if (mse == 0.0) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(kPeak * kPeak / mse));
}

double psnr_db(const SpectralCube& a, const SpectralCube& b) {
    check_shapes(a, b);
    double s = 0.0;
    for (std::size_t q = 0; q < a.q_bands(); ++q) s += band_psnr_db(a.band(q), b.band(q));
    return s / static_cast<double>(a.q_bands());
}

double band_ssim(std::span<const double> a, std::span<const double> b, std::size_t h, std::size_t w) {
    static const auto g = gaussian_taps();
    const double c1 = (0.01 * kPeak) * (0.01 * kPeak);
    const double c2 = (0.03 * kPeak) * (0.03 * kPeak);
    const auto hi = static_cast<std::ptrdiff_t>(h);
    const auto wi = static_cast<std::ptrdiff_t>(w);
    double total = 0.0;
    for (std::ptrdiff_t y = 0; y < hi; ++y) {
        for (std::ptrdiff_t x = 0; x < wi; ++x) {
            double ws = 0.0, ma = 0.0, mb = 0.0, saa = 0.0, sbb = 0.0, sab = 0.0;
            for (int dy = -kRadius; dy <= kRadius; ++dy) {
                const std::ptrdiff_t yy = y + dy;
                if (yy < 0 || yy >= hi) continue;
                for (int dx = -kRadius; dx <= kRadius; ++dx) {
                    const std::ptrdiff_t xx = x + dx;
                    if (xx < 0 || xx >= wi) continue;
                    const double wt = g[static_cast<std::size_t>(dy + kRadius)] *
                                      g[static_cast<std::size_t>(dx + kRadius)];
                    const auto idx = static_cast<std::size_t>(yy * wi + xx);
                    const double va = kPeak * a[idx];
                    const double vb = kPeak * b[idx];
                    ws += wt;
                    ma += wt * va;
                    mb += wt * vb;
                    saa += wt * va * va;
                    sbb += wt * vb * vb;
                    sab += wt * va * vb;
                }
            }
            ma /= ws;
            mb /= ws;
            const double va = saa / ws - ma * ma;
            const double vb = sbb / ws - mb * mb;
            const double cov = sab / ws - ma * mb;
            total += ((2 * ma * mb + c1) * (2 * cov + c2)) /
                     ((ma * ma + mb * mb + c1) * (va + vb + c2));
        }
    }
    return total / static_cast<double>(h * w);
}

double ssim(const SpectralCube& a, const SpectralCube& b) {
    check_shapes(a, b);
    double s = 0.0;
    for (std::size_t q = 0; q < a.q_bands(); ++q) {
        s += band_ssim(a.band(q), b.band(q), a.height(), a.width());
    }
    return s / static_cast<double>(a.q_bands());
}

SamResult sam(const SpectralCube& a, const SpectralCube& b) {
    check_shapes(a, b);
    const std::size_t n = a.plane_size();
    SamResult r;
    double total = 0.0;
    std::size_t counted = 0;
    for (std::size_t p = 0; p < n; ++p) {
        double na = 0.0, nb = 0.0;
        for (std::size_t q = 0; q < a.q_bands(); ++q) {
            const double va = a.data()[q * n + p];
            const double vb = b.data()[q * n + p];
            na += va * va;
            nb += vb * vb;
        }
        if (na == 0.0 || nb == 0.0) {
            ++r.skipped_pixels;
            continue;
        }
        // 2 atan2(|u - v|, |u + v|) for unit u, v: exact zero for parallel spectra,
        // no loss of precision near 0 or pi.
        const double sa = std::sqrt(na);
        const double sb = std::sqrt(nb);
        double dm = 0.0, dp = 0.0;
        for (std::size_t q = 0; q < a.q_bands(); ++q) {
            const double u = a.data()[q * n + p] / sa;
            const double v = b.data()[q * n + p] / sb;
            dm += (u - v) * (u - v);
            dp += (u + v) * (u + v);
        }
        total += 2.0 * std::atan2(std::sqrt(dm), std::sqrt(dp));
        ++counted;
    }
    r.mean_radians = counted ? total / static_cast<double>(counted) : 0.0;
    return r;
}

double sam_radians(const SpectralCube& a, const SpectralCube& b) {
    return sam(a, b).mean_radians;
}

QualityReport evaluate(const SpectralCube& reference, const SpectralCube& estimate,
                       const std::string& scene) {
    check_shapes(reference, estimate);
    QualityReport rep;
    rep.scene = scene;
    const std::size_t nq = reference.q_bands();
    for (std::size_t q = 0; q < nq; ++q) {
        const auto ra = reference.band(q);
        const auto eb = estimate.band(q);
        rep.psnr_db.push_back(band_psnr_db(ra, eb));
        rep.ssim.push_back(band_ssim(ra, eb, reference.height(), reference.width()));
        double acc = 0.0;
        for (std::size_t i = 0; i < ra.size(); ++i) {
            const double d = kPeak * (ra[i] - eb[i]);
            acc += d * d;
        }
        rep.rmse_8bit.push_back(std::sqrt(acc / static_cast<double>(ra.size())));
    }
    for (std::size_t q = 0; q < nq; ++q) {
        rep.mean_psnr_db += rep.psnr_db[q] / static_cast<double>(nq);
        rep.mean_ssim += rep.ssim[q] / static_cast<double>(nq);
    }
    rep.rmse_8bit_global = rmse_8bit(reference, estimate);
    const SamResult s = sam(reference, estimate);
    rep.sam_radians = s.mean_radians;
    rep.sam_skipped = s.skipped_pixels;
    return rep;
}

std::string format_report(const QualityReport& report) {
    std::ostringstream os;
    os << std::setprecision(10);
    const std::string& s = report.scene;
    os << s << ".rmse_8bit = " << report.rmse_8bit_global << "\n";
    os << s << ".sam_radians = " << report.sam_radians << "\n";
    os << s << ".sam_skipped_pixels = " << report.sam_skipped << "\n";
    os << s << ".psnr_db = " << report.mean_psnr_db << "\n";
    os << s << ".ssim = " << report.mean_ssim << "\n";
    for (std::size_t q = 0; q < report.psnr_db.size(); ++q) {
        os << s << ".band" << q << ".psnr_db = " << report.psnr_db[q] << "\n";
        os << s << ".band" << q << ".ssim = " << report.ssim[q] << "\n";
        os << s << ".band" << q << ".rmse_8bit = " << report.rmse_8bit[q] << "\n";
    }
    return os.str();
}

BandImage error_map(std::span<const double> a, std::span<const double> b, std::size_t h,
                    std::size_t w, double gain) {
    if (a.size() != h * w || b.size() != h * w) {
        throw Error("error_map: shape mismatch");
    }
    BandImage out(h, w);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.data[i] = std::clamp(gain * std::abs(a[i] - b[i]), 0.0, 1.0);
    }
    return out;
}

}  // namespace ssr
