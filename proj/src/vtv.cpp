#include "ssr/vtv.hpp"

#include "ssr/operators.hpp"

#include <cmath>

namespace ssr {

namespace {

using Index = std::ptrdiff_t;

void field_divergence(const MultiBandField& px, const MultiBandField& py, MultiBandField& out) {
    const Index bands = static_cast<Index>(px.bands);
#pragma omp parallel for schedule(static)
    for (Index b = 0; b < bands; ++b) {
        const auto k = static_cast<std::size_t>(b);
        divergence_plane(px.band(k), py.band(k), px.height, px.width, out.band(k));
    }
}

// z = b + gamma * div p
void primal_from_dual(const MultiBandField& b, double gamma, const MultiBandField& div,
                      MultiBandField& z) {
    for (std::size_t i = 0; i < z.data.size(); ++i) z.data[i] = b.data[i] + gamma * div.data[i];
}

}  // namespace

double vtv_norm(const MultiBandField& z) {
    const std::size_t n = z.plane_size();
    std::vector<double> sq(n, 0.0);
    std::vector<double> gx(n);
    std::vector<double> gy(n);
    for (std::size_t b = 0; b < z.bands; ++b) {
        gradient_plane(z.band(b), z.height, z.width, gx, gy);
        for (std::size_t i = 0; i < n; ++i) sq[i] += gx[i] * gx[i] + gy[i] * gy[i];
    }
    double total = 0.0;
    for (double v : sq) total += std::sqrt(v);
    return total;
}

double vtv_objective(const MultiBandField& z, const MultiBandField& b, double gamma) {
    double fit = 0.0;
    for (std::size_t i = 0; i < z.data.size(); ++i) {
        const double d = z.data[i] - b.data[i];
        fit += d * d;
    }
    return 0.5 * fit + gamma * vtv_norm(z);
}

MultiBandField vtv_denoise(const MultiBandField& b, double gamma, const VtvParams& params,
                           VtvDual* warm, std::vector<double>* objective_trace) {
    if (b.bands == 0 || b.height == 0 || b.width == 0 || b.data.size() != b.bands * b.plane_size()) {
        throw Error("vtv_denoise: malformed field");
    }
    if (!(gamma >= 0.0)) {
        throw Error("vtv_denoise: gamma must be non-negative");
    }
    if (params.inner_iters < 1 || !(params.dual_step > 0.0) || params.dual_step > 0.125) {
        throw Error("vtv_denoise: need inner_iters >= 1 and dual step in (0, 1/8]");
    }
    if (gamma == 0.0) {
        return b;
    }

    VtvDual local;
    VtvDual& dual = warm ? *warm : local;
    if (!dual.matches(b)) {
        dual.px = MultiBandField(b.bands, b.height, b.width, 0.0);
        dual.py = MultiBandField(b.bands, b.height, b.width, 0.0);
    }

    const std::size_t n = b.plane_size();
    const double inv_gamma = 1.0 / gamma;
    const double tau = params.dual_step;
    MultiBandField div(b.bands, b.height, b.width);
    MultiBandField gx(b.bands, b.height, b.width);
    MultiBandField gy(b.bands, b.height, b.width);
    MultiBandField z(b.bands, b.height, b.width);

    for (int it = 0; it < params.inner_iters; ++it) {
        field_divergence(dual.px, dual.py, div);
        const Index bands = static_cast<Index>(b.bands);
#pragma omp parallel for schedule(static)
        for (Index bi = 0; bi < bands; ++bi) {
            const auto k = static_cast<std::size_t>(bi);
            auto d = div.band(k);
            auto src = b.band(k);
            for (std::size_t i = 0; i < n; ++i) d[i] += src[i] * inv_gamma;
            gradient_plane(d, b.height, b.width, gx.band(k), gy.band(k));
        }
        const Index pixels = static_cast<Index>(n);
#pragma omp parallel for schedule(static)
        for (Index pi = 0; pi < pixels; ++pi) {
            const auto i = static_cast<std::size_t>(pi);
            double sq = 0.0;
            for (std::size_t k = 0; k < b.bands; ++k) {
                const std::size_t j = k * n + i;
                const double ux = dual.px.data[j] + tau * gx.data[j];
                const double uy = dual.py.data[j] + tau * gy.data[j];
                dual.px.data[j] = ux;
                dual.py.data[j] = uy;
                sq += ux * ux + uy * uy;
            }
            if (sq > 1.0) {
                const double s = 1.0 / std::sqrt(sq);
                for (std::size_t k = 0; k < b.bands; ++k) {
                    const std::size_t j = k * n + i;
                    dual.px.data[j] *= s;
                    dual.py.data[j] *= s;
                }
            }
        }
        if (objective_trace) {
            field_divergence(dual.px, dual.py, div);
            primal_from_dual(b, gamma, div, z);
            objective_trace->push_back(vtv_objective(z, b, gamma));
        }
    }
    field_divergence(dual.px, dual.py, div);
    primal_from_dual(b, gamma, div, z);
    return z;
}

}  // namespace ssr
