#include "ssr/specrecon.hpp"

#include "ssr/vtv.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>

namespace ssr {

namespace {

using Index = Eigen::Index;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using BandMap = Eigen::Map<RowMatrix>;
using ConstBandMap = Eigen::Map<const RowMatrix>;

// Fixed chunking keeps every pixel's arithmetic independent of the worker count.
constexpr Index kChunk = 1024;

double soft(double x, double tau) {
    if (x > tau) return x - tau;
    if (x < -tau) return x + tau;
    return 0.0;
}

}  // namespace

StackedResponse StackedResponse::from_raw(const FilterBank& raw, MultiBandField observations,
                                          std::vector<double> wavelengths_nm) {
    StackedResponse s{raw.normalized(), std::move(observations), std::move(wavelengths_nm)};
    s.validate();
    return s;
}

void StackedResponse::validate() const {
    transmittance.validate();
    if (transmittance.apertures() != observations.bands) {
        throw Error("StackedResponse: transmittance rows do not match observation bands");
    }
    if (transmittance.q_bands() != wavelengths_nm.size()) {
        throw Error("StackedResponse: transmittance length does not match wavelength grid");
    }
    if (observations.data.size() != observations.bands * observations.plane_size()) {
        throw Error("StackedResponse: malformed observation block");
    }
}

std::vector<double> soft_threshold(std::span<const double> x, double tau) {
    if (!(tau >= 0.0)) {
        throw Error("soft_threshold: tau must be non-negative");
    }
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = soft(x[i], tau);
    return out;
}

SpecreconResult spectral_reconstruct(const StackedResponse& obs, const Dictionary& dict,
                                     const BandImage& pan, const SsrParams& params) {
    obs.validate();
    dict.validate();
    params.validate();
    const auto& sp = params.specrecon;
    const Index q = static_cast<Index>(obs.wavelengths_nm.size());
    const Index k_ap = static_cast<Index>(obs.transmittance.apertures());
    const Index n_atoms = static_cast<Index>(dict.n_atoms());
    const std::size_t h = obs.observations.height;
    const std::size_t w = obs.observations.width;
    const Index npix = static_cast<Index>(h * w);
    if (static_cast<Index>(dict.q()) != q) {
        throw Error("spectral_reconstruct: dictionary length does not match the band count");
    }
    if (pan.height != h || pan.width != w) {
        throw Error("spectral_reconstruct: pan image does not match the observation grid");
    }

    Eigen::MatrixXd t(k_ap, q);
    for (Index i = 0; i < k_ap; ++i) {
        for (Index b = 0; b < q; ++b) {
            t(i, b) = obs.transmittance.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(b)];
        }
    }
    const Eigen::MatrixXd& d = dict.atoms;
    const Eigen::MatrixXd td = t * d;
    const Eigen::MatrixXd dt = d.transpose();
    const Eigen::MatrixXd dtt = td.transpose();  // D^T T^T
    const Eigen::MatrixXd system = td.transpose() * td +
                                   sp.rho1 * Eigen::MatrixXd::Identity(n_atoms, n_atoms) +
                                   sp.rho2 * (dt * d);
    const Eigen::LLT<Eigen::MatrixXd> llt(system);
    const Eigen::VectorXd pivots = Eigen::MatrixXd(llt.matrixL()).diagonal();
    if (llt.info() != Eigen::Success || !(pivots.minCoeff() > 1e-7 * pivots.maxCoeff())) {
        throw Error("spectral_reconstruct: theta system is not positive definite; check rho1/rho2");
    }

    Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(n_atoms, npix);
    Eigen::MatrixXd z1 = Eigen::MatrixXd::Zero(n_atoms, npix);
    Eigen::MatrixXd v1 = Eigen::MatrixXd::Zero(n_atoms, npix);
    MultiBandField x(static_cast<std::size_t>(q), h, w);
    MultiBandField z2(static_cast<std::size_t>(q), h, w);
    MultiBandField v2(static_cast<std::size_t>(q), h, w);
    MultiBandField tv_in(static_cast<std::size_t>(q), h, w);

    ConstBandMap y_map(obs.observations.data.data(), k_ap, npix);
    BandMap x_map(x.data.data(), q, npix);
    ConstBandMap z2_map(z2.data.data(), q, npix);
    ConstBandMap v2_map(v2.data.data(), q, npix);

    const Index n_chunks = (npix + kChunk - 1) / kChunk;
    std::vector<double> chunk_r1(static_cast<std::size_t>(n_chunks));
    std::vector<std::size_t> chunk_zeros(static_cast<std::size_t>(n_chunks));
    const double thresh = sp.eta / sp.rho1;
    const double tv_weight = sp.eta_tv / sp.rho2;
    const std::size_t plane = h * w;
    VtvDual dual;

    SpecreconResult result;
    for (int k = 0; k < sp.iter_max; ++k) {
#pragma omp parallel for schedule(static)
        for (Index c = 0; c < n_chunks; ++c) {
            const Index c0 = c * kChunk;
            const Index cn = std::min(kChunk, npix - c0);
            Eigen::MatrixXd rhs = dtt * y_map.middleCols(c0, cn);
            rhs += sp.rho1 * z1.middleCols(c0, cn) - v1.middleCols(c0, cn);
            rhs += dt * (sp.rho2 * z2_map.middleCols(c0, cn) - v2_map.middleCols(c0, cn));
            theta.middleCols(c0, cn) = llt.solve(rhs);
            x_map.middleCols(c0, cn) = d * theta.middleCols(c0, cn);

            double r1 = 0.0;
            std::size_t zeros = 0;
            for (Index j = c0; j < c0 + cn; ++j) {
                for (Index a = 0; a < n_atoms; ++a) {
                    const double th = theta(a, j);
                    const double zv = soft(th + v1(a, j) / sp.rho1, thresh);
                    z1(a, j) = zv;
                    v1(a, j) += sp.rho1 * (th - zv);
                    r1 += (th - zv) * (th - zv);
                    zeros += zv == 0.0 ? 1 : 0;
                }
            }
            chunk_r1[static_cast<std::size_t>(c)] = r1;
            chunk_zeros[static_cast<std::size_t>(c)] = zeros;
        }

        // Z2 = P_Q + prox_{eta_tv/rho2 * VTV}(D theta + V2/rho2 - P_Q)
        for (std::size_t b = 0; b < tv_in.bands; ++b) {
            auto xin = x.band(b);
            auto vin = v2.band(b);
            auto out = tv_in.band(b);
            for (std::size_t i = 0; i < plane; ++i) out[i] = xin[i] + vin[i] / sp.rho2 - pan.data[i];
        }
        const MultiBandField zq =
            vtv_denoise(tv_in, tv_weight, params.vtv, params.vtv.warm_start ? &dual : nullptr);
        double r2 = 0.0;
        for (std::size_t b = 0; b < z2.bands; ++b) {
            auto zin = zq.band(b);
            auto zout = z2.band(b);
            auto xin = x.band(b);
            auto vio = v2.band(b);
            for (std::size_t i = 0; i < plane; ++i) {
                zout[i] = zin[i] + pan.data[i];
                const double diff = xin[i] - zout[i];
                vio[i] += sp.rho2 * diff;
                r2 += diff * diff;
            }
        }

        double r1 = 0.0;
        std::size_t zeros = 0;
        for (std::size_t c = 0; c < chunk_r1.size(); ++c) {
            r1 += chunk_r1[c];
            zeros += chunk_zeros[c];
        }
        result.trace.theta_z1_residual.push_back(std::sqrt(r1));
        result.trace.x_z2_residual.push_back(std::sqrt(r2));
        result.trace.z1_zero_fraction.push_back(static_cast<double>(zeros) /
                                                static_cast<double>(n_atoms * npix));
    }

    result.raw = std::move(x);
    result.cube = SpectralCube::from_field_clamped(obs.wavelengths_nm, result.raw);
    return result;
}

}  // namespace ssr
