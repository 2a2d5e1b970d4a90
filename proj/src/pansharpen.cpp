#include "ssr/pansharpen.hpp"

#include "ssr/vtv.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ssr {

namespace {

using Index = std::ptrdiff_t;

MultiBandField replicate(const BandImage& img, std::size_t bands) {
    MultiBandField f(bands, img.height, img.width);
    for (std::size_t b = 0; b < bands; ++b) f.set_band(b, img);
    return f;
}

}  // namespace

void PansharpenProblem::validate() const {
    if (observations.empty() || observations.size() != operators.size()) {
        throw Error("pansharpen: need one operator per observation");
    }
    const std::size_t n_high = pan.height * pan.width;
    for (std::size_t i = 0; i < observations.size(); ++i) {
        if (operators[i].n_cols() != n_high) {
            std::ostringstream os;
            os << "pansharpen: operator " << i << " does not act on the pan grid";
            throw Error(os.str());
        }
        if (operators[i].n_rows() != observations[i].size()) {
            std::ostringstream os;
            os << "pansharpen: observation " << i << " does not match its operator";
            throw Error(os.str());
        }
        if (observations[i].height != observations.front().height ||
            observations[i].width != observations.front().width) {
            throw Error("pansharpen: observations differ in shape");
        }
    }
    if (pan.height % observations.front().height != 0 ||
        pan.height / observations.front().height != pan.width / observations.front().width) {
        throw Error("pansharpen: pan grid is not an integer multiple of the observations");
    }
    if (!(params.lipschitz > 0.0) || params.t1 < 1.0 || params.iter_max < 1 || params.gamma < 0.0) {
        throw Error("pansharpen: invalid parameters");
    }
}

double fista_stepsize(double t) {
    return (1.0 + std::sqrt(1.0 + 4.0 * t * t)) / 2.0;
}

double pansharpen_energy(const PansharpenProblem& problem, const MultiBandField& y) {
    double fit = 0.0;
    for (std::size_t i = 0; i < problem.observations.size(); ++i) {
        const std::vector<double> pred = problem.operators[i].apply(y.band(i));
        const auto& obs = problem.observations[i].data;
        for (std::size_t k = 0; k < pred.size(); ++k) {
            const double d = pred[k] - obs[k];
            fit += d * d;
        }
    }
    MultiBandField diff = y;
    for (std::size_t b = 0; b < diff.bands; ++b) {
        auto plane = diff.band(b);
        for (std::size_t k = 0; k < plane.size(); ++k) plane[k] -= problem.pan.data[k];
    }
    return 0.5 * fit + problem.params.gamma * vtv_norm(diff);
}

PansharpenResult pansharpen(const PansharpenProblem& problem) {
    problem.validate();
    const auto& prm = problem.params;
    const std::size_t k_ap = problem.observations.size();
    const std::size_t h = problem.pan.height;
    const std::size_t w = problem.pan.width;
    const std::size_t r = h / problem.observations.front().height;

    PansharpenResult result;
    std::vector<SparseOperator> adjoints;
    adjoints.reserve(k_ap);
    for (const auto& a : problem.operators) {
        adjoints.push_back(a.transposed());
        result.operator_norm_sq = std::max(result.operator_norm_sq, operator_norm_squared(a, 20));
    }
    if (result.operator_norm_sq > prm.lipschitz * (1.0 + 1e-9)) {
        std::ostringstream os;
        os << "pansharpen: L=" << prm.lipschitz << " is below the operator norm "
           << result.operator_norm_sq;
        throw Error(os.str());
    }

    const MultiBandField p = replicate(problem.pan, k_ap);
    MultiBandField y_prev(k_ap, h, w);
    for (std::size_t i = 0; i < k_ap; ++i) {
        y_prev.set_band(i, upsample_bilinear(problem.observations[i], r));
    }
    MultiBandField extrap = y_prev;
    MultiBandField y(k_ap, h, w);
    MultiBandField shifted(k_ap, h, w);
    VtvDual dual;
    double t = prm.t1;
    double e_prev = 0.0;
    const double step = 1.0 / prm.lipschitz;

    for (int j = 0; j < prm.iter_max; ++j) {
        // Gradient step on the spectral-fidelity term, minus P.
        const Index bands = static_cast<Index>(k_ap);
        for (Index bi = 0; bi < bands; ++bi) {
            const auto i = static_cast<std::size_t>(bi);
            std::vector<double> resid = problem.operators[i].apply(extrap.band(i));
            const auto& obs = problem.observations[i].data;
            for (std::size_t k = 0; k < resid.size(); ++k) resid[k] -= obs[k];
            const std::vector<double> grad = adjoints[i].apply(resid);
            auto src = extrap.band(i);
            auto dst = shifted.band(i);
            auto pp = p.band(i);
            for (std::size_t k = 0; k < dst.size(); ++k) dst[k] = src[k] - step * grad[k] - pp[k];
        }
        VtvDual* warm = problem.vtv.warm_start ? &dual : nullptr;
        MultiBandField z = vtv_denoise(shifted, prm.gamma * step, problem.vtv, warm);
        for (std::size_t k = 0; k < y.data.size(); ++k) y.data[k] = z.data[k] + p.data[k];

        double change = 0.0;
        double ref = 0.0;
        for (std::size_t k = 0; k < y.data.size(); ++k) {
            const double d = y.data[k] - y_prev.data[k];
            change += d * d;
            ref += y_prev.data[k] * y_prev.data[k];
        }
        const double e_new = pansharpen_energy(problem, y);
        if (j == 0) e_prev = pansharpen_energy(problem, y_prev);
        // y now holds the prox point; x is the accepted iterate.
        const bool accept = !prm.monotone || e_new <= e_prev;
        if (!accept) ++result.rejected_steps;
        const MultiBandField& x = accept ? y : y_prev;
        const double e_x = accept ? e_new : e_prev;
        result.energy_history.push_back(e_x);
        result.iterations = j + 1;

        if (prm.momentum) {
            const double t_next = fista_stepsize(t);
            const double a = t / t_next;
            const double beta = (t - 1.0) / t_next;
            for (std::size_t k = 0; k < y.data.size(); ++k) {
                extrap.data[k] = x.data[k] + a * (y.data[k] - x.data[k]) + beta * (x.data[k] - y_prev.data[k]);
            }
            t = t_next;
        } else {
            extrap = x;
        }
        if (accept) std::swap(y_prev, y);
        e_prev = e_x;
        if (ref > 0.0 && std::sqrt(change / ref) < prm.rel_tol) {
            break;
        }
    }
    result.bands = std::move(y_prev);
    return result;
}

}  // namespace ssr
