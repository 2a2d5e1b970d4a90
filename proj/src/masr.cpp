#include "ssr/masr.hpp"

#include <algorithm>
#include <cmath>

namespace ssr {

BandImage masr_initial_estimate(const ApertureStack& stack) {
    stack.validate();
    const std::size_t lh = stack.low_height();
    const std::size_t lw = stack.low_width();
    const double r = static_cast<double>(stack.r);
    BandImage mean(lh, lw, 0.0);
    for (const auto& c : stack.captures) {
        // A high-res shift d is a shift of d/r on the low-res grid.
        GeometricTransform back = c.transform.inverse();
        back.dx /= r;
        back.dy /= r;
        const BandImage registered =
            back.is_identity() ? c.image : apply_operator(build_warp(back, lh, lw), c.image, lh, lw);
        for (std::size_t i = 0; i < mean.size(); ++i) mean.data[i] += registered.data[i];
    }
    for (double& v : mean.data) v /= static_cast<double>(stack.size());
    return upsample_bilinear(mean, stack.r);
}

double masr_fidelity(const SparseOperator& g, std::span<const double> estimate,
                     std::span<const double> observations) {
    const std::vector<double> pred = g.apply(estimate);
    double e = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - observations[i];
        e += d * d;
    }
    return e;
}

MasrResult ml_superresolve(std::span<const double> observations, const SparseOperator& g,
                           BandImage initial, int n_iters) {
    if (n_iters < 1) {
        throw Error("ml_superresolve: at least one iteration required");
    }
    if (observations.size() != g.n_rows() || initial.size() != g.n_cols()) {
        throw Error("ml_superresolve: observations do not match the system matrix");
    }
    for (double v : observations) {
        if (!(v >= 0.0)) {
            throw Error("ml_superresolve: observations must be non-negative");
        }
    }
    const SparseOperator gt = g.transposed();
    const std::vector<double> ones(g.n_rows(), 1.0);
    std::vector<double> norm = gt.apply(ones);
    for (double& v : norm) v = std::max(v, kMasrFloor);

    MasrResult result;
    result.estimate = std::move(initial);
    std::vector<double>& x = result.estimate.data;
    for (double& v : x) v = std::max(v, kMasrFloor);

    std::vector<double> pred(g.n_rows());
    std::vector<double> ratio(g.n_rows());
    std::vector<double> back(g.n_cols());
    result.fidelity_history.reserve(static_cast<std::size_t>(n_iters) + 1);
    for (int it = 0; it < n_iters; ++it) {
        g.apply(x, pred);
        double e = 0.0;
        for (std::size_t i = 0; i < pred.size(); ++i) {
            const double d = pred[i] - observations[i];
            e += d * d;
            ratio[i] = observations[i] / std::max(pred[i], kMasrFloor);
        }
        result.fidelity_history.push_back(e);
        gt.apply(ratio, back);
        for (std::size_t j = 0; j < x.size(); ++j) {
            x[j] = std::max(x[j] * back[j] / norm[j], kMasrFloor);
        }
    }
    result.fidelity_history.push_back(masr_fidelity(g, x, observations));
    return result;
}

MasrResult ml_superresolve(const ApertureStack& stack, const SparseOperator& g, int n_iters) {
    stack.validate();
    if (g.n_cols() != stack.high_height() * stack.high_width()) {
        throw Error("ml_superresolve: system matrix does not match the high-resolution grid");
    }
    const std::vector<double> y = stack.concatenated();
    return ml_superresolve(y, g, masr_initial_estimate(stack), n_iters);
}

}  // namespace ssr
