#pragma once

#include "ssr/core.hpp"
#include "ssr/operators.hpp"
#include "ssr/simulate.hpp"

#include <span>
#include <vector>

namespace ssr {

inline constexpr double kMasrFloor = 1e-8;

struct MasrResult {
    BandImage estimate;
    // ||G x_n - Y_L||^2 for n = 0 (initial estimate) .. n_iters.
    std::vector<double> fidelity_history;
};

// Bilinear upsample of the mean of the inverse-warped low-resolution captures.
BandImage masr_initial_estimate(const ApertureStack& stack);

double masr_fidelity(const SparseOperator& g, std::span<const double> estimate,
                     std::span<const double> observations);

// Multiplicative maximum-likelihood (Richardson-Lucy) update
//   x <- x * G^T (y / G x) / G^T 1
// with every denominator floored at kMasrFloor and the iterate kept >= kMasrFloor.
MasrResult ml_superresolve(const ApertureStack& stack, const SparseOperator& g, int n_iters);

// Same iteration from an explicit starting image.
MasrResult ml_superresolve(std::span<const double> observations, const SparseOperator& g,
                           BandImage initial, int n_iters);

}  // namespace ssr
