#pragma once

#include "ssr/core.hpp"
#include "ssr/operators.hpp"

#include <vector>

namespace ssr {

struct PansharpenProblem {
    std::vector<BandImage> observations;    // Y_L,i
    BandImage pan;                          // super-resolved panchromatic image
    std::vector<SparseOperator> operators;  // decimate(warp_i(.)) per aperture
    PansharpenParams params;
    VtvParams vtv;

    void validate() const;
};

struct PansharpenResult {
    MultiBandField bands;  // Y_H,1..K on the pan grid
    // Composite energy after each FISTA iteration.
    std::vector<double> energy_history;
    int iterations = 0;
    // Prox points discarded by the monotone safeguard.
    int rejected_steps = 0;
    // Largest ||A_i||^2 from power iteration; must not exceed L.
    double operator_norm_sq = 0.0;
};

// t_{j+1} = (1 + sqrt(1 + 4 t_j^2)) / 2
double fista_stepsize(double t);

// 1/2 sum_i ||A_i Y_i - Y_L,i||^2 + gamma ||grad(Y - P)||_{2,1}
double pansharpen_energy(const PansharpenProblem& problem, const MultiBandField& y);

PansharpenResult pansharpen(const PansharpenProblem& problem);

}  // namespace ssr
