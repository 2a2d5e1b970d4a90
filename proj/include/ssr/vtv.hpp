#pragma once

#include "ssr/core.hpp"

#include <vector>

namespace ssr {

// Dual field of the vector-TV problem: one (horizontal, vertical) pair per band.
struct VtvDual {
    MultiBandField px;
    MultiBandField py;

    bool matches(const MultiBandField& f) const {
        return px.bands == f.bands && px.height == f.height && px.width == f.width;
    }
};

// sum over pixels of sqrt(sum over bands of (grad_x)^2 + (grad_y)^2).
double vtv_norm(const MultiBandField& z);
double vtv_objective(const MultiBandField& z, const MultiBandField& b, double gamma);

// argmin_Z 1/2 ||Z - B||^2 + gamma ||grad Z||_{2,1} by projected dual ascent
// (Chambolle) with all bands coupled through the per-pixel group norm.
// `warm` (optional) seeds and receives the dual; `objective_trace` (optional)
// receives the primal objective after every dual iteration.
MultiBandField vtv_denoise(const MultiBandField& b, double gamma, const VtvParams& params,
                           VtvDual* warm = nullptr, std::vector<double>* objective_trace = nullptr);

}  // namespace ssr
