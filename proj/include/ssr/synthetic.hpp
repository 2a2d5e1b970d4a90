#pragma once

#include "ssr/core.hpp"

#include <cstdint>
#include <span>

namespace ssr {

// Seeded piecewise-smooth test scene: a few ellipses and rectangles over a
// background. Each region's spectrum mixes two materials from a fixed library
// common to all seeds. Slowly varying shading and a faint texture are applied
// on top. Values stay within [0.02, 0.95].
SpectralCube synthetic_scene(std::size_t height, std::size_t width,
                             std::span<const double> wavelengths_nm, std::uint64_t seed);

}  // namespace ssr
