#pragma once

#include "ssr/config.hpp"
#include "ssr/core.hpp"
#include "ssr/dictionary.hpp"
#include "ssr/masr.hpp"
#include "ssr/metrics.hpp"
#include "ssr/pansharpen.hpp"
#include "ssr/simulate.hpp"
#include "ssr/specrecon.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace ssr {

// Wall-clock seconds per stage.
struct StageTimings {
    double load = 0.0;
    double simulate = 0.0;
    double masr = 0.0;
    double pansharpen = 0.0;
    double dictionary = 0.0;
    double specrecon = 0.0;
    double metrics = 0.0;
    double total = 0.0;
};

struct ReconstructionOutput {
    MasrResult masr;
    PansharpenResult pansharpened;
    SpecreconResult spectral;
    StageTimings timings;  // masr, pansharpen, specrecon only
};

// Super-resolve the pan aperture from all captures, pan-sharpen every
// aperture, then recover the cube with `dict`.
ReconstructionOutput reconstruct_stack(const ApertureStack& stack, const Dictionary& dict,
                                       std::size_t pan_index, const SsrParams& params,
                                       DecimationKernel kernel = DecimationKernel::BoxAverage);

// Per-pixel spectra (columns) on a `stride` grid, skipping all-zero spectra.
Eigen::MatrixXd sample_spectra(const SpectralCube& cube, std::size_t stride);
// Concatenates and, above `max_samples`, keeps a seeded random subset.
Eigen::MatrixXd merge_samples(const std::vector<Eigen::MatrixXd>& parts, std::size_t max_samples,
                              std::uint64_t seed);

// 64-bit FNV-1a over the dictionary training inputs.
std::uint64_t dictionary_cache_key(const std::vector<std::string>& scenes, int sparsity, int iterations,
                                   std::size_t stride, std::size_t max_samples, std::size_t atoms,
                                   std::uint64_t seed, std::size_t q_bands);

struct SceneOutcome {
    std::string scene;
    QualityReport report;
    SpectralCube reconstruction;
    StageTimings timings;
    std::vector<double> masr_fidelity;
    std::vector<double> pansharpen_energy;
    AdmmTrace admm;
};

struct PipelineResult {
    std::vector<SceneOutcome> scenes;
    double total_seconds = 0.0;
};

// simulate -> super-resolve -> pan-sharpen -> dictionary -> reconstruct ->
// evaluate, for every configured scene. Writes outputs under
// config.output_dir when it is non-empty. Progress lines go to `log`.
PipelineResult run_pipeline(const PipelineConfig& config, std::ostream* log = nullptr);

}  // namespace ssr
