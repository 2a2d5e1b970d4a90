#pragma once

#include "ssr/core.hpp"
#include "ssr/operators.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ssr {

enum class TransformMode {
    Lattice,   // 3x3 integer lattice plus seeded jitter
    Explicit,  // dx/dy/rotation given per aperture
};

// Experiment description. The text form is INI: [section] headers with
// key = value lines, one [apertureN] section per aperture.
struct PipelineConfig {
    // [dataset] path empty selects seeded synthetic scenes.
    std::filesystem::path dataset_path;
    std::vector<std::string> scenes;

    // [synthetic]
    std::size_t synthetic_height = 64;
    std::size_t synthetic_width = 64;
    std::size_t synthetic_training_scenes = 4;

    // [camera]
    std::size_t r = 3;
    std::size_t pan_index = 4;
    std::vector<double> wavelengths_nm;
    DecimationKernel kernel = DecimationKernel::BoxAverage;

    // [apertureN]
    std::vector<NotchFilter> filters;
    std::vector<GeometricTransform> transforms;  // Explicit mode only

    // [transforms]
    TransformMode transform_mode = TransformMode::Lattice;
    double jitter = 0.1;

    // [masr] [pansharpen] [specrecon] [vtv]
    SsrParams params;

    // [dictionary] path loads a trained dictionary instead of training one.
    std::filesystem::path dictionary_path;
    std::filesystem::path dictionary_cache_dir;
    int dict_sparsity = 8;
    int dict_iterations = 30;
    std::size_t dict_stride = 4;
    std::size_t dict_max_samples = 20000;
    std::size_t dict_atoms = 0;  // 0 selects 2Q
    // Empty: every other dataset scene (leave-one-out).
    std::vector<std::string> dict_train_scenes;

    // [run]
    std::filesystem::path output_dir = "ssr_out";
    std::uint64_t seed = 0;
    double noise_sigma = 0.0;
    std::size_t crop = 510;
    bool write_images = true;

    PipelineConfig();

    std::size_t k_apertures() const { return filters.size(); }
    // Transforms for a scene: explicit list, or the seeded lattice.
    std::vector<GeometricTransform> scene_transforms(std::uint64_t scene_seed) const;
    void validate() const;
};

// "400:10:700" or a comma-separated list.
std::vector<double> parse_wavelengths(const std::string& text);

PipelineConfig parse_config(const std::string& text);
PipelineConfig load_config(const std::filesystem::path& path);
std::string to_text(const PipelineConfig& config);

}  // namespace ssr
