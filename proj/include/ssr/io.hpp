#pragma once

#include "ssr/core.hpp"
#include "ssr/simulate.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace ssr {

// On-disk cube: "SSRC", u32 Q, u32 H, u32 W, Q f64 wavelengths, Q*H*W f32
// band-major samples; all little-endian.
struct CubeFile {
    std::vector<double> wavelengths_nm;
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<float> data;

    std::size_t q_bands() const { return wavelengths_nm.size(); }

    static CubeFile from_cube(const SpectralCube& cube);
    // Aperture-indexed fields carry 0..K-1 in the wavelength slot.
    static CubeFile from_field(const MultiBandField& field, std::vector<double> wavelengths_nm);
    SpectralCube to_cube() const;
    MultiBandField to_field() const;
};

void write_cube_file(const std::filesystem::path& path, const CubeFile& file);
CubeFile read_cube_file(const std::filesystem::path& path);

inline void write_cube(const std::filesystem::path& path, const SpectralCube& cube) {
    write_cube_file(path, CubeFile::from_cube(cube));
}
inline SpectralCube read_cube(const std::filesystem::path& path) {
    return read_cube_file(path).to_cube();
}

struct CaveLoadOptions {
    std::size_t expected_bands = 31;
    std::size_t crop = 510;  // centre crop edge; 0 keeps the full frame
    double first_wavelength_nm = 400.0;
    double wavelength_step_nm = 10.0;
};

// One grayscale image per band (8- or 16-bit), in wavelength order.
SpectralCube load_cave_scene(const std::filesystem::path& dir, const CaveLoadOptions& options = {});

// Sub-directories of `root` that hold a scene.
std::vector<std::filesystem::path> list_cave_scenes(const std::filesystem::path& root);

// 8-bit grayscale, [0,1] mapped to 0..255.
void write_png(const std::filesystem::path& path, const BandImage& img);
// 8/16-bit grayscale, rescaled to [0,1] by bit depth.
BandImage read_gray_image(const std::filesystem::path& path);

// Directory with stack.ini plus one single-band cube file per aperture.
void write_stack(const std::filesystem::path& dir, const ApertureStack& stack);
ApertureStack read_stack(const std::filesystem::path& dir);

// Whole-pixel translation d with moving(p) ~ reference(p + d), by phase
// correlation rounded to the nearest pixel.
GeometricTransform register_translation(const BandImage& reference, const BandImage& moving);

}  // namespace ssr
