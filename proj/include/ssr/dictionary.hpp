#pragma once

#include "ssr/core.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ssr {

// Q x n_atoms spectral dictionary with unit-norm columns.
struct Dictionary {
    Eigen::MatrixXd atoms;
    std::vector<std::string> source_scenes;
    int sparsity = 0;
    int iterations = 0;

    std::size_t q() const { return static_cast<std::size_t>(atoms.rows()); }
    std::size_t n_atoms() const { return static_cast<std::size_t>(atoms.cols()); }
    void validate() const;
    // Largest |<d_i, d_j>| over distinct atoms.
    double max_coherence() const;
};

// Orthogonal matching pursuit with at most `sparsity` atoms, using the
// precomputed Gram matrix and D^T x (batch OMP). Atoms must be unit norm.
Eigen::VectorXd omp_code(const Eigen::MatrixXd& gram, const Eigen::VectorXd& dtx, int sparsity);

// Codes every column of `signals`; columns are independent.
Eigen::MatrixXd omp_batch(const Eigen::MatrixXd& dict, const Eigen::MatrixXd& signals, int sparsity);

struct KsvdOptions {
    std::size_t n_atoms = 0;  // 0 selects 2Q
    int sparsity = 8;
    int iterations = 30;
    std::uint64_t seed = 0;
    // Receives ||X - D Theta||_F after each iteration's atom updates.
    std::vector<double>* error_trace = nullptr;
};

// K-SVD on the columns of `spectra` (Q x N).
Dictionary train_dictionary(const Eigen::MatrixXd& spectra, const KsvdOptions& options);

// "SSRD" blob: magic, u32 Q, u32 n_atoms, atoms column-major as f64, little-endian.
void write_dictionary(const std::filesystem::path& path, const Dictionary& dict);
Dictionary read_dictionary(const std::filesystem::path& path);

}  // namespace ssr
