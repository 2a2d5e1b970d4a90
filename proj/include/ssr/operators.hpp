#pragma once

#include "ssr/core.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cstddef>
#include <span>
#include <vector>

namespace ssr {

// Column-vector convention: an operator maps a flattened (row-major) image x
// to A x. Warps and decimations act on the left of the image vector.
class SparseOperator {
public:
    using Matrix = Eigen::SparseMatrix<double, Eigen::RowMajor, std::ptrdiff_t>;

    struct Triplet {
        std::size_t row = 0;
        std::size_t col = 0;
        double weight = 0.0;
    };

    SparseOperator() = default;
    // Rejects out-of-range indices and duplicate (row, col) pairs.
    SparseOperator(std::size_t n_rows, std::size_t n_cols, std::vector<Triplet> entries);
    explicit SparseOperator(Matrix m);

    std::size_t n_rows() const { return static_cast<std::size_t>(m_.rows()); }
    std::size_t n_cols() const { return static_cast<std::size_t>(m_.cols()); }
    std::size_t nnz() const { return static_cast<std::size_t>(m_.nonZeros()); }

    // Sorted row-major.
    std::vector<Triplet> triplets() const;
    std::vector<double> row_sums() const;

    // y = A x. Rows are evaluated independently with a fixed summation order,
    // so the result does not depend on the worker count.
    void apply(std::span<const double> x, std::span<double> y) const;
    std::vector<double> apply(std::span<const double> x) const;

    SparseOperator transposed() const;
    // this * rhs
    SparseOperator compose(const SparseOperator& rhs) const;
    static SparseOperator vstack(const std::vector<SparseOperator>& blocks);

    Eigen::MatrixXd to_dense() const;
    const Matrix& matrix() const { return m_; }

private:
    Matrix m_;
};

enum class DecimationKernel {
    BoxAverage,   // mean over each r x r block
    PointSample,  // top-left sample of each block
};

// Bilinear warp with replicate-edge boundary: output(p) = input(T(p)).
SparseOperator build_warp(const GeometricTransform& t, std::size_t h, std::size_t w);

SparseOperator build_decimation(std::size_t r, std::size_t h, std::size_t w,
                                DecimationKernel kernel = DecimationKernel::BoxAverage);

// Per-aperture composite operators decimate(warp(.)), each (h/r * w/r) x (h * w).
std::vector<SparseOperator> build_aperture_operators(std::span<const GeometricTransform> transforms,
                                                     std::size_t r, std::size_t h, std::size_t w,
                                                     DecimationKernel kernel = DecimationKernel::BoxAverage);

// The K aperture composites stacked so that G x is the concatenation of the K
// low-resolution predictions. `k_apertures` must match the transform count.
SparseOperator build_system_matrix(std::span<const GeometricTransform> transforms,
                                   std::size_t k_apertures, std::size_t r, std::size_t h,
                                   std::size_t w,
                                   DecimationKernel kernel = DecimationKernel::BoxAverage);

struct GradientPair {
    BandImage horizontal;
    BandImage vertical;
};

// Forward differences, Neumann boundary (last column / last row are zero).
GradientPair gradient(const BandImage& img);
// Negative adjoint of gradient: <grad u, p> = -<u, div p>.
BandImage divergence(const GradientPair& g);

// Plane-level kernels shared with the multi-band solvers.
void gradient_plane(std::span<const double> u, std::size_t h, std::size_t w,
                    std::span<double> gx, std::span<double> gy);
void divergence_plane(std::span<const double> px, std::span<const double> py, std::size_t h,
                      std::size_t w, std::span<double> out);

// Bilinear upsample by an integer factor; low-res pixel m is centred on
// high-res coordinate r*m + (r-1)/2. Replicate-edge outside.
BandImage upsample_bilinear(const BandImage& img, std::size_t r);

BandImage apply_operator(const SparseOperator& op, const BandImage& img, std::size_t out_h,
                         std::size_t out_w);

// Largest eigenvalue of A^T A by power iteration.
double operator_norm_squared(const SparseOperator& a, int iterations = 20);

}  // namespace ssr
