#include "ssr/operators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace ssr {

namespace {

using Index = std::ptrdiff_t;

std::vector<Eigen::Triplet<double, Index>> to_eigen(const std::vector<SparseOperator::Triplet>& t) {
    std::vector<Eigen::Triplet<double, Index>> out;
    out.reserve(t.size());
    for (const auto& e : t) {
        out.emplace_back(static_cast<Index>(e.row), static_cast<Index>(e.col), e.weight);
    }
    return out;
}

// Accumulates weights for one output row, merging repeated columns.
class RowBuilder {
public:
    void add(std::size_t col, double w) {
        if (w == 0.0) return;
        for (auto& [c, v] : entries_) {
            if (c == col) {
                v += w;
                return;
            }
        }
        entries_.emplace_back(col, w);
    }
    void flush(std::size_t row, std::vector<SparseOperator::Triplet>& out) {
        std::sort(entries_.begin(), entries_.end());
        for (const auto& [c, v] : entries_) {
            if (v != 0.0) out.push_back({row, c, v});
        }
        entries_.clear();
    }

private:
    std::vector<std::pair<std::size_t, double>> entries_;
};

}  // namespace

SparseOperator::SparseOperator(std::size_t n_rows, std::size_t n_cols, std::vector<Triplet> entries) {
    std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        if (e.row >= n_rows || e.col >= n_cols) {
            throw Error("SparseOperator: entry index out of range");
        }
        if (i > 0 && entries[i - 1].row == e.row && entries[i - 1].col == e.col) {
            throw Error("SparseOperator: duplicate (row, col) entry");
        }
    }
    m_.resize(static_cast<Index>(n_rows), static_cast<Index>(n_cols));
    auto trips = to_eigen(entries);
    m_.setFromTriplets(trips.begin(), trips.end());
    m_.makeCompressed();
}

SparseOperator::SparseOperator(Matrix m) : m_(std::move(m)) {
    m_.makeCompressed();
}

std::vector<SparseOperator::Triplet> SparseOperator::triplets() const {
    std::vector<Triplet> out;
    out.reserve(nnz());
    for (Index r = 0; r < m_.outerSize(); ++r) {
        for (Matrix::InnerIterator it(m_, r); it; ++it) {
            out.push_back({static_cast<std::size_t>(it.row()), static_cast<std::size_t>(it.col()),
                           it.value()});
        }
    }
    return out;
}

std::vector<double> SparseOperator::row_sums() const {
    std::vector<double> out(n_rows(), 0.0);
    for (Index r = 0; r < m_.outerSize(); ++r) {
        for (Matrix::InnerIterator it(m_, r); it; ++it) out[static_cast<std::size_t>(r)] += it.value();
    }
    return out;
}

void SparseOperator::apply(std::span<const double> x, std::span<double> y) const {
    if (x.size() != n_cols() || y.size() != n_rows()) {
        throw Error("SparseOperator::apply: dimension mismatch");
    }
    const Index rows = m_.outerSize();
    const Index* outer = m_.outerIndexPtr();
    const Index* inner = m_.innerIndexPtr();
    const double* vals = m_.valuePtr();
#pragma omp parallel for schedule(static)
    for (Index r = 0; r < rows; ++r) {
        double acc = 0.0;
        for (Index k = outer[r]; k < outer[r + 1]; ++k) {
            acc += vals[k] * x[static_cast<std::size_t>(inner[k])];
        }
        y[static_cast<std::size_t>(r)] = acc;
    }
}

std::vector<double> SparseOperator::apply(std::span<const double> x) const {
    std::vector<double> y(n_rows());
    apply(x, y);
    return y;
}

SparseOperator SparseOperator::transposed() const {
    return SparseOperator(Matrix(m_.transpose()));
}

SparseOperator SparseOperator::compose(const SparseOperator& rhs) const {
    if (n_cols() != rhs.n_rows()) {
        throw Error("SparseOperator::compose: inner dimension mismatch");
    }
    Matrix prod = (m_ * rhs.m_).pruned();
    return SparseOperator(std::move(prod));
}

SparseOperator SparseOperator::vstack(const std::vector<SparseOperator>& blocks) {
    if (blocks.empty()) {
        throw Error("SparseOperator::vstack: no blocks");
    }
    const std::size_t cols = blocks.front().n_cols();
    std::size_t rows = 0;
    std::size_t nnz = 0;
    for (const auto& b : blocks) {
        if (b.n_cols() != cols) {
            throw Error("SparseOperator::vstack: blocks differ in column count");
        }
        rows += b.n_rows();
        nnz += b.nnz();
    }
    std::vector<Eigen::Triplet<double, Index>> trips;
    trips.reserve(nnz);
    std::size_t offset = 0;
    for (const auto& b : blocks) {
        for (Index r = 0; r < b.m_.outerSize(); ++r) {
            for (Matrix::InnerIterator it(b.m_, r); it; ++it) {
                trips.emplace_back(static_cast<Index>(offset) + it.row(), it.col(), it.value());
            }
        }
        offset += b.n_rows();
    }
    Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
    m.setFromTriplets(trips.begin(), trips.end());
    return SparseOperator(std::move(m));
}

Eigen::MatrixXd SparseOperator::to_dense() const {
    return Eigen::MatrixXd(m_);
}

SparseOperator build_warp(const GeometricTransform& t, std::size_t h, std::size_t w) {
    if (h < 1 || w < 1) {
        throw Error("build_warp: empty image");
    }
    if (!std::isfinite(t.dx) || !std::isfinite(t.dy) || !std::isfinite(t.rotation_deg)) {
        throw Error("build_warp: non-finite transform");
    }
    if (std::abs(t.dx) >= static_cast<double>(w) || std::abs(t.dy) >= static_cast<double>(h)) {
        throw Error("build_warp: translation exceeds the image extent");
    }
    if (std::abs(t.rotation_deg) >= 45.0) {
        throw Error("build_warp: rotation is not a small angle");
    }
    const bool rotated = t.rotation_deg != 0.0;
    const double th = t.rotation_deg * std::numbers::pi / 180.0;
    const double c = std::cos(th);
    const double s = std::sin(th);
    const double cx = (static_cast<double>(w) - 1.0) / 2.0;
    const double cy = (static_cast<double>(h) - 1.0) / 2.0;
    const double xmax = static_cast<double>(w - 1);
    const double ymax = static_cast<double>(h - 1);

    std::vector<SparseOperator::Triplet> entries;
    entries.reserve(h * w * 4);
    RowBuilder row;
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            double sx = static_cast<double>(x) + t.dx;
            double sy = static_cast<double>(y) + t.dy;
            if (rotated) {
                const double ux = static_cast<double>(x) - cx;
                const double uy = static_cast<double>(y) - cy;
                sx = cx + c * ux - s * uy + t.dx;
                sy = cy + s * ux + c * uy + t.dy;
            }
            sx = std::clamp(sx, 0.0, xmax);
            sy = std::clamp(sy, 0.0, ymax);
            const double x0f = std::floor(sx);
            const double y0f = std::floor(sy);
            const double fx = sx - x0f;
            const double fy = sy - y0f;
            const auto x0 = static_cast<std::size_t>(x0f);
            const auto y0 = static_cast<std::size_t>(y0f);
            const std::size_t x1 = std::min(x0 + 1, w - 1);
            const std::size_t y1 = std::min(y0 + 1, h - 1);
            row.add(y0 * w + x0, (1.0 - fx) * (1.0 - fy));
            row.add(y0 * w + x1, fx * (1.0 - fy));
            row.add(y1 * w + x0, (1.0 - fx) * fy);
            row.add(y1 * w + x1, fx * fy);
            row.flush(y * w + x, entries);
        }
    }
    return SparseOperator(h * w, h * w, std::move(entries));
}

SparseOperator build_decimation(std::size_t r, std::size_t h, std::size_t w,
                                DecimationKernel kernel) {
    if (r < 1) {
        throw Error("build_decimation: factor must be >= 1");
    }
    if (h % r != 0 || w % r != 0) {
        std::ostringstream os;
        os << "build_decimation: " << h << "x" << w << " is not divisible by " << r;
        throw Error(os.str());
    }
    const std::size_t lh = h / r;
    const std::size_t lw = w / r;
    std::vector<SparseOperator::Triplet> entries;
    const double wgt = 1.0 / static_cast<double>(r * r);
    for (std::size_t m = 0; m < lh; ++m) {
        for (std::size_t n = 0; n < lw; ++n) {
            const std::size_t out = m * lw + n;
            if (kernel == DecimationKernel::PointSample) {
                entries.push_back({out, (m * r) * w + n * r, 1.0});
                continue;
            }
            for (std::size_t a = 0; a < r; ++a) {
                for (std::size_t b = 0; b < r; ++b) {
                    entries.push_back({out, (m * r + a) * w + (n * r + b), wgt});
                }
            }
        }
    }
    return SparseOperator(lh * lw, h * w, std::move(entries));
}

std::vector<SparseOperator> build_aperture_operators(std::span<const GeometricTransform> transforms,
                                                     std::size_t r, std::size_t h, std::size_t w,
                                                     DecimationKernel kernel) {
    const SparseOperator dec = build_decimation(r, h, w, kernel);
    std::vector<SparseOperator> out;
    out.reserve(transforms.size());
    for (const auto& t : transforms) {
        out.push_back(dec.compose(build_warp(t, h, w)));
    }
    return out;
}

SparseOperator build_system_matrix(std::span<const GeometricTransform> transforms,
                                   std::size_t k_apertures, std::size_t r, std::size_t h,
                                   std::size_t w, DecimationKernel kernel) {
    if (transforms.size() != k_apertures || k_apertures == 0) {
        std::ostringstream os;
        os << "build_system_matrix: " << transforms.size() << " transforms for K=" << k_apertures;
        throw Error(os.str());
    }
    return SparseOperator::vstack(build_aperture_operators(transforms, r, h, w, kernel));
}

void gradient_plane(std::span<const double> u, std::size_t h, std::size_t w,
                    std::span<double> gx, std::span<double> gy) {
    for (std::size_t y = 0; y < h; ++y) {
        const double* row = u.data() + y * w;
        double* ox = gx.data() + y * w;
        double* oy = gy.data() + y * w;
        for (std::size_t x = 0; x + 1 < w; ++x) ox[x] = row[x + 1] - row[x];
        ox[w - 1] = 0.0;
        if (y + 1 < h) {
            const double* next = row + w;
            for (std::size_t x = 0; x < w; ++x) oy[x] = next[x] - row[x];
        } else {
            for (std::size_t x = 0; x < w; ++x) oy[x] = 0.0;
        }
    }
}

void divergence_plane(std::span<const double> px, std::span<const double> py, std::size_t h,
                      std::size_t w, std::span<double> out) {
    for (std::size_t y = 0; y < h; ++y) {
        const double* rx = px.data() + y * w;
        const double* ry = py.data() + y * w;
        const double* ry_up = y > 0 ? ry - w : nullptr;
        double* o = out.data() + y * w;
        for (std::size_t x = 0; x < w; ++x) {
            double d = 0.0;
            if (w > 1) {
                if (x == 0) d += rx[0];
                else if (x + 1 == w) d -= rx[x - 1];
                else d += rx[x] - rx[x - 1];
            }
            if (h > 1) {
                if (y == 0) d += ry[x];
                else if (y + 1 == h) d -= ry_up[x];
                else d += ry[x] - ry_up[x];
            }
            o[x] = d;
        }
    }
}

GradientPair gradient(const BandImage& img) {
    if (img.height < 1 || img.width < 1) {
        throw Error("gradient: empty image");
    }
    GradientPair g{BandImage(img.height, img.width), BandImage(img.height, img.width)};
    gradient_plane(img.data, img.height, img.width, g.horizontal.data, g.vertical.data);
    return g;
}

BandImage divergence(const GradientPair& g) {
    if (g.horizontal.height != g.vertical.height || g.horizontal.width != g.vertical.width) {
        throw Error("divergence: component shapes differ");
    }
    BandImage out(g.horizontal.height, g.horizontal.width);
    divergence_plane(g.horizontal.data, g.vertical.data, out.height, out.width, out.data);
    return out;
}

BandImage upsample_bilinear(const BandImage& img, std::size_t r) {
    if (r < 1) {
        throw Error("upsample_bilinear: factor must be >= 1");
    }
    const std::size_t H = img.height * r;
    const std::size_t W = img.width * r;
    BandImage out(H, W);
    const double off = (static_cast<double>(r) - 1.0) / 2.0;
    const double xmax = static_cast<double>(img.width - 1);
    const double ymax = static_cast<double>(img.height - 1);
    for (std::size_t y = 0; y < H; ++y) {
        const double sy = std::clamp((static_cast<double>(y) - off) / static_cast<double>(r), 0.0, ymax);
        const auto y0 = static_cast<std::size_t>(std::floor(sy));
        const std::size_t y1 = std::min(y0 + 1, img.height - 1);
        const double fy = sy - static_cast<double>(y0);
        for (std::size_t x = 0; x < W; ++x) {
            const double sx =
                std::clamp((static_cast<double>(x) - off) / static_cast<double>(r), 0.0, xmax);
            const auto x0 = static_cast<std::size_t>(std::floor(sx));
            const std::size_t x1 = std::min(x0 + 1, img.width - 1);
            const double fx = sx - static_cast<double>(x0);
            out.at(y, x) = (1 - fy) * ((1 - fx) * img.at(y0, x0) + fx * img.at(y0, x1)) +
                           fy * ((1 - fx) * img.at(y1, x0) + fx * img.at(y1, x1));
        }
    }
    return out;
}

BandImage apply_operator(const SparseOperator& op, const BandImage& img, std::size_t out_h,
                         std::size_t out_w) {
    if (op.n_rows() != out_h * out_w) {
        throw Error("apply_operator: output shape does not match operator rows");
    }
    BandImage out(out_h, out_w);
    op.apply(img.data, out.data);
    return out;
}

double operator_norm_squared(const SparseOperator& a, int iterations) {
    const SparseOperator at = a.transposed();
    std::vector<double> v(a.n_cols());
    // Deterministic non-degenerate start vector.
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 + 0.5 * std::sin(0.37 * static_cast<double>(i));
    std::vector<double> av(a.n_rows());
    double lambda = 0.0;
    for (int it = 0; it < iterations; ++it) {
        double nrm = 0.0;
        for (double x : v) nrm += x * x;
        nrm = std::sqrt(nrm);
        if (nrm == 0.0) return 0.0;
        for (double& x : v) x /= nrm;
        a.apply(v, av);
        at.apply(av, v);
        lambda = 0.0;
        for (double x : av) lambda += x * x;
    }
    return lambda;
}

}  // namespace ssr
