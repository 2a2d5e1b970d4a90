#include "ssr/operators.hpp"
#include "test_util.hpp"

#include <Eigen/SVD>

#include "doctest.h"

#include <cmath>

using namespace ssr;
using testutil::max_abs_diff;
using testutil::random_image;

namespace {

double max_row_sum_error(const SparseOperator& op) {
    double m = 0.0;
    for (double s : op.row_sums()) m = std::max(m, std::abs(s - 1.0));
    return m;
}

bool interior(std::size_t y, std::size_t x, std::size_t h, std::size_t w, std::size_t margin) {
    return y >= margin && x >= margin && y + margin < h && x + margin < w;
}

}  // namespace

TEST_CASE("sparse operator construction") {
    CHECK_THROWS_AS(SparseOperator(2, 2, {{2, 0, 1.0}}), Error);
    CHECK_THROWS_AS(SparseOperator(2, 2, {{0, 0, 1.0}, {0, 0, 2.0}}), Error);
    const SparseOperator op(2, 3, {{1, 2, 3.0}, {0, 1, 2.0}, {0, 0, 1.0}});
    const auto t = op.triplets();
    REQUIRE(t.size() == 3);
    CHECK((t[0].row == 0 && t[0].col == 0));
    CHECK((t[1].row == 0 && t[1].col == 1));
    CHECK((t[2].row == 1 && t[2].col == 2));
    CHECK(op.apply(std::vector<double>{1, 1, 1}) == std::vector<double>{3, 3});
    CHECK(op.transposed().n_rows() == 3);
}

TEST_CASE("build_warp") {
    SUBCASE("identity") {
        const SparseOperator w = build_warp({}, 5, 6);
        CHECK(w.to_dense().isApprox(Eigen::MatrixXd::Identity(30, 30)));
    }
    SUBCASE("integer shift has single unit weights") {
        const std::size_t h = 6, wd = 7;
        const SparseOperator w = build_warp({1.0, 0.0, 0.0}, h, wd);
        const auto d = w.to_dense();
        for (std::size_t y = 0; y < h; ++y) {
            for (std::size_t x = 0; x + 1 < wd; ++x) {
                const auto row = static_cast<Eigen::Index>(y * wd + x);
                CHECK(d(row, row + 1) == 1.0);
                CHECK(d.row(row).cwiseAbs().sum() == 1.0);
            }
        }
    }
    SUBCASE("half-pixel shift on a 1x4 row") {
        const SparseOperator w = build_warp({0.5, 0.0, 0.0}, 1, 4);
        const auto out = w.apply(std::vector<double>{0, 1, 2, 3});
        CHECK(out[0] == doctest::Approx(0.5));
        CHECK(out[1] == doctest::Approx(1.5));
        CHECK(out[2] == doctest::Approx(2.5));
    }
    SUBCASE("rows are a partition of unity") {
        for (const GeometricTransform t : {GeometricTransform{0.37, -1.21, 0.0}, GeometricTransform{-2.5, 0.8, 3.0},
                                           GeometricTransform{0.0, 0.0, -10.0}}) {
            CHECK(max_row_sum_error(build_warp(t, 9, 11)) < 1e-12);
        }
    }
    SUBCASE("degenerate transforms") {
        CHECK_THROWS_AS(build_warp({std::nan(""), 0.0, 0.0}, 4, 4), Error);
        CHECK_THROWS_AS(build_warp({4.0, 0.0, 0.0}, 4, 4), Error);
        CHECK_THROWS_AS(build_warp({0.0, 0.0, 60.0}, 4, 4), Error);
    }
}

TEST_CASE("warp composed with its inverse") {
    const std::size_t h = 16, w = 16;
    SUBCASE("fractional translations reproduce affine images on the interior") {
        // Bilinear interpolation is exact on affine functions, so the round
        // trip must return the image wherever no edge clamping occurs.
        std::vector<double> ramp(h * w);
        for (std::size_t y = 0; y < h; ++y) {
            for (std::size_t x = 0; x < w; ++x) ramp[y * w + x] = 0.3 + 0.02 * static_cast<double>(x) - 0.01 * static_cast<double>(y);
        }
        for (double dx : {-1.5, -0.7, 0.25, 1.3}) {
            for (double dy : {-1.1, 0.0, 0.6, 1.5}) {
                const GeometricTransform t{dx, dy, 0.0};
                const auto round = build_warp(t, h, w).apply(build_warp(t.inverse(), h, w).apply(ramp));
                for (std::size_t y = 0; y < h; ++y) {
                    for (std::size_t x = 0; x < w; ++x) {
                        if (interior(y, x, h, w, 4)) CHECK(std::abs(round[y * w + x] - ramp[y * w + x]) <= 1e-6);
                    }
                }
            }
        }
    }
    SUBCASE("integer translations reproduce any image on the interior") {
        const auto img = random_image(h, w, 42).data;
        for (double dx : {-1.0, 0.0, 1.0}) {
            for (double dy : {-1.0, 1.0}) {
                const GeometricTransform t{dx, dy, 0.0};
                const auto round = build_warp(t, h, w).apply(build_warp(t.inverse(), h, w).apply(img));
                for (std::size_t y = 0; y < h; ++y) {
                    for (std::size_t x = 0; x < w; ++x) {
                        if (interior(y, x, h, w, 2)) CHECK(std::abs(round[y * w + x] - img[y * w + x]) <= 1e-6);
                    }
                }
            }
        }
    }
}

TEST_CASE("build_decimation") {
    SUBCASE("constant image stays constant") {
        for (std::size_t r : {1, 2, 3}) {
            const auto out = build_decimation(r, 6, 6).apply(std::vector<double>(36, 0.42));
            for (double v : out) CHECK(v == doctest::Approx(0.42));
        }
    }
    SUBCASE("r = 1 is the identity") {
        CHECK(build_decimation(1, 3, 4).to_dense().isApprox(Eigen::MatrixXd::Identity(12, 12)));
    }
    SUBCASE("block mean") {
        CHECK(build_decimation(2, 2, 2).apply(std::vector<double>{1, 2, 3, 4}) == std::vector<double>{2.5});
    }
    SUBCASE("rows sum to one with r^2 weights of 1/r^2") {
        const SparseOperator d = build_decimation(3, 9, 6);
        CHECK(max_row_sum_error(d) < 1e-15);
        for (const auto& t : d.triplets()) CHECK(t.weight == doctest::Approx(1.0 / 9.0));
        CHECK(d.nnz() == 9 * d.n_rows());
    }
    SUBCASE("mean preserved") {
        const auto img = random_image(12, 9, 4).data;
        const auto out = build_decimation(3, 12, 9).apply(img);
        double a = 0.0, b = 0.0;
        for (double v : img) a += v;
        for (double v : out) b += v;
        CHECK(a / img.size() == doctest::Approx(b / out.size()).epsilon(1e-14));
    }
    SUBCASE("non-divisible shape") { CHECK_THROWS_AS(build_decimation(3, 8, 9), Error); }
}

TEST_CASE("build_system_matrix") {
    SUBCASE("K = 1, r = 1, identity") {
        const std::vector<GeometricTransform> t{{}};
        CHECK(build_system_matrix(t, 1, 1, 4, 5).to_dense().isApprox(Eigen::MatrixXd::Identity(20, 20)));
    }
    const std::vector<GeometricTransform> shifts{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}};
    SUBCASE("K = 4, r = 2, point sampling interleaves the pixels") {
        // Each high-res pixel is observed exactly once: G^T G = I.
        const auto g = build_system_matrix(shifts, 4, 2, 4, 4, DecimationKernel::PointSample).to_dense();
        const Eigen::MatrixXd gtg = g.transpose() * g;
        CHECK(gtg.isApprox(Eigen::MatrixXd::Identity(16, 16)));
    }
    SUBCASE("K = 4, r = 2, box average: each column carries weight 1/4 per aperture") {
        const auto g = build_system_matrix(shifts, 4, 2, 4, 4).to_dense();
        const Eigen::MatrixXd gtg = g.transpose() * g;
        for (Eigen::Index i = 0; i < 16; ++i) {
            const std::size_t y = static_cast<std::size_t>(i) / 4, x = static_cast<std::size_t>(i) % 4;
            if (y >= 1 && x >= 1 && y < 3 && x < 3) {
                CHECK(gtg(i, i) == doctest::Approx(0.25));
                CHECK(g.col(i).sum() == doctest::Approx(1.0));
            }
        }
    }
    SUBCASE("K = 9, r = 3, 510 x 510") {
        std::vector<GeometricTransform> t(9);
        const auto g = build_system_matrix(t, 9, 3, 510, 510);
        CHECK(g.n_rows() == 9 * 170 * 170);
        CHECK(g.n_cols() == 510 * 510);
    }
    SUBCASE("K does not match the transform list") {
        CHECK_THROWS_AS(build_system_matrix(shifts, 9, 2, 4, 4), Error);
    }
    SUBCASE("apply equals the stacked per-aperture predictions") {
        const auto img = random_image(6, 6, 9).data;
        const auto g = build_system_matrix(shifts, 4, 2, 6, 6);
        const auto full = g.apply(img);
        const auto ops = build_aperture_operators(shifts, 2, 6, 6);
        std::size_t off = 0;
        for (const auto& op : ops) {
            const auto part = build_decimation(2, 6, 6).apply(build_warp(shifts[&op - ops.data()], 6, 6).apply(img));
            for (std::size_t i = 0; i < part.size(); ++i) CHECK(full[off + i] == doctest::Approx(part[i]));
            off += part.size();
        }
    }
}

TEST_CASE("matrix-free apply equals dense multiply") {
    for (std::size_t n : {2, 5, 8}) {
        const auto img = random_image(n, n, n).data;
        const std::vector<SparseOperator> ops{build_warp({0.31, -0.77, 2.0}, n, n),
                                              build_decimation(n % 2 == 0 ? 2 : 1, n, n),
                                              build_warp({-1.2, 0.4, 0.0}, n, n).transposed()};
        for (const auto& op : ops) {
            CHECK(max_abs_diff(op.apply(img), testutil::dense_apply(op.to_dense(), img)) < 1e-12);
        }
    }
}

TEST_CASE("gradient and divergence") {
    SUBCASE("constant image has zero gradient") {
        const auto g = gradient(BandImage(4, 5, 0.7));
        for (double v : g.horizontal.data) CHECK(v == 0.0);
        for (double v : g.vertical.data) CHECK(v == 0.0);
    }
    SUBCASE("horizontal ramp") {
        BandImage u(4, 5);
        for (std::size_t y = 0; y < 4; ++y) {
            for (std::size_t x = 0; x < 5; ++x) u.at(y, x) = static_cast<double>(x);
        }
        const auto g = gradient(u);
        for (std::size_t y = 0; y < 4; ++y) {
            for (std::size_t x = 0; x < 5; ++x) {
                CHECK(g.horizontal.at(y, x) == (x < 4 ? 1.0 : 0.0));
                CHECK(g.vertical.at(y, x) == 0.0);
            }
        }
    }
    SUBCASE("Neumann boundary") {
        const auto g = gradient(random_image(5, 7, 3));
        for (std::size_t y = 0; y < 5; ++y) CHECK(g.horizontal.at(y, 6) == 0.0);
        for (std::size_t x = 0; x < 7; ++x) CHECK(g.vertical.at(4, x) == 0.0);
    }
    SUBCASE("adjoint identity on 5 x 7") {
        const BandImage u = random_image(5, 7, 10, -1, 1);
        const GradientPair p{random_image(5, 7, 11, -1, 1), random_image(5, 7, 12, -1, 1)};
        const auto gu = gradient(u);
        const auto dp = divergence(p);
        double lhs = 0.0, rhs = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            lhs += gu.horizontal.data[i] * p.horizontal.data[i] + gu.vertical.data[i] * p.vertical.data[i];
            rhs += u.data[i] * dp.data[i];
        }
        CHECK(std::abs(lhs + rhs) < 1e-12);
    }
}

TEST_CASE("bilinear upsampling keeps constants and linear ramps") {
    const auto up = upsample_bilinear(BandImage(3, 4, 0.25), 3);
    CHECK(up.height == 9);
    CHECK(up.width == 12);
    for (double v : up.data) CHECK(v == doctest::Approx(0.25));
    BandImage ramp(1, 4);
    for (std::size_t x = 0; x < 4; ++x) ramp.at(0, x) = static_cast<double>(x);
    const auto r2 = upsample_bilinear(ramp, 2);
    // low-res pixel m sits at high-res coordinate 2m + 0.5
    CHECK(r2.at(0, 2) == doctest::Approx(0.75));
    CHECK(r2.at(0, 3) == doctest::Approx(1.25));
}

TEST_CASE("operator norm by power iteration") {
    CHECK(operator_norm_squared(build_decimation(2, 8, 8), 50) == doctest::Approx(0.25).epsilon(1e-6));
    const auto w = build_warp({0.5, 0.25, 0.0}, 8, 8);
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(w.to_dense());
    const double s0 = svd.singularValues()(0);
    CHECK(operator_norm_squared(w, 200) == doctest::Approx(s0 * s0).epsilon(1e-6));
}
