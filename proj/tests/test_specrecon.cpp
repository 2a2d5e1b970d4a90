#include "ssr/dictionary.hpp"
#include "ssr/pipeline.hpp"
#include "ssr/simulate.hpp"
#include "ssr/specrecon.hpp"
#include "ssr/synthetic.hpp"
#include "specrecon_small_ref.hpp"
#include "test_util.hpp"

#include "doctest.h"

#include <Eigen/QR>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

using namespace ssr;
namespace S = specrecon_small;

namespace {

Eigen::MatrixXd random_unit_columns(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = n(rng);
        m.col(j).normalize();
    }
    return m;
}

// Observation block T x for every pixel of `x` (bands x pixels).
MultiBandField forward(const FilterBank& t, const MultiBandField& x) {
    MultiBandField y(t.apertures(), x.height, x.width);
    for (std::size_t i = 0; i < t.apertures(); ++i) {
        for (std::size_t p = 0; p < x.plane_size(); ++p) {
            double s = 0.0;
            for (std::size_t b = 0; b < x.bands; ++b) s += t.rows[i][b] * x.band(b)[p];
            y.band(i)[p] = s;
        }
    }
    return y;
}

std::size_t matched_atoms(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& learned, double level) {
    std::size_t hits = 0;
    for (Eigen::Index j = 0; j < truth.cols(); ++j) {
        const double best = (learned.transpose() * truth.col(j)).cwiseAbs().maxCoeff();
        hits += best >= level ? 1 : 0;
    }
    return hits;
}

SsrParams small_params() {
    SsrParams p;
    p.specrecon.rho1 = 0.05;
    p.specrecon.rho2 = 0.05;
    p.specrecon.eta = S::kEta;
    p.specrecon.eta_tv = S::kEtaTv;
    p.specrecon.iter_max = 500;
    p.vtv.inner_iters = 100;
    p.vtv.warm_start = true;
    return p;
}

}  // namespace

TEST_CASE("soft_threshold") {
    const std::vector<double> x{5.0, -1.0, -5.0, 2.0, 0.0};
    const auto y = soft_threshold(x, 2.0);
    CHECK(y == std::vector<double>{3.0, 0.0, -3.0, 0.0, 0.0});
    CHECK(soft_threshold(x, 0.0) == x);
    CHECK_THROWS_AS(soft_threshold(x, -1.0), Error);
}

TEST_CASE("small instance matches the dense convex solve") {
    const std::vector<double> wl(S::kWavelengths, S::kWavelengths + S::kQ);
    std::vector<NotchFilter> f;
    for (int i = 0; i < 3; ++i) f.push_back(NotchFilter::notch(S::kNotchCentres[i], S::kNotchHalfWidths[i]));
    f.push_back(NotchFilter::panchromatic());
    MultiBandField y(4, S::kH, S::kW);
    std::copy(S::kObs, S::kObs + 4 * S::kH * S::kW, y.data.begin());
    Dictionary d;
    d.atoms = Eigen::Map<const Eigen::MatrixXd>(S::kDict, S::kQ, S::kAtoms);
    const BandImage pan(S::kH, S::kW, std::vector<double>(S::kPan, S::kPan + S::kH * S::kW));
    const auto resp = StackedResponse::from_raw(build_filter_bank(f, wl), y, wl);
    const auto res = spectral_reconstruct(resp, d, pan, small_params());
    const std::vector<double> ref(S::kCubeRef, S::kCubeRef + S::kQ * S::kH * S::kW);
    CHECK(testutil::max_abs_diff(res.raw.data, ref) <= 1e-3);
}

TEST_CASE("one-hot transmittance with no priors fits the observations") {
    const std::size_t q = 9;
    FilterBank t;
    for (std::size_t i = 0; i < q; ++i) {
        std::vector<double> row(q, 0.0);
        row[i] = 1.0;
        t.rows.push_back(row);
    }
    Dictionary d;
    d.atoms.resize(q, 2 * q);
    d.atoms << Eigen::MatrixXd::Identity(q, q), random_unit_columns(q, q, 3);
    MultiBandField y = testutil::random_field(q, 6, 6, 14, 0.05, 0.95);
    const auto resp = StackedResponse::from_raw(t, y, testutil::grid(400, 10, q));
    SsrParams p;
    p.specrecon.eta = 0.0;
    p.specrecon.eta_tv = 0.0;
    p.specrecon.rho1 = 1e-2;
    p.specrecon.rho2 = 1e-2;
    p.specrecon.iter_max = 400;
    const auto res = spectral_reconstruct(resp, d, BandImage(6, 6, 0.5), p);
    CHECK(testutil::max_abs_diff(res.raw.data, y.data) <= 1e-6);
}

TEST_CASE("no priors: agrees with the normal equations") {
    // Four bands, six rows of full column rank and an invertible square dictionary,
    // so the least-squares cube is unique.
    const std::vector<double> wl{400, 450, 500, 550};
    std::vector<NotchFilter> f;
    for (double c : wl) f.push_back(NotchFilter::notch(c, 10));
    f.push_back(NotchFilter::panchromatic());
    f.push_back(NotchFilter::notch(425, 30));
    const FilterBank raw = build_filter_bank(f, wl);
    Dictionary d;
    d.atoms = random_unit_columns(4, 4, 8);
    const MultiBandField y = testutil::random_field(6, 8, 8, 21, 0.0, 1.0);
    const auto resp = StackedResponse::from_raw(raw, y, wl);
    SsrParams p;
    p.specrecon.eta = 0.0;
    p.specrecon.eta_tv = 0.0;
    p.specrecon.rho1 = 1e-2;
    p.specrecon.rho2 = 1e-2;
    p.specrecon.iter_max = 2000;
    const auto res = spectral_reconstruct(resp, d, BandImage(8, 8, 0.0), p);

    Eigen::MatrixXd t(6, 4);
    const auto tn = raw.normalized();
    for (int i = 0; i < 6; ++i)
        for (int b = 0; b < 4; ++b) t(i, b) = tn.rows[i][b];
    const Eigen::MatrixXd td = t * d.atoms;
    const Eigen::Map<const Eigen::Matrix<double, 6, Eigen::Dynamic, Eigen::RowMajor>> ym(y.data.data(), 6, 64);
    const Eigen::MatrixXd theta = td.colPivHouseholderQr().solve(Eigen::MatrixXd(ym));
    const Eigen::MatrixXd x = d.atoms * theta;
    double err = 0.0;
    for (int b = 0; b < 4; ++b)
        for (int px = 0; px < 64; ++px) err = std::max(err, std::abs(x(b, px) - res.raw.band(b)[px]));
    CHECK(err <= 1e-6);
}

TEST_CASE("ADMM monitors on a synthetic scene") {
    const auto wl = cave_wavelengths();
    const SpectralCube truth = synthetic_scene(24, 24, wl, 31);
    std::vector<Eigen::MatrixXd> parts;
    for (std::uint64_t s : {41, 42, 43}) parts.push_back(sample_spectra(synthetic_scene(32, 32, wl, s), 2));
    KsvdOptions ko;
    ko.sparsity = 8;
    ko.iterations = 10;
    const Dictionary d = train_dictionary(merge_samples(parts, 2000, 1), ko);

    const auto filters = default_filters();
    const FilterBank raw = build_filter_bank(filters, wl);
    const auto y = forward(raw.normalized(), truth.to_field());
    const auto resp = StackedResponse::from_raw(raw, y, wl);
    SsrParams p;
    p.specrecon.rho1 = 1e-2;
    p.specrecon.rho2 = 1e-2;
    const auto res = spectral_reconstruct(resp, d, y.band_image(kDefaultPanIndex), p);
    const auto& tr = res.trace;
    REQUIRE(tr.theta_z1_residual.size() == 40);
    CHECK(tr.theta_z1_residual.back() * 10.0 <= tr.theta_z1_residual.front());
    CHECK(tr.x_z2_residual.back() * 10.0 <= tr.x_z2_residual.front());
    CHECK(tr.z1_zero_fraction.back() > 0.0);
    for (std::size_t k = 31; k < 40; ++k) CHECK(tr.z1_zero_fraction[k] >= tr.z1_zero_fraction[k - 1]);

    const auto fit = forward(raw.normalized(), res.raw);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < fit.data.size(); ++i) {
        num += (fit.data[i] - y.data[i]) * (fit.data[i] - y.data[i]);
        den += y.data[i] * y.data[i];
    }
    CHECK(std::sqrt(num / den) <= 0.05);
    for (double v : res.cube.data()) CHECK((v >= 0.0 && v <= 1.0));
}

TEST_CASE("spectral_reconstruct errors") {
    const std::vector<double> wl{400, 450, 500};
    FilterBank t;
    t.rows = {{1, 0, 0}, {0, 1, 0}};
    const auto resp = StackedResponse::from_raw(t, MultiBandField(2, 3, 3, 0.2), wl);
    Dictionary d;
    d.atoms = random_unit_columns(3, 4, 2);
    SsrParams p;
    CHECK_THROWS_AS(spectral_reconstruct(resp, d, BandImage(2, 3, 0.0), p), Error);
    Dictionary wrong;
    wrong.atoms = random_unit_columns(4, 4, 2);
    CHECK_THROWS_AS(spectral_reconstruct(resp, wrong, BandImage(3, 3, 0.0), p), Error);
    CHECK_THROWS_AS(StackedResponse::from_raw(t, MultiBandField(3, 3, 3), wl), Error);
    // duplicated atoms with negligible penalties leave the theta system singular
    Dictionary dup;
    dup.atoms.resize(3, 4);
    dup.atoms << random_unit_columns(3, 2, 5), random_unit_columns(3, 2, 5);
    p.specrecon.rho1 = 1e-30;
    p.specrecon.rho2 = 1e-30;
    CHECK_THROWS_AS(spectral_reconstruct(resp, dup, BandImage(3, 3, 0.0), p), Error);
}

TEST_CASE("K-SVD: orthonormal training set is a fixed point") {
    const Eigen::Index q = 8;
    const Eigen::MatrixXd basis = Eigen::HouseholderQR<Eigen::MatrixXd>(random_unit_columns(q, q, 4)).householderQ();
    Eigen::MatrixXd x(q, 10 * q);
    for (Eigen::Index k = 0; k < 10; ++k) x.middleCols(k * q, q) = basis;
    KsvdOptions o;
    o.n_atoms = q;
    o.sparsity = 1;
    o.iterations = 5;
    const auto d = train_dictionary(x, o);
    CHECK(matched_atoms(basis, d.atoms, 0.999) == static_cast<std::size_t>(q));
}

TEST_CASE("K-SVD: planted dictionary recovery and monotone error") {
    const Eigen::Index q = 20, atoms = 30, n = 1500;
    const Eigen::MatrixXd planted = random_unit_columns(q, atoms, 11);
    std::mt19937_64 rng(12);
    std::uniform_int_distribution<Eigen::Index> pick(0, atoms - 1);
    std::uniform_real_distribution<double> coef(0.5, 1.5);
    std::bernoulli_distribution sign(0.5);
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(q, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        std::vector<Eigen::Index> used;
        while (used.size() < 3) {
            const Eigen::Index a = pick(rng);
            if (std::find(used.begin(), used.end(), a) != used.end()) continue;
            used.push_back(a);
            x.col(j) += (sign(rng) ? 1.0 : -1.0) * coef(rng) * planted.col(a);
        }
    }
    std::vector<double> trace;
    KsvdOptions o;
    o.n_atoms = atoms;
    o.sparsity = 3;
    o.iterations = 30;
    o.seed = 5;
    o.error_trace = &trace;
    const auto d = train_dictionary(x, o);
    CHECK(matched_atoms(planted, d.atoms, 0.99) >= static_cast<std::size_t>(0.8 * atoms));
    REQUIRE(trace.size() == 30);
    for (std::size_t k = 1; k < trace.size(); ++k) CHECK(trace[k] <= trace[k - 1] * (1.0 + 1e-12));
    for (Eigen::Index j = 0; j < atoms; ++j) CHECK(d.atoms.col(j).norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(d.max_coherence() < 0.999);
}

TEST_CASE("K-SVD input checks") {
    KsvdOptions o;
    o.sparsity = 2;
    CHECK_THROWS_AS(train_dictionary(Eigen::MatrixXd::Ones(4, 50), o), Error);
    CHECK_THROWS_AS(train_dictionary(Eigen::MatrixXd::Zero(4, 200), o), Error);
    o.sparsity = 4;
    CHECK_THROWS_AS(train_dictionary(Eigen::MatrixXd::Ones(4, 200), o), Error);
}

TEST_CASE("OMP recovers an exactly sparse code") {
    const Eigen::MatrixXd d = random_unit_columns(12, 24, 6);
    Eigen::VectorXd code = Eigen::VectorXd::Zero(24);
    code(3) = 0.7;
    code(17) = -0.4;
    const Eigen::MatrixXd got = omp_batch(d, d * code, 2);
    CHECK((got.col(0) - code).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("dictionary file round trip") {
    const auto dir = std::filesystem::temp_directory_path() / "ssr_test_dict";
    std::filesystem::create_directories(dir);
    Dictionary d;
    d.atoms = random_unit_columns(31, 62, 9);
    write_dictionary(dir / "d.ssrd", d);
    const auto back = read_dictionary(dir / "d.ssrd");
    CHECK(back.atoms == d.atoms);
    {
        std::ofstream(dir / "d.ssrd", std::ios::binary | std::ios::app) << 'x';
    }
    CHECK_THROWS_AS(read_dictionary(dir / "d.ssrd"), Error);
    {
        std::ofstream(dir / "bad.ssrd", std::ios::binary) << "SSRX";
    }
    CHECK_THROWS_AS(read_dictionary(dir / "bad.ssrd"), Error);
    std::filesystem::remove_all(dir);
}
