#include "ssr/dictionary.hpp"

#include "binary_io.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace ssr {

namespace {

using Index = Eigen::Index;

constexpr double kDuplicateCorrelation = 0.999;

// Indices of training columns ordered from worst to best represented.
std::vector<Index> worst_first(const Eigen::MatrixXd& residual) {
    const Eigen::VectorXd err = residual.colwise().squaredNorm().transpose();
    std::vector<Index> order(static_cast<std::size_t>(err.size()));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return err(a) > err(b); });
    return order;
}

bool near_duplicate(const Eigen::MatrixXd& atoms, Index skip, const Eigen::VectorXd& v) {
    for (Index j = 0; j < atoms.cols(); ++j) {
        if (j == skip) continue;
        if (std::abs(atoms.col(j).dot(v)) >= kDuplicateCorrelation) return true;
    }
    return false;
}

// Replaces atom k by the next worst-represented training spectrum that is not
// a near-duplicate of another atom. Returns false when none is left.
bool replace_atom(Eigen::MatrixXd& atoms, Index k, const Eigen::MatrixXd& spectra,
                  const std::vector<Index>& order, std::size_t& cursor) {
    while (cursor < order.size()) {
        const Index n = order[cursor++];
        const double nrm = spectra.col(n).norm();
        if (nrm <= 0.0) continue;
        const Eigen::VectorXd v = spectra.col(n) / nrm;
        if (near_duplicate(atoms, k, v)) continue;
        atoms.col(k) = v;
        return true;
    }
    return false;
}

}  // namespace

void Dictionary::validate() const {
    if (atoms.rows() == 0 || atoms.cols() == 0) {
        throw Error("Dictionary: empty");
    }
    for (Index j = 0; j < atoms.cols(); ++j) {
        if (!atoms.col(j).allFinite() || std::abs(atoms.col(j).norm() - 1.0) > 1e-9) {
            throw Error("Dictionary: atoms must be finite with unit norm");
        }
    }
}

double Dictionary::max_coherence() const {
    const Eigen::MatrixXd g = atoms.transpose() * atoms;
    double m = 0.0;
    for (Index i = 0; i < g.rows(); ++i) {
        for (Index j = i + 1; j < g.cols(); ++j) m = std::max(m, std::abs(g(i, j)));
    }
    return m;
}

Eigen::VectorXd omp_code(const Eigen::MatrixXd& gram, const Eigen::VectorXd& dtx, int sparsity) {
    const Index n = dtx.size();
    Eigen::VectorXd coef = Eigen::VectorXd::Zero(n);
    const Index s_max = std::min<Index>(sparsity, n);
    if (s_max <= 0) return coef;

    const double scale = dtx.cwiseAbs().maxCoeff();
    if (scale <= 0.0) return coef;

    std::vector<Index> support;
    std::vector<char> in_support(static_cast<std::size_t>(n), 0);
    Eigen::MatrixXd chol = Eigen::MatrixXd::Zero(s_max, s_max);
    Eigen::VectorXd alpha = dtx;
    Eigen::VectorXd c;

    for (Index k = 0; k < s_max; ++k) {
        Index best = -1;
        double best_val = 0.0;
        for (Index j = 0; j < n; ++j) {
            if (in_support[static_cast<std::size_t>(j)]) continue;
            const double v = std::abs(alpha(j));
            if (v > best_val) {
                best_val = v;
                best = j;
            }
        }
        if (best < 0 || best_val <= 1e-12 * scale) break;

        if (k == 0) {
            chol(0, 0) = 1.0;
        } else {
            Eigen::VectorXd g(k);
            for (Index i = 0; i < k; ++i) g(i) = gram(support[static_cast<std::size_t>(i)], best);
            const Eigen::VectorXd wv =
                chol.topLeftCorner(k, k).triangularView<Eigen::Lower>().solve(g);
            const double d = 1.0 - wv.squaredNorm();
            if (d <= 1e-10) break;  // atom is (numerically) in the current span
            chol.block(k, 0, 1, k) = wv.transpose();
            chol(k, k) = std::sqrt(d);
        }
        support.push_back(best);
        in_support[static_cast<std::size_t>(best)] = 1;

        const Index m = static_cast<Index>(support.size());
        Eigen::VectorXd rhs(m);
        for (Index i = 0; i < m; ++i) rhs(i) = dtx(support[static_cast<std::size_t>(i)]);
        const auto lower = chol.topLeftCorner(m, m).triangularView<Eigen::Lower>();
        c = lower.solve(rhs);
        c = lower.transpose().solve(c);

        alpha = dtx;
        for (Index i = 0; i < m; ++i) alpha -= gram.col(support[static_cast<std::size_t>(i)]) * c(i);
    }
    for (std::size_t i = 0; i < support.size(); ++i) coef(support[i]) = c(static_cast<Index>(i));
    return coef;
}

Eigen::MatrixXd omp_batch(const Eigen::MatrixXd& dict, const Eigen::MatrixXd& signals, int sparsity) {
    if (dict.rows() != signals.rows()) {
        throw Error("omp_batch: signal length does not match dictionary");
    }
    const Eigen::MatrixXd gram = dict.transpose() * dict;
    const Eigen::MatrixXd dtx = dict.transpose() * signals;
    Eigen::MatrixXd codes(dict.cols(), signals.cols());
    const Index n = signals.cols();
#pragma omp parallel for schedule(static)
    for (Index j = 0; j < n; ++j) {
        codes.col(j) = omp_code(gram, dtx.col(j), sparsity);
    }
    return codes;
}

Dictionary train_dictionary(const Eigen::MatrixXd& spectra, const KsvdOptions& options) {
    const Index q = spectra.rows();
    const Index n = spectra.cols();
    const Index k_atoms = options.n_atoms ? static_cast<Index>(options.n_atoms) : 2 * q;
    if (q == 0) {
        throw Error("train_dictionary: empty spectra");
    }
    if (n < 10 * k_atoms) {
        std::ostringstream os;
        os << "train_dictionary: " << n << " training spectra, need at least " << 10 * k_atoms;
        throw Error(os.str());
    }
    if (options.sparsity < 1 || options.sparsity >= q) {
        throw Error("train_dictionary: sparsity must be in [1, Q)");
    }
    if (options.iterations < 1) {
        throw Error("train_dictionary: at least one iteration required");
    }
    if (!spectra.allFinite() || spectra.squaredNorm() == 0.0) {
        throw Error("train_dictionary: degenerate (all-zero or non-finite) training set");
    }

    // Initial atoms: distinct training spectra in seeded random order.
    Eigen::MatrixXd atoms = Eigen::MatrixXd::Zero(q, k_atoms);
    {
        std::vector<Index> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), Index{0});
        std::mt19937_64 rng(options.seed);
        std::shuffle(order.begin(), order.end(), rng);
        Index filled = 0;
        for (Index idx : order) {
            if (filled == k_atoms) break;
            const double nrm = spectra.col(idx).norm();
            if (nrm <= 0.0) continue;
            const Eigen::VectorXd v = spectra.col(idx) / nrm;
            if (near_duplicate(atoms.leftCols(filled), -1, v)) continue;
            atoms.col(filled++) = v;
        }
        std::normal_distribution<double> gauss;
        while (filled < k_atoms) {
            Eigen::VectorXd v(q);
            for (Index i = 0; i < q; ++i) v(i) = gauss(rng);
            v.normalize();
            if (near_duplicate(atoms.leftCols(filled), -1, v)) continue;
            atoms.col(filled++) = v;
        }
    }

    Eigen::MatrixXd codes = Eigen::MatrixXd::Zero(k_atoms, n);
    Eigen::MatrixXd residual = spectra;

    for (int it = 0; it < options.iterations; ++it) {
        // Sparse coding; a column keeps its previous code when OMP does worse.
        const Eigen::MatrixXd fresh = omp_batch(atoms, spectra, options.sparsity);
        const Eigen::MatrixXd fresh_resid = spectra - atoms * fresh;
        for (Index j = 0; j < n; ++j) {
            if (it == 0 || fresh_resid.col(j).squaredNorm() <= residual.col(j).squaredNorm()) {
                codes.col(j) = fresh.col(j);
                residual.col(j) = fresh_resid.col(j);
            }
        }

        const std::vector<Index> order = worst_first(residual);
        std::size_t cursor = 0;
        for (Index k = 0; k < k_atoms; ++k) {
            std::vector<Index> users;
            for (Index j = 0; j < n; ++j) {
                if (codes(k, j) != 0.0) users.push_back(j);
            }
            if (users.empty()) {
                replace_atom(atoms, k, spectra, order, cursor);
                continue;
            }
            const Index m = static_cast<Index>(users.size());
            Eigen::MatrixXd err(q, m);
            for (Index i = 0; i < m; ++i) {
                const Index j = users[static_cast<std::size_t>(i)];
                err.col(i) = residual.col(j) + atoms.col(k) * codes(k, j);
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(err * err.transpose());
            Eigen::VectorXd u = eig.eigenvectors().col(q - 1);
            if (u.sum() < 0.0) u = -u;
            const Eigen::RowVectorXd coef = u.transpose() * err;
            atoms.col(k) = u;
            for (Index i = 0; i < m; ++i) {
                const Index j = users[static_cast<std::size_t>(i)];
                codes(k, j) = coef(i);
                residual.col(j) = err.col(i) - u * coef(i);
            }
        }
        if (options.error_trace) options.error_trace->push_back(residual.norm());
    }

    // Final clean-up: split near-duplicate atoms.
    {
        const std::vector<Index> order = worst_first(residual);
        std::size_t cursor = 0;
        for (Index k = 1; k < k_atoms; ++k) {
            bool dup = false;
            for (Index j = 0; j < k && !dup; ++j) {
                dup = std::abs(atoms.col(j).dot(atoms.col(k))) >= kDuplicateCorrelation;
            }
            if (dup) replace_atom(atoms, k, spectra, order, cursor);
        }
    }

    Dictionary d;
    d.atoms = std::move(atoms);
    d.sparsity = options.sparsity;
    d.iterations = options.iterations;
    return d;
}

void write_dictionary(const std::filesystem::path& path, const Dictionary& dict) {
    dict.validate();
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw Error("write_dictionary: cannot open " + path.string());
    }
    os.write("SSRD", 4);
    detail::put_u32(os, static_cast<std::uint32_t>(dict.q()));
    detail::put_u32(os, static_cast<std::uint32_t>(dict.n_atoms()));
    for (Index j = 0; j < dict.atoms.cols(); ++j) {
        for (Index i = 0; i < dict.atoms.rows(); ++i) detail::put_f64(os, dict.atoms(i, j));
    }
    if (!os) {
        throw Error("write_dictionary: write failed for " + path.string());
    }
}

Dictionary read_dictionary(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw Error("read_dictionary: cannot open " + path.string());
    }
    char magic[4] = {};
    std::uint32_t q = 0;
    std::uint32_t k = 0;
    if (!is.read(magic, 4) || std::string(magic, 4) != "SSRD" || !detail::get_u32(is, q) ||
        !detail::get_u32(is, k) || q == 0 || k == 0) {
        throw Error("read_dictionary: bad header in " + path.string());
    }
    Dictionary d;
    d.atoms.resize(q, k);
    for (Index j = 0; j < d.atoms.cols(); ++j) {
        for (Index i = 0; i < d.atoms.rows(); ++i) {
            if (!detail::get_f64(is, d.atoms(i, j))) {
                throw Error("read_dictionary: truncated payload in " + path.string());
            }
        }
    }
    if (is.peek() != std::char_traits<char>::eof()) {
        throw Error("read_dictionary: trailing bytes in " + path.string());
    }
    d.validate();
    return d;
}

}  // namespace ssr
