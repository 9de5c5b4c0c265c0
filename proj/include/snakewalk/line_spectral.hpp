#pragma once

// Momentum decomposition of the snake walk: H_{n,k}, the hat basis, the
// block structure, the reduced matrix Φ_{n,k} and its eigenvalue bands.
//
// Everything band related is written against a Model policy so the same
// code serves the line (LineModel, here) and the infinite binary tree
// (TreeModel, in tree_column.hpp). A model fixes
//
//   * the four move weights of H_{n,k},
//   * the single-letter vectors u0, u1, v0, v1 of its hat basis,
//   * the reduced matrix Φ: chain coupling a, end coupling c(k), end diagonal d(k).
//
// Φ has eigenvalues 2a cos p where p solves
//   G(p, k) = (2a cos p - d) a sin((n+1)p) - |c|² sin(np) = 0.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

#include "error.hpp"
#include "graph.hpp"
#include "jet.hpp"
#include "momentum.hpp"
#include "parallel.hpp"

namespace snakewalk {

using SparseComplex = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

inline constexpr int kMaxMomentumN = 20;
inline constexpr int kMaxDenseN = 12;

/// Weighted adjacency of the snake walk on the line.
struct LineModel {
    static constexpr const char* name = "line";
    static constexpr double chain = 2.0;
    // Weights of e^{ik}(|j0><0j|, |j1><0j|, |1j><j0|, |1j><j1|).
    static constexpr std::array<double, 4> move_weights{1.0, 1.0, 1.0, 1.0};
    static constexpr double r2 = 0.70710678118654752440;
    static constexpr std::array<double, 2> u0{r2, r2};  // times (e^{-ik}, e^{ik})
    static constexpr std::array<double, 2> u1{r2, -r2};
    static constexpr std::array<double, 2> v0{r2, r2};
    static constexpr std::array<double, 2> v1{r2, -r2};

    template <class T>
    static T diag(const T& k) {
        using std::cos;
        return 4.0 * cos(k);
    }
    template <class T>
    static T coupling_sq(const T& k) {
        using std::sin;
        T s = sin(k);
        return 4.0 * (s * s);
    }
    static cplx coupling(double k) { return {2.0 * std::sin(k), 0.0}; }

    // Cancellation-free forms used by the root scan.
    static double chain_minus_diag(double p, double k) {
        return -8.0 * std::sin(0.5 * (p + k)) * std::sin(0.5 * (p - k));
    }
    static double two_a_minus_d(double k) {
        const double s = std::sin(0.5 * k);
        return 8.0 * s * s;
    }
    static double two_a_plus_d(double k) {
        const double c = std::cos(0.5 * k);
        return 8.0 * c * c;
    }
    static bool degenerate(double k) { return std::abs(std::sin(k)) < 1e-9; }
};

// ---------------------------------------------------------------------------
// H_{n,k} and the hat basis

namespace detail {

template <class Model>
SparseComplex momentum_hamiltonian(int n, double k) {
    require<CapacityError>(n >= 1 && n <= kMaxMomentumN, "momentum Hamiltonian: n outside [1, 20]");
    const std::uint32_t dim = 1u << n;
    const std::uint32_t half = dim >> 1;
    const cplx e = std::polar(1.0, k);
    const auto& w = Model::move_weights;
    std::vector<Eigen::Triplet<cplx>> triplets;
    triplets.reserve(static_cast<std::size_t>(dim) * 4);
    auto add = [&](std::uint32_t row, std::uint32_t col, cplx v) {
        triplets.emplace_back(static_cast<int>(row), static_cast<int>(col), v);
        triplets.emplace_back(static_cast<int>(col), static_cast<int>(row), std::conj(v));
    };
    for (std::uint32_t j = 0; j < half; ++j) {
        const std::uint32_t j0 = j << 1, j1 = (j << 1) | 1u, zj = j, oj = half | j;
        add(j0, zj, w[0] * e);
        add(j1, zj, w[1] * e);
        add(oj, j0, w[2] * e);
        add(oj, j1, w[3] * e);
    }
    SparseComplex h(dim, dim);
    h.setFromTriplets(triplets.begin(), triplets.end());
    return h;
}

// Amplitude <j| of a product of single-letter vectors, one letter per bit.
inline cplx product_amplitude(const std::vector<std::array<cplx, 2>>& letters, std::uint32_t j) {
    const int n = static_cast<int>(letters.size());
    cplx a = 1.0;
    for (int l = 0; l < n; ++l) a *= letters[l][(j >> (n - 1 - l)) & 1u];
    return a;
}

template <class Model>
std::array<std::array<cplx, 2>, 4> hat_letters(double k) {
    const cplx em = std::polar(1.0, -k), ep = std::polar(1.0, k);
    return {{{Model::u0[0] * em, Model::u0[1] * ep},
             {Model::u1[0] * em, Model::u1[1] * ep},
             {Model::v0[0], Model::v0[1]},
             {Model::v1[0], Model::v1[1]}}};
}

}  // namespace detail

/// H_{n,k} of the line: forward moves carry e^{ik}, backward moves e^{-ik}.
inline SparseComplex build_Hnk(int n, double k) { return detail::momentum_hamiltonian<LineModel>(n, k); }

/// Letter sequence of |m̂_k⟩ (without the -i prefactor of |0̂_k⟩).
template <class Model>
std::vector<std::array<cplx, 2>> hat_letters_of(int n, double k, std::uint32_t m) {
    const auto L = detail::hat_letters<Model>(k);
    std::vector<std::array<cplx, 2>> letters;
    letters.reserve(n);
    if (m == 0) {
        letters.assign(n, L[0]);
        return letters;
    }
    const int top = static_cast<int>(std::bit_width(m)) - 1;
    for (int l = 0; l < n - top - 1; ++l) letters.push_back(L[0]);
    letters.push_back(L[1]);
    for (int b = top - 1; b >= 0; --b) letters.push_back(L[2 + ((m >> b) & 1u)]);
    return letters;
}

template <class Model>
Eigen::VectorXcd hat_vector(int n, double k, std::uint32_t m) {
    detail::require<CapacityError>(n >= 1 && n <= kMaxMomentumN, "hat_vector: n outside [1, 20]");
    detail::require(m < (1u << n), "hat_vector: index out of range");
    const auto letters = hat_letters_of<Model>(n, k, m);
    Eigen::VectorXcd v(std::int64_t{1} << n);
    for (std::uint32_t j = 0; j < (1u << n); ++j) v[j] = detail::product_amplitude(letters, j);
    if (m == 0) v *= cplx(0.0, -1.0);
    return v;
}

struct HatBasis {
    int n = 0;
    double k = 0.0;
    Eigen::MatrixXcd vectors;  // column m is |m̂_k⟩
};

template <class Model = LineModel>
HatBasis hat_basis(int n, double k) {
    detail::require<CapacityError>(n >= 1 && n <= kMaxDenseN, "hat_basis: dense basis limited to n <= 12");
    HatBasis b{n, k, Eigen::MatrixXcd(std::int64_t{1} << n, std::int64_t{1} << n)};
    for (std::uint32_t m = 0; m < (1u << n); ++m) b.vectors.col(m) = hat_vector<Model>(n, k, m);
    return b;
}

/// H_{n,k} written in its own hat basis: end diagonal d at |0̂⟩,
/// c(k) on |1̂⟩⟨0̂|, chain coupling a between |m̂⟩ and |2m̂⟩.
template <class Model = LineModel>
Eigen::MatrixXcd hat_basis_form(int n, double k) {
    detail::require<CapacityError>(n >= 1 && n <= kMaxDenseN, "hat_basis_form: n outside [1, 12]");
    const std::int64_t dim = std::int64_t{1} << n;
    Eigen::MatrixXcd e = Eigen::MatrixXcd::Zero(dim, dim);
    e(0, 0) = Model::diag(k);
    e(1, 0) = Model::coupling(k);
    e(0, 1) = std::conj(Model::coupling(k));
    for (std::int64_t m = 1; 2 * m < dim; ++m) e(2 * m, m) = e(m, 2 * m) = Model::chain;
    return e;
}

/// One block of the hat-basis block diagonalization.
struct BlockProjector {
    std::uint32_t l = 1;                 // greatest odd divisor class
    std::vector<std::uint32_t> members;  // hat indices spanning the block
    Eigen::MatrixXcd projector;
};

/// The 2^{n-1} projectors Π_{l,k}; Π_1 also holds |0̂⟩.
template <class Model = LineModel>
std::vector<BlockProjector> block_projectors(int n, double k) {
    const auto basis = hat_basis<Model>(n, k);
    const std::uint32_t dim = 1u << n;
    std::vector<BlockProjector> blocks;
    for (std::uint32_t l = 1; l < dim; l += 2) {
        BlockProjector b;
        b.l = l;
        if (l == 1) b.members.push_back(0);
        for (std::uint32_t m = l; m < dim; m <<= 1) b.members.push_back(m);
        Eigen::MatrixXcd cols(dim, static_cast<Eigen::Index>(b.members.size()));
        for (std::size_t i = 0; i < b.members.size(); ++i) cols.col(static_cast<Eigen::Index>(i)) = basis.vectors.col(b.members[i]);
        b.projector = cols * cols.adjoint();
        blocks.push_back(std::move(b));
    }
    return blocks;
}

/// Eigenvalues of the k-independent blocks Π_l for odd l ≥ 3: twice a path
/// adjacency on r_l = n - ceil(log2 l) + 1 vertices.
inline std::vector<double> k_independent_eigenvalues(int n) {
    std::vector<double> out;
    for (std::uint32_t l = 3; l < (1u << n); l += 2) {
        const int ceil_log = static_cast<int>(std::bit_width(l - 1));
        const int r = n - ceil_log + 1;
        for (int y = 1; y <= r; ++y) out.push_back(4.0 * std::cos(std::numbers::pi * y / (r + 1)));
    }
    return out;
}

/// U_{n,k}: column y-1 is |2^{n-y}̂⟩ for y = 1..n, column n is |0̂⟩.
template <class Model = LineModel>
Eigen::MatrixXcd u_matrix(int n, double k) {
    detail::require<CapacityError>(n >= 1 && n <= kMaxDenseN, "u_matrix: n outside [1, 12]");
    Eigen::MatrixXcd u(std::int64_t{1} << n, n + 1);
    for (int y = 1; y <= n; ++y) u.col(y - 1) = hat_vector<Model>(n, k, 1u << (n - y));
    u.col(n) = hat_vector<Model>(n, k, 0);
    return u;
}

/// Φ_{n,k} as a Hermitian (n+1)×(n+1) matrix.
template <class Model = LineModel>
Eigen::MatrixXcd phi_matrix_generic(int n, double k) {
    detail::require(n >= 1, "phi_matrix: n must be at least 1");
    Eigen::MatrixXcd phi = Eigen::MatrixXcd::Zero(n + 1, n + 1);
    for (int y = 0; y + 1 < n; ++y) phi(y, y + 1) = phi(y + 1, y) = Model::chain;
    const cplx c = Model::coupling(k);
    phi(n - 1, n) = c;
    phi(n, n - 1) = std::conj(c);
    phi(n, n) = Model::diag(k);
    return phi;
}

/// Φ_{n,k} of the line (real symmetric).
inline Eigen::MatrixXd phi_matrix(int n, double k) { return phi_matrix_generic<LineModel>(n, k).real(); }

// ---------------------------------------------------------------------------
// The p-equation

/// G(p, k) on any arithmetic type (double or Jet).
template <class Model, class T>
T p_function(int n, const T& p, const T& k) {
    using std::cos;
    using std::sin;
    const double a = Model::chain;
    return (2.0 * a * cos(p) - Model::diag(k)) * (a * sin(static_cast<double>(n + 1) * p)) -
           Model::coupling_sq(k) * sin(static_cast<double>(n) * p);
}

/// Line form 2(cos p - cos k) sin((n+1)p) - sin²k sin(np).
inline double p_equation_residual(int n, double k, double p) {
    const double s = std::sin(k);
    return 2.0 * (std::cos(p) - std::cos(k)) * std::sin((n + 1) * p) - s * s * std::sin(n * p);
}

namespace detail {

// G / sin p, continuous on [0, π].
template <class Model>
double scan_value(int n, double k, double p) {
    const double a = Model::chain;
    const double csq = Model::coupling_sq(k);
    if (p <= 0.0) return Model::two_a_minus_d(k) * a * (n + 1) - csq * n;
    if (p >= std::numbers::pi) {
        const double v = -Model::two_a_plus_d(k) * a * (n + 1) + csq * n;
        return (n % 2 == 0) ? v : -v;
    }
    const double sp = std::sin(p);
    return Model::chain_minus_diag(p, k) * a * (std::sin((n + 1) * p) / sp) - csq * (std::sin(n * p) / sp);
}

template <class F>
double bisect_to_precision(F&& f, double lo, double hi, double f_lo) {
    const bool neg_lo = f_lo < 0.0;
    for (int it = 0; it < 2000; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm < 0.0) == neg_lo)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

struct Bracket {
    double lo, hi, f_lo;
};

template <class Model>
std::vector<Bracket> scan_brackets(int n, double k) {
    const std::size_t expected = static_cast<std::size_t>(n) + 1;
    std::size_t points = 16 * expected;
    for (int attempt = 0; attempt < 4; ++attempt, points *= 2) {
        std::vector<Bracket> out;
        double prev_p = 0.0;
        double prev_f = scan_value<Model>(n, k, 0.0);
        for (std::size_t i = 1; i <= points; ++i) {
            const double p = (i == points) ? std::numbers::pi : std::numbers::pi * static_cast<double>(i) / points;
            const double f = scan_value<Model>(n, k, p);
            if ((prev_f < 0.0) != (f < 0.0)) out.push_back({prev_p, p, prev_f});
            prev_p = p;
            prev_f = f;
        }
        if (out.size() == expected) return out;
    }
    throw RootCountError("p-equation scan did not isolate " + std::to_string(expected) + " roots at k=" +
                         std::to_string(k));
}

template <class Model>
double refine(int n, double k, const Bracket& b) {
    return bisect_to_precision([&](double p) { return scan_value<Model>(n, k, p); }, b.lo, b.hi, b.f_lo);
}

}  // namespace detail

/// The n+1 roots in (0, π) of the model's p-equation, ascending.
template <class Model>
std::vector<double> solve_p_roots(int n, double k) {
    detail::require(n >= 1, "p-equation: n must be at least 1");
    if (Model::degenerate(k))
        throw PreconditionError("p-equation is degenerate at k ≡ 0 mod π; use the analytic branch");
    const auto brackets = detail::scan_brackets<Model>(n, k);
    std::vector<double> roots(brackets.size());
    for (std::size_t i = 0; i < brackets.size(); ++i) roots[i] = detail::refine<Model>(n, k, brackets[i]);
    return roots;
}

/// Roots of 2(cos p − cos k) sin((n+1)p) = sin²k sin(np).
inline std::vector<double> solve_p_equation(int n, double k) { return solve_p_roots<LineModel>(n, k); }

/// Unit eigenvector of Φ at root p; ⟨1̄|φ⟩ = sin p > 0 before normalization.
template <class Model>
Eigen::VectorXcd phi_eigenvector(int n, double k, double p) {
    Eigen::VectorXcd v(n + 1);
    for (int y = 1; y <= n; ++y) v[y - 1] = std::sin(y * p);
    const cplx c = Model::coupling(k);
    const double lambda = 2.0 * Model::chain * std::cos(p);
    const double gap = lambda - Model::diag(k);
    // Two equivalent forms of the last entry; pick the better conditioned one.
    if (std::abs(c) >= std::abs(gap))
        v[n] = Model::chain * std::sin((n + 1) * p) / c;
    else
        v[n] = std::conj(c) * std::sin(n * p) / gap;
    return v / v.norm();
}

/// All k-dependent eigenpairs of Φ_{n,k}.
struct PhiSpectrum {
    int n = 0;
    double k = 0.0;
    std::vector<double> p;    // ascending; eigenvalue l (0-based, descending) is 2a cos p[l]
    Eigen::VectorXd values;   // descending
    Eigen::MatrixXcd vectors; // column l pairs with values[l]
};

template <class Model>
PhiSpectrum phi_spectrum(int n, double k) {
    PhiSpectrum s;
    s.n = n;
    s.k = k;
    s.values.resize(n + 1);
    s.vectors = Eigen::MatrixXcd::Zero(n + 1, n + 1);
    if (Model::degenerate(k)) {
        // Chain eigenvalues 2a cos(yπ/(n+1)) plus the isolated end node d = ±2a.
        const bool at_zero = std::cos(k) > 0.0;
        s.p.push_back(at_zero ? 0.0 : std::numbers::pi);
        for (int y = 1; y <= n; ++y) s.p.push_back(std::numbers::pi * y / (n + 1));
        std::sort(s.p.begin(), s.p.end());
        for (int l = 0; l <= n; ++l) {
            const double p = s.p[l];
            s.values[l] = 2.0 * Model::chain * std::cos(p);
            if (p == 0.0 || p == std::numbers::pi) {
                s.vectors(n, l) = 1.0;
            } else {
                Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n + 1);
                for (int y = 1; y <= n; ++y) v[y - 1] = std::sin(y * p);
                s.vectors.col(l) = v / v.norm();
            }
        }
        return s;
    }
    s.p = solve_p_roots<Model>(n, k);
    for (int l = 0; l <= n; ++l) {
        s.values[l] = 2.0 * Model::chain * std::cos(s.p[l]);
        s.vectors.col(l) = phi_eigenvector<Model>(n, k, s.p[l]);
    }
    return s;
}

// ---------------------------------------------------------------------------
// Word expansion of U_{n,k}φ
//
// Every letter of |2^{n-y}̂⟩ and |0̂⟩ is e^{∓ik} times a constant (u0, u1) or a
// constant (v0), so ⟨j|U_{n,k}φ⟩ = Σ_y w_{y,j} φ_y e^{ik h_y(j)} with k-free
// weights w and integer offsets h_y(j) = Σ_{l≤y} (2j_l - 1). Row n holds the
// |0̂⟩ term without its -i prefactor.

struct WordExpansion {
    int n = 0;
    Eigen::MatrixXd weight;                                      // (n+1) × 2^n
    Eigen::Matrix<std::int32_t, Eigen::Dynamic, Eigen::Dynamic> shift;  // (n+1) × 2^n
};

inline WordExpansion word_expansion(int n, const std::array<double, 2>& u0, const std::array<double, 2>& u1,
                                    const std::array<double, 2>& v0) {
    detail::require<CapacityError>(n >= 1 && n <= kMaxMomentumN, "word_expansion: n outside [1, 20]");
    const std::uint32_t words = 1u << n;
    WordExpansion e{n, Eigen::MatrixXd(n + 1, words), decltype(WordExpansion::shift)(n + 1, words)};
    std::vector<double> prefix(n + 1), suffix(n + 2);
    for (std::uint32_t j = 0; j < words; ++j) {
        auto bit = [&](int l) { return (j >> (n - l)) & 1u; };  // l = 1..n
        prefix[0] = 1.0;
        for (int l = 1; l <= n; ++l) prefix[l] = prefix[l - 1] * u0[bit(l)];
        suffix[n + 1] = 1.0;
        for (int l = n; l >= 1; --l) suffix[l] = suffix[l + 1] * v0[bit(l)];
        int h = 0;
        for (int y = 1; y <= n; ++y) {
            h += bit(y) ? 1 : -1;
            e.weight(y - 1, j) = prefix[y - 1] * u1[bit(y)] * suffix[y + 1];
            e.shift(y - 1, j) = h;
        }
        e.weight(n, j) = prefix[n];
        e.shift(n, j) = h;
    }
    return e;
}

template <class Model>
WordExpansion word_expansion(int n) {
    return word_expansion(n, Model::u0, Model::u1, Model::v0);
}

/// U_{n,k}φ through a word expansion; O(n 2^n).
inline Eigen::VectorXcd expand_psi(const WordExpansion& e, double k, const Eigen::VectorXcd& phi) {
    const int n = e.n;
    std::vector<cplx> phase(2 * n + 1);
    for (int h = -n; h <= n; ++h) phase[h + n] = std::polar(1.0, k * h);
    Eigen::VectorXcd coeff = phi;
    coeff[n] *= cplx(0.0, -1.0);
    Eigen::VectorXcd out(e.weight.cols());
    for (Eigen::Index j = 0; j < e.weight.cols(); ++j) {
        cplx a = 0.0;
        for (int y = 0; y <= n; ++y) a += e.weight(y, j) * coeff[y] * phase[e.shift(y, j) + n];
        out[j] = a;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Bands

/// One eigenvalue band k ↦ (λ_l(k), φ_l(k)) of Φ, selected by its rank l
/// (0 = largest). The median band of even n has rank n/2.
template <class Model>
class BandFunction {
public:
    using model_type = Model;

    BandFunction(int n, int rank) : n_(n), rank_(rank) {
        detail::require(n >= 1, "band: n must be at least 1");
        detail::require(rank >= 0 && rank <= n, "band: rank outside [0, n]");
    }

    int n() const { return n_; }
    int rank() const { return rank_; }

    /// p with λ(k) = 2a cos p.
    double root(double k) const {
        if (Model::degenerate(k)) return phi_spectrum<Model>(n_, k).p[rank_];
        const auto brackets = detail::scan_brackets<Model>(n_, k);
        return detail::refine<Model>(n_, k, brackets[rank_]);
    }

    double eigenvalue(double k) const { return 2.0 * Model::chain * std::cos(root(k)); }

    Eigen::VectorXcd eigvec(double k) const {
        if (Model::degenerate(k)) return phi_spectrum<Model>(n_, k).vectors.col(rank_);
        return phi_eigenvector<Model>(n_, k, root(k));
    }

    /// ψ(k) = U_{n,k} φ(k) as a 2^n vector.
    Eigen::VectorXcd psi(double k) const {
        detail::require<CapacityError>(n_ <= kMaxMomentumN, "psi: n above 20");
        return psi_from_phi(k, eigvec(k));
    }

    Eigen::VectorXcd psi_from_phi(double k, const Eigen::VectorXcd& phi) const {
        return expand_psi(word_expansion<Model>(n_), k, phi);
    }

    /// λ and its first three derivatives by implicit differentiation of G.
    std::array<double, 4> jet(double k) const {
        const double p0 = root(k);
        if (p0 <= 0.0 || p0 >= std::numbers::pi)
            throw PreconditionError("band derivatives undefined for the isolated end-node eigenvalue");
        const double gp = p_function<Model>(n_, Jet<1>::variable(p0), Jet<1>(k)).c[1];
        if (gp == 0.0) throw NumericalInstabilityError("band derivative: G_p vanishes at the root");
        Jet<3> p(p0);
        const Jet<3> kk = Jet<3>::variable(k);
        for (std::size_t m = 1; m <= 3; ++m) {
            p.c[m] = 0.0;
            const Jet<3> r = p_function<Model>(n_, p, kk);
            p.c[m] = -r.c[m] / gp;
        }
        const Jet<3> lam = (2.0 * Model::chain) * cos(p);
        return {lam.value(), lam.derivative(1), lam.derivative(2), lam.derivative(3)};
    }

    double derivative(double k, int order) const {
        detail::require(order >= 0 && order <= 3, "band derivative order must be 0..3");
        return jet(k)[order];
    }

private:
    int n_;
    int rank_;
};

using LineBand = BandFunction<LineModel>;

/// λ(k): the ((n+2)/2)-th largest eigenvalue of Φ_{n,k}.
inline LineBand median_band(int n) {
    detail::require(n >= 2 && n % 2 == 0, "median_band: n must be even and at least 2");
    return LineBand(n, n / 2);
}

inline constexpr double kDerivativeStep = 1e-5;
inline constexpr double kDerivativeTolerance = 1e-5;

/// λ^{(order)}(k) from the p-equation, cross-checked by a central difference
/// of the next lower derivative.
template <class Model>
double band_derivatives(const BandFunction<Model>& band, double k, int order) {
    detail::require(order >= 1 && order <= 3, "band_derivatives: order must be 1, 2 or 3");
    const double h = kDerivativeStep;
    const double primary = band.jet(k)[order];
    const double lower_plus = band.jet(k + h)[order - 1];
    const double lower_minus = band.jet(k - h)[order - 1];
    const double secondary = (lower_plus - lower_minus) / (2.0 * h);
    if (std::abs(primary - secondary) > kDerivativeTolerance * std::max(1.0, std::abs(primary)))
        throw NumericalInstabilityError("band derivative of order " + std::to_string(order) +
                                        " disagrees with finite differences at k=" + std::to_string(k));
    return primary;
}

// ---------------------------------------------------------------------------
// Large-n limit on the line

/// Λ(k) = 4 arctan(2 cos k / sin² k), continuous extension ±2π at k ≡ 0 mod π.
inline double Lambda(double k) {
    const double s = std::sin(k), c = std::cos(k);
    if (std::abs(s) < 1e-300) return c > 0 ? 2.0 * std::numbers::pi : -2.0 * std::numbers::pi;
    return 4.0 * std::atan2(2.0 * c, s * s);
}
inline double Lambda_d1(double k) {
    const double c = std::cos(k);
    return -8.0 * std::sin(k) / (1.0 + c * c);
}
inline double Lambda_d2(double k) {
    const double c = std::cos(k);
    const double q = 1.0 + c * c;
    return -8.0 * c * (3.0 - c * c) / (q * q);
}

// ---------------------------------------------------------------------------
// Band samples on a momentum grid, the input of band_evolve

/// λ and φ of one band at every grid node, plus the hat-basis letter weights
/// needed to expand ψ(k) without materializing 2^n vectors per node.
struct BandSamples {
    int n = 0;
    MomentumGrid grid;
    std::vector<double> lambda;
    Eigen::MatrixXcd phi;  // (n+1) × K
    std::array<double, 2> u0{}, u1{}, v0{};

    BandSamples() : grid(256) {}
};

template <class Model>
BandSamples sample_band(const BandFunction<Model>& band, const MomentumGrid& grid) {
    BandSamples s;
    s.n = band.n();
    s.grid = grid;
    s.lambda.resize(grid.size());
    s.phi.resize(band.n() + 1, static_cast<Eigen::Index>(grid.size()));
    s.u0 = Model::u0;
    s.u1 = Model::u1;
    s.v0 = Model::v0;
    parallel_for(grid.size(), [&](std::size_t, std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const double k = grid.node(i);
            const double p = band.root(k);
            s.lambda[i] = 2.0 * Model::chain * std::cos(p);
            s.phi.col(static_cast<Eigen::Index>(i)) =
                Model::degenerate(k) ? band.eigvec(k) : phi_eigenvector<Model>(band.n(), k, p);
        }
    });
    return s;
}

}  // namespace snakewalk
