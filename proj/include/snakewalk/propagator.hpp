#pragma once

// e^{-iHt}|v⟩ by dense diagonalization, by a Chebyshev expansion, and for
// band-restricted states by quadrature in momentum space.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <vector>

#include "error.hpp"
#include "line_spectral.hpp"
#include "momentum.hpp"
#include "parallel.hpp"

namespace snakewalk {

inline constexpr double kHermitianTolerance = 1e-12;
inline constexpr double kInputNormTolerance = 1e-10;
inline constexpr double kDenseTolerance = 1e-10;
inline constexpr double kIterativeTolerance = 1e-8;
inline constexpr Eigen::Index kMaxDenseDimension = 4096;

enum class Method { dense, chebyshev };

namespace detail {

template <class Mat>
double hermitian_defect(const Mat& h) {
    if constexpr (std::is_base_of_v<Eigen::SparseMatrixBase<Mat>, Mat>) {
        Eigen::SparseMatrix<typename Mat::Scalar> a = h;
        Eigen::SparseMatrix<typename Mat::Scalar> d = a - Eigen::SparseMatrix<typename Mat::Scalar>(a.adjoint());
        double m = 0.0;
        for (int c = 0; c < d.outerSize(); ++c)
            for (typename Eigen::SparseMatrix<typename Mat::Scalar>::InnerIterator it(d, c); it; ++it)
                m = std::max(m, std::abs(it.value()));
        return m;
    } else {
        return h.rows() == 0 ? 0.0 : (h - h.adjoint()).cwiseAbs().maxCoeff();
    }
}

inline void check_input(double defect, Eigen::Index rows, Eigen::Index cols, const Eigen::VectorXcd& v) {
    require(rows == cols, "evolve: Hamiltonian is not square");
    require(rows == v.size(), "evolve: dimension mismatch between Hamiltonian and state");
    require(defect <= kHermitianTolerance, "evolve: Hamiltonian is not Hermitian within 1e-12");
    require(std::abs(v.norm() - 1.0) <= kInputNormTolerance, "evolve: input state is not normalized");
}

}  // namespace detail

/// Cached eigendecomposition for repeated dense propagation.
class DenseEvolver {
public:
    explicit DenseEvolver(const Eigen::MatrixXcd& h) {
        detail::require<CapacityError>(h.rows() <= kMaxDenseDimension, "dense evolve: dimension above 4096");
        detail::require(h.rows() == h.cols(), "dense evolve: Hamiltonian is not square");
        detail::require(detail::hermitian_defect(h) <= kHermitianTolerance,
                        "dense evolve: Hamiltonian is not Hermitian within 1e-12");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
        if (es.info() != Eigen::Success) throw ConvergenceError("dense evolve: eigensolver failed");
        values_ = es.eigenvalues();
        vectors_ = es.eigenvectors();
    }

    Eigen::VectorXcd operator()(double t, const Eigen::VectorXcd& v) const {
        detail::require(v.size() == values_.size(), "evolve: dimension mismatch between Hamiltonian and state");
        detail::require(std::abs(v.norm() - 1.0) <= kInputNormTolerance, "evolve: input state is not normalized");
        Eigen::VectorXcd c = vectors_.adjoint() * v;
        for (Eigen::Index i = 0; i < c.size(); ++i) c[i] *= std::polar(1.0, -values_[i] * t);
        Eigen::VectorXcd out = vectors_ * c;
        if (std::abs(out.norm() - 1.0) > kDenseTolerance) throw InternalError("dense evolve: norm drift");
        return out;
    }

    const Eigen::VectorXd& eigenvalues() const { return values_; }
    const Eigen::MatrixXcd& eigenvectors() const { return vectors_; }

private:
    Eigen::VectorXd values_;
    Eigen::MatrixXcd vectors_;
};

inline Eigen::VectorXcd evolve_dense(const Eigen::MatrixXcd& h, double t, const Eigen::VectorXcd& v) {
    return DenseEvolver(h)(t, v);
}

// ---------------------------------------------------------------------------
// Chebyshev expansion

struct ChebyshevOptions {
    double tolerance = kIterativeTolerance;
    int max_terms = 2000;
    double max_step_phase = 20.0;  // bound on b·τ per substep
    int power_iterations = 30;
};

namespace detail {

template <class Mat>
double gershgorin_bound(const Mat& h) {
    Eigen::VectorXd rows = Eigen::VectorXd::Zero(h.rows());
    if constexpr (std::is_base_of_v<Eigen::SparseMatrixBase<Mat>, Mat>) {
        for (int o = 0; o < h.outerSize(); ++o)
            for (typename Mat::InnerIterator it(h, o); it; ++it)
                rows[Mat::IsRowMajor ? it.row() : it.col()] += std::abs(it.value());
    } else {
        rows = h.cwiseAbs().rowwise().sum();
    }
    return rows.size() ? rows.maxCoeff() : 0.0;
}

template <class Mat>
double power_estimate(const Mat& h, int iterations) {
    if (h.rows() == 0) return 0.0;
    // Deterministic start vector with no special symmetry.
    Eigen::VectorXcd x(h.rows());
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = cplx(1.0 + 0.37 * std::sin(1.3 * i), 0.21 * std::cos(0.7 * i));
    x.normalize();
    double est = 0.0;
    for (int it = 0; it < iterations; ++it) {
        Eigen::VectorXcd y = h * x;
        est = y.norm();
        if (est == 0.0) return 0.0;
        x = y / est;
    }
    return est;
}

template <class Mat>
Eigen::VectorXcd chebyshev_step(const Mat& h, double bound, double tau, const Eigen::VectorXcd& v,
                                const ChebyshevOptions& opt) {
    // e^{-iHτ} = Σ_m (2 - δ_m0) (-i)^m J_m(bτ) T_m(H/b); J_m(-a) = (-1)^m J_m(a).
    const double a = bound * std::abs(tau);
    const cplx rotate = tau >= 0.0 ? cplx(0.0, -1.0) : cplx(0.0, 1.0);
    Eigen::VectorXcd t_prev = v;
    Eigen::VectorXcd t_curr = (h * v) / bound;
    Eigen::VectorXcd out = std::cyl_bessel_j(0.0, a) * v;
    cplx phase = rotate;
    out += 2.0 * phase * std::cyl_bessel_j(1.0, a) * t_curr;
    for (int m = 2; m < opt.max_terms; ++m) {
        Eigen::VectorXcd t_next = 2.0 * (h * t_curr) / bound - t_prev;
        phase *= rotate;
        const double jm = std::cyl_bessel_j(static_cast<double>(m), a);
        out += 2.0 * phase * jm * t_next;
        t_prev.swap(t_curr);
        t_curr.swap(t_next);
        if (m > a && std::abs(jm) < 1e-4 * opt.tolerance) return out;
    }
    throw ConvergenceError("chebyshev evolve: expansion did not converge within max_terms");
}

}  // namespace detail

/// e^{-iht}v by a Chebyshev expansion of the rescaled Hamiltonian.
template <class Mat>
Eigen::VectorXcd evolve_chebyshev(const Mat& h, double t, const Eigen::VectorXcd& v, const ChebyshevOptions& opt = {}) {
    detail::check_input(detail::hermitian_defect(h), h.rows(), h.cols(), v);
    detail::require(opt.tolerance > 0.0, "evolve: tolerance must be positive");
    if (t == 0.0) return v;
    const double gersh = detail::gershgorin_bound(h);
    if (gersh == 0.0) return v;
    auto run = [&](double bound) {
        const double total = std::abs(t);
        const int steps = std::max(1, static_cast<int>(std::ceil(bound * total / opt.max_step_phase)));
        const double tau = t / steps;
        Eigen::VectorXcd x = v;
        for (int s = 0; s < steps; ++s) x = detail::chebyshev_step(h, bound, tau, x, opt);
        return x;
    };
    const double tight = std::min(gersh, 1.05 * detail::power_estimate(h, opt.power_iterations));
    if (tight > 0.0) {
        Eigen::VectorXcd x = run(tight);
        if (std::abs(x.norm() - 1.0) <= opt.tolerance) return x;
    }
    // Power iteration can underestimate the spectral radius; the row-sum bound cannot.
    Eigen::VectorXcd x = run(gersh);
    if (std::abs(x.norm() - 1.0) > opt.tolerance) throw ConvergenceError("chebyshev evolve: norm not conserved");
    return x;
}

/// Dispatching front end. The dense method is limited to dimension 4096.
template <class Mat>
Eigen::VectorXcd evolve(const Mat& h, double t, const Eigen::VectorXcd& v, Method method = Method::dense) {
    if (method == Method::dense) {
        if (t == 0.0) {
            detail::check_input(detail::hermitian_defect(h), h.rows(), h.cols(), v);
            return v;
        }
        Eigen::MatrixXcd dense;
        if constexpr (std::is_base_of_v<Eigen::SparseMatrixBase<Mat>, Mat>)
            dense = Eigen::MatrixXcd(h.template cast<cplx>());
        else
            dense = h.template cast<cplx>();
        detail::check_input(detail::hermitian_defect(dense), dense.rows(), dense.cols(), v);
        return evolve_dense(dense, t, v);
    }
    return evolve_chebyshev(h, t, v);
}

// ---------------------------------------------------------------------------
// Band evolution in momentum space

/// Momentum-space amplitude f(k) multiplying ψ(k). Returns 1 for η_0.
using MomentumAmplitude = std::function<cplx(double k)>;

struct BandEvolveReport {
    double total_mass = 0.0;    // (1/K) Σ |f(k_i)|², the norm² of the discretized state
    double window_mass = 0.0;   // mass inside [x_min, x_max]
    double outside_mass = 0.0;  // total - window
};

inline constexpr double kTruncationTolerance = 1e-6;

/// Position-space amplitudes of (1/2π) ∫ e^{ik x} f(k) e^{-iλ(k)t} ψ(k) dk
/// on x ∈ [x_min, x_max], by the Riemann sum over the band's grid.
///
/// Each ψ_j(k) is a sum over y of k-independent weights times φ_y(k) e^{ik h_y(j)},
/// where h_y(j) is the layer offset of vertex y of the snake with word j. The
/// transform therefore needs only n+1 FFTs. Slices are handed to
/// visit(x, slice) in increasing x.
template <class Visitor>
BandEvolveReport band_evolve_visit(const BandSamples& band, double t, const MomentumAmplitude& f, std::int64_t x_min,
                                   std::int64_t x_max, Visitor&& visit,
                                   double truncation_tolerance = kTruncationTolerance) {
    const int n = band.n;
    detail::require(n >= 1 && n <= kMaxMomentumN, "band_evolve: n outside [1, 20]");
    detail::require(x_max >= x_min, "band_evolve: empty window");
    const std::size_t K = band.grid.size();
    const std::int64_t z_min = x_min - n;
    const std::int64_t z_count = x_max - x_min + 1 + 2 * n;
    if (z_count > static_cast<std::int64_t>(K))
        throw ResolutionError("band_evolve: window of " + std::to_string(z_count) +
                              " positions exceeds the grid size " + std::to_string(K));

    // Momentum weights g_i = f(k_i) e^{-iλ_i t}.
    std::vector<cplx> g(K);
    BandEvolveReport report;
    for (std::size_t i = 0; i < K; ++i) {
        const double k = band.grid.node(i);
        g[i] = (f ? f(k) : cplx(1.0)) * std::polar(1.0, -band.lambda[i] * t);
        report.total_mass += std::norm(g[i]) * band.phi.col(static_cast<Eigen::Index>(i)).squaredNorm();
    }
    report.total_mass /= static_cast<double>(K);

    // F_y(z) for y = 1..n+1 and z in [z_min, z_min + z_count).
    Eigen::MatrixXcd F(n + 1, z_count);
    {
        Eigen::FFT<double> fft;
        std::vector<cplx> in(K), out(K);
        const double off = band.grid.offset();
        for (int y = 0; y <= n; ++y) {
            const cplx extra = (y == n) ? cplx(0.0, -1.0) : cplx(1.0);
            for (std::size_t i = 0; i < K; ++i) in[i] = g[i] * band.phi(y, static_cast<Eigen::Index>(i)) * extra;
            fft.inv(out, in);
            for (std::int64_t z = 0; z < z_count; ++z) {
                const std::int64_t pos = z_min + z;
                const std::int64_t m = ((pos % static_cast<std::int64_t>(K)) + K) % K;
                F(y, z) = out[m] * std::polar(1.0, 2.0 * std::numbers::pi * off * pos / static_cast<double>(K));
            }
        }
    }

    const std::uint32_t words = 1u << n;
    const WordExpansion expansion = word_expansion(n, band.u0, band.u1, band.v0);
    const auto& weight = expansion.weight;
    const auto& shift = expansion.shift;

    constexpr std::int64_t kBlock = 32;
    Eigen::MatrixXcd block(words, kBlock);
    for (std::int64_t x0 = x_min; x0 <= x_max; x0 += kBlock) {
        const std::int64_t count = std::min<std::int64_t>(kBlock, x_max - x0 + 1);
        parallel_for(static_cast<std::size_t>(count), [&](std::size_t, std::size_t b, std::size_t e) {
            for (std::size_t c = b; c < e; ++c) {
                const std::int64_t zx = x0 + static_cast<std::int64_t>(c) - z_min;
                for (std::uint32_t j = 0; j < words; ++j) {
                    cplx a = 0.0;
                    for (int y = 0; y <= n; ++y) a += weight(y, j) * F(y, zx + shift(y, j));
                    block(j, static_cast<Eigen::Index>(c)) = a;
                }
            }
        });
        for (std::int64_t c = 0; c < count; ++c) {
            const auto col = block.col(c);
            report.window_mass += col.squaredNorm();
            visit(x0 + c, col);
        }
    }
    report.outside_mass = std::max(0.0, report.total_mass - report.window_mass);
    if (report.outside_mass > truncation_tolerance)
        throw TruncationError("band_evolve: mass " + std::to_string(report.outside_mass) +
                              " lies outside the window [" + std::to_string(x_min) + ", " + std::to_string(x_max) + "]");
    return report;
}

inline constexpr std::int64_t kMaxColumnStateEntries = 50'000'000;

/// Materialized version of band_evolve_visit.
inline ColumnState band_evolve(const BandSamples& band, double t, const MomentumAmplitude& f, std::int64_t x_min,
                               std::int64_t x_max, BandEvolveReport* report = nullptr,
                               double truncation_tolerance = kTruncationTolerance) {
    detail::require<CapacityError>(((x_max - x_min + 1) << band.n) <= kMaxColumnStateEntries,
                                   "band_evolve: state too large to materialize; use band_evolve_visit");
    ColumnState s = ColumnState::zeros(band.n, x_min, x_max);
    const auto r = band_evolve_visit(
        band, t, f, x_min, x_max, [&](std::int64_t x, const auto& slice) { s.slice(x) = slice; },
        truncation_tolerance);
    if (report) *report = r;
    return s;
}

}  // namespace snakewalk
