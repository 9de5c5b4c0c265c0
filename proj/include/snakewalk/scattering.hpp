#pragma once

// Scattering of tree-band waves off the glued part: R(k), T(k), the
// scattering eigenvector μ(k) of H̃_n, and span probabilities p_{x,a}(k).

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <tuple>
#include <vector>

#include "error.hpp"
#include "momentum.hpp"
#include "tree_column.hpp"

namespace snakewalk {

struct ScatteringCoefficients {
    double k = 0.0;
    cplx R;
    cplx T;
    double effective_length = 0.0;  // d arg T / dk

    double reflection() const { return std::norm(R); }
    double transmission() const { return std::norm(T); }
};

namespace detail {

inline std::pair<cplx, cplx> reflection_transmission(double k) {
    const cplx e2 = std::polar(1.0, 2.0 * k);
    const cplx em2 = std::conj(e2);
    const cplx den = 5.0 - 2.0 * em2 - 2.0 * e2;
    return {(1.0 - 2.0 * e2) / den, std::numbers::sqrt2 * (em2 - 3.0 + 2.0 * e2) / den};
}

}  // namespace detail

inline constexpr double kEffectiveLengthStep = 1e-6;

inline ScatteringCoefficients scattering_coefficients(double k) {
    ScatteringCoefficients s;
    s.k = k;
    std::tie(s.R, s.T) = detail::reflection_transmission(k);
    const double h = kEffectiveLengthStep;
    const cplx tp = detail::reflection_transmission(k + h).second;
    const cplx tm = detail::reflection_transmission(k - h).second;
    // At sin k = 0 the transmission vanishes and the phase is undefined.
    s.effective_length = std::abs(tp) > 0 && std::abs(tm) > 0 ? std::arg(tp / tm) / (2.0 * h)
                                                               : std::numeric_limits<double>::quiet_NaN();
    return s;
}

/// 8 sin²k / (1 + 8 sin²k).
inline double transmission_probability(double k) {
    const double s = std::sin(k);
    return 8.0 * s * s / (1.0 + 8.0 * s * s);
}

/// Node in (π, 2π) with the largest |T|².
inline double transmission_peak(const MomentumGrid& grid) {
    double best = -1.0, arg = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double k = grid.node(i);
        if (k <= std::numbers::pi) continue;
        const double t = scattering_coefficients(k).transmission();
        if (t > best) best = t, arg = k;
    }
    return arg;
}

// ---------------------------------------------------------------------------
// μ(k)

inline constexpr int kMaxScatteringDenseUnknowns = 2048;
inline constexpr double kScatteringResidualTolerance = 1e-8;

/// Eigenvector of H̃_n with eigenvalue λ̃(k): incoming e^{ikx}ψ̂(k) plus
/// R e^{-ikx}ψ̂(-k) for x ≤ -n+1, T e^{ikx}ψ̌(k) for x ≥ n, and solved
/// columns in between.
struct ScatteringEigenvector {
    int n = 0;
    double k = 0.0;
    double lambda = 0.0;
    ScatteringCoefficients coefficients;
    Eigen::VectorXcd psi_in;         // ψ̂(k)
    Eigen::VectorXcd psi_reflected;  // ψ̂(-k)
    Eigen::VectorXcd psi_out;        // ψ̌(k), ⟨j|ψ̌⟩ = conj⟨j⊕1^n|ψ̂(k)⟩
    ColumnState interior;            // x in [-n+2, n-1]
    double residual = 0.0;           // max |row| of (H̃_n - λ̃)μ over x in [-n+1, n]
    bool satisfied = false;          // residual within tolerance
    Eigen::Index rank = -1;          // numerical rank; -1 when solved iteratively
    double condition_estimate = 0.0; // ratio of extreme nonzero pivots (dense path)
    Eigen::Index iterations = 0;     // iterative path only

    /// Amplitudes of column x, from the ansatz outside the interior.
    Eigen::VectorXcd column(std::int64_t x) const {
        if (interior.contains(x)) return interior.slice(x);
        const double xd = static_cast<double>(x);
        if (x < interior.x_min)
            return std::polar(1.0, k * xd) * psi_in + coefficients.R * std::polar(1.0, -k * xd) * psi_reflected;
        return coefficients.T * std::polar(1.0, k * xd) * psi_out;
    }

    ColumnState assemble(std::int64_t x_min, std::int64_t x_max) const {
        ColumnState s = ColumnState::zeros(n, x_min, x_max);
        for (std::int64_t x = x_min; x <= x_max; ++x) s.slice(x) = column(x);
        return s;
    }
};

/// max |((H̃_n - λ) μ)_{x,j}| over rows with x in [x_min + 1, x_max - 1] of the
/// assembled state on [x_min, x_max].
inline double eigen_residual(const ScatteringEigenvector& v, std::int64_t x_min, std::int64_t x_max) {
    const ColumnState s = v.assemble(x_min, x_max);
    const SparseReal h = column_hamiltonian(v.n, x_min, x_max);
    const Eigen::VectorXcd r = h.cast<cplx>() * s.amplitudes - v.lambda * s.amplitudes;
    const std::int64_t words = s.words();
    return r.segment(words, r.size() - 2 * words).cwiseAbs().maxCoeff();
}

inline ScatteringEigenvector solve_scattering_vector(int n, double k, const TreeBand& band,
                                                     double tolerance = kScatteringResidualTolerance) {
    detail::require(n == band.n(), "solve_scattering_vector: band built for a different n");
    detail::require(n >= 2 && n % 2 == 0 && n <= 10, "solve_scattering_vector: n must be even in [2, 10]");
    ScatteringEigenvector v;
    v.n = n;
    v.k = k;
    v.lambda = band.eigenvalue(k);
    v.coefficients = scattering_coefficients(k);
    v.psi_in = band.psi(k);
    v.psi_reflected = band.psi(-k);
    const std::uint32_t words = 1u << n, flip = words - 1;
    v.psi_out.resize(words);
    for (std::uint32_t j = 0; j < words; ++j) v.psi_out[j] = std::conj(v.psi_in[j ^ flip]);

    const std::int64_t lo = -n + 2, hi = n - 1;  // unknown columns
    v.interior = ColumnState::zeros(n, lo, hi);
    // H̃_n on a window wide enough to hold rows x in [-n+1, n] with their neighbours.
    const std::int64_t wmin = -2 * n, wmax = 2 * n + 1;
    const SparseReal h = column_hamiltonian(n, wmin, wmax);
    auto widx = [&](std::int64_t x, std::uint32_t j) { return (x - wmin) * words + j; };

    const std::int64_t rows = (hi + 1 - (lo - 1) + 1) * words;
    const std::int64_t cols = (hi - lo + 1) * words;
    std::vector<Eigen::Triplet<cplx>> trip;
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(rows);
    std::int64_t r = 0;
    for (std::int64_t x = lo - 1; x <= hi + 1; ++x) {
        for (std::uint32_t j = 0; j < words; ++j, ++r) {
            const std::int64_t row = widx(x, j);
            auto entry = [&](std::int64_t x2, std::uint32_t j2, cplx value) {
                if (x2 >= lo && x2 <= hi)
                    trip.emplace_back(static_cast<int>(r), static_cast<int>((x2 - lo) * words + j2), value);
                else
                    rhs[r] -= value * v.column(x2)[j2];
            };
            entry(x, j, -v.lambda);
            for (SparseReal::InnerIterator it(h, row); it; ++it) {
                const std::int64_t col = it.col();
                entry(wmin + col / words, static_cast<std::uint32_t>(col % words), it.value());
            }
        }
    }
    Eigen::SparseMatrix<cplx> a(rows, cols);
    a.setFromTriplets(trip.begin(), trip.end());

    Eigen::VectorXcd u;
    if (cols <= kMaxScatteringDenseUnknowns) {
        const Eigen::MatrixXcd dense(a);
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(dense);
        cod.setThreshold(1e-10);
        u = cod.solve(rhs);
        v.rank = cod.rank();
        const auto diag = cod.matrixQTZ().diagonal().cwiseAbs();
        v.condition_estimate = v.rank > 0 ? diag[0] / diag[v.rank - 1] : std::numeric_limits<double>::infinity();
    } else {
        // From a zero start the normal-equation CG iterates stay in the row
        // space, so the limit is the minimal-norm least-squares solution. A
        // column-scaling preconditioner would minimize a weighted norm instead.
        Eigen::LeastSquaresConjugateGradient<Eigen::SparseMatrix<cplx>, Eigen::IdentityPreconditioner> solver;
        solver.setTolerance(1e-16);
        solver.setMaxIterations(20000);
        solver.compute(a);
        u = solver.solveWithGuess(rhs, Eigen::VectorXcd::Zero(cols));
        v.iterations = solver.iterations();
        if (solver.info() != Eigen::Success && (a * u - rhs).cwiseAbs().maxCoeff() > tolerance)
            throw ConvergenceError("solve_scattering_vector: least-squares iteration did not converge");
    }
    v.interior.amplitudes = u;
    v.residual = (a * u - rhs).cwiseAbs().maxCoeff();
    v.satisfied = v.residual <= tolerance;
    return v;
}

inline ScatteringEigenvector solve_scattering_vector(int n, double k) {
    return solve_scattering_vector(n, k, tree_band(n));
}

// ---------------------------------------------------------------------------
// Span probabilities

/// Span centre of snake (x, j) in doubled coordinates: 2x + min h + max h.
inline std::int64_t span_center2(std::int64_t x, std::uint32_t j, int n) {
    const Span s = span_of_word(j, n);
    return 2 * x + s.lo + s.hi;
}

struct SpanProbability {
    std::int64_t center2;  // 2x; x is a half-integer when a is odd
    double probability;
    double center() const { return 0.5 * static_cast<double>(center2); }
};

/// p_{x,a}(k) = ⟨μ|P_{x,a}|μ⟩ summed over snake starts in [x_min, x_max],
/// ordered by centre.
inline std::vector<SpanProbability> span_probabilities(const ScatteringEigenvector& v, int a, std::int64_t x_min,
                                                       std::int64_t x_max) {
    detail::require(a >= 1 && a <= v.n, "span_probabilities: a must lie in [1, n]");
    detail::require(x_min <= x_max, "span_probabilities: empty window");
    const std::uint32_t words = 1u << v.n;
    std::vector<std::uint32_t> members;
    for (std::uint32_t j = 0; j < words; ++j)
        if (span_of_word(j, v.n).length() == a) members.push_back(j);
    std::map<std::int64_t, double> acc;
    for (std::int64_t x = x_min; x <= x_max; ++x) {
        const Eigen::VectorXcd col = v.column(x);
        for (std::uint32_t j : members) acc[span_center2(x, j, v.n)] += std::norm(col[j]);
    }
    std::vector<SpanProbability> out;
    out.reserve(acc.size());
    for (const auto& [c, p] : acc) out.push_back({c, p});
    return out;
}

}  // namespace snakewalk
