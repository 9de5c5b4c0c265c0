#pragma once

// Localized median-band states η_x on the line, their evolution, the
// stationary-phase predictions for ⟨η_{ωt}|e^{-iH_n t}|η_0⟩, and locality
// diagnostics.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "error.hpp"
#include "graph.hpp"
#include "line_spectral.hpp"
#include "momentum.hpp"
#include "propagator.hpp"

namespace snakewalk {

/// e^{-ikx}: the momentum amplitude that centres a band state at x.
inline MomentumAmplitude translation(std::int64_t x) {
    return [x](double k) { return std::polar(1.0, -k * static_cast<double>(x)); };
}

/// η_x on [x - half_width, x + half_width]; the default half width is 3n.
inline ColumnState build_eta(const BandSamples& band, std::int64_t x, std::int64_t half_width = -1,
                             double truncation_tolerance = kTruncationTolerance) {
    if (half_width < 0) half_width = 3 * band.n;
    detail::require(half_width >= 3 * band.n, "build_eta: window must cover [x-3n, x+3n]");
    return band_evolve(band, 0.0, translation(x), x - half_width, x + half_width, nullptr, truncation_tolerance);
}

inline ColumnState build_eta(int n, std::int64_t x, const MomentumGrid& grid) {
    return build_eta(sample_band(median_band(n), grid), x);
}

/// ⟨ψ|φ⟩ of two column states, over the overlap of their windows.
inline cplx inner_product(const ColumnState& a, const ColumnState& b) {
    detail::require(a.n == b.n, "inner_product: word lengths differ");
    cplx s = 0.0;
    for (std::int64_t x = std::max(a.x_min, b.x_min); x <= std::min(a.x_max, b.x_max); ++x)
        s += a.slice(x).dot(b.slice(x));
    return s;
}

/// Largest |λ'| on the grid, from node differences with a 2% margin.
inline double max_group_velocity(const BandSamples& band) {
    const std::size_t K = band.lambda.size();
    double m = 0.0;
    for (std::size_t i = 0; i < K; ++i)
        m = std::max(m, std::abs(band.lambda[(i + 1) % K] - band.lambda[i]) / band.grid.step());
    return 1.02 * m;
}

/// (1/2π)∫ e^{i(kz - λ(k)t)} dk = ⟨η_z|e^{-iH_n t}|η_0⟩ with z = ωt.
inline cplx eta_overlap_evolved(const BandSamples& band, double omega, double t) {
    const double zt = omega * t;
    const double zr = std::round(zt);
    detail::require(std::abs(zt - zr) <= 1e-9 * std::max(1.0, std::abs(zt)), "eta_overlap: ωt must be an integer");
    const double need = 8.0 * (std::abs(t) * max_group_velocity(band) + std::abs(zr));
    if (static_cast<double>(band.grid.size()) < need)
        throw ResolutionError("eta_overlap: grid of " + std::to_string(band.grid.size()) +
                              " nodes cannot resolve the phase; need at least " + std::to_string(need));
    cplx s = 0.0;
    for (std::size_t i = 0; i < band.grid.size(); ++i) {
        const double k = band.grid.node(i);
        s += std::polar(1.0, k * zr - band.lambda[i] * t);
    }
    return s * band.grid.weight();
}

// ---------------------------------------------------------------------------
// Stationary phase

enum class Regime { outside, edge, interior };

inline const char* regime_name(Regime r) {
    switch (r) {
        case Regime::outside: return "outside";
        case Regime::edge: return "edge";
        default: return "interior";
    }
}

struct StationaryPhasePrediction {
    Regime regime = Regime::outside;
    cplx amplitude = 0.0;       // zero in the outside regime (superpolynomially small)
    double k_omega = 0.0;       // stationary point, interior regime only
    double lambda_dd = 0.0;     // λ''(k_ω), interior regime only
    double stationarity = 0.0;  // |ω - λ'(k_ω)|
};

/// Large-t asymptotics of ⟨η_{ωt}|e^{-iH_n t}|η_0⟩.
inline StationaryPhasePrediction stationary_phase_predict(int n, double omega, double t) {
    detail::require(t > 0.0, "stationary_phase_predict: t must be positive");
    const auto band = median_band(n);
    const double speed = 8.0 / (n + 2);
    StationaryPhasePrediction out;
    const double rel = (std::abs(omega) - speed) / speed;
    const cplx i_pow = std::polar(1.0, std::numbers::pi / 2.0 * omega * t);  // i^{ωt}
    if (std::abs(rel) <= 1e-12) {
        out.regime = Regime::edge;
        const double mag = (n + 2) * std::tgamma(1.0 / 3.0) /
                           (2.0 * std::numbers::pi * std::cbrt(4.0 * std::sqrt(3.0) * (3.0 * n * n + 4.0))) /
                           std::cbrt(t);
        // i^{-|ω|t}: the overlap is even in ω.
        out.amplitude = (omega > 0 ? std::conj(i_pow) : i_pow) * mag;
        return out;
    }
    if (rel > 0) {
        out.regime = Regime::outside;
        return out;
    }
    out.regime = Regime::interior;
    // λ' rises from -8/(n+2) at π/2 to 8/(n+2) at 3π/2; bisect λ' - ω.
    double lo = std::numbers::pi / 2, hi = 3 * std::numbers::pi / 2;
    auto g = [&](double k) { return band.jet(k)[1] - omega; };
    double glo = g(lo), ghi = g(hi);
    if (!(glo < 0 && ghi > 0)) throw InternalError("stationary_phase_predict: no stationary point in (π/2, 3π/2)");
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (g(mid) < 0)
            lo = mid;
        else
            hi = mid;
    }
    const double kw = 0.5 * (lo + hi);
    const auto jet = band.jet(kw);
    out.k_omega = kw;
    out.lambda_dd = jet[2];
    out.stationarity = std::abs(jet[1] - omega);
    if (out.stationarity > 1e-10) throw InternalError("stationary_phase_predict: stationary point not resolved");
    const double phase = t * (omega * (kw - std::numbers::pi / 2) - jet[0]) - std::numbers::pi / 4;
    out.amplitude = i_pow * std::sqrt(2.0 / std::numbers::pi) * std::cos(phase) / std::sqrt(t * std::abs(jet[2]));
    return out;
}

/// √(2/π) / √(t|λ''(k_ω)|), the interior-regime envelope.
inline double interior_envelope(const StationaryPhasePrediction& p, double t) {
    return std::sqrt(2.0 / std::numbers::pi) / std::sqrt(t * std::abs(p.lambda_dd));
}

// ---------------------------------------------------------------------------
// Locality and wavefronts

/// Σ_{x≤-n} ‖η_0⟩_x‖₁ + Σ_{x≥n} ‖η_0⟩_x‖₁, over the window [-half_width, half_width].
inline double locality_tail(const BandSamples& band, std::int64_t half_width = -1) {
    const int n = band.n;
    if (half_width < 0) half_width = 6 * n;
    detail::require(half_width >= 6 * n, "locality_tail: window must be at least 6n");
    double tail = 0.0;
    band_evolve_visit(band, 0.0, nullptr, -half_width, half_width, [&](std::int64_t x, const auto& slice) {
        if (x <= -n || x >= n) tail += slice.cwiseAbs().sum();
    });
    return tail;
}

inline double locality_tail(int n, const MomentumGrid& grid) { return locality_tail(sample_band(median_band(n), grid)); }

struct ProfileRow {
    std::int64_t x;
    double probability;
    double l1;
};

/// ‖(e^{-iH_n t}η_0)_x‖₂² for x in the window.
inline std::vector<ProfileRow> wavefront_profile(const BandSamples& band, double t, std::int64_t x_min,
                                                 std::int64_t x_max, BandEvolveReport* report = nullptr) {
    const int n = band.n;
    const double reach = t / 2.0 + 4.0 * n;
    detail::require(x_min <= -reach && x_max >= reach, "wavefront_profile: window must cover ±(t/2 + 4n)");
    std::vector<ProfileRow> rows;
    rows.reserve(static_cast<std::size_t>(x_max - x_min + 1));
    const auto r = band_evolve_visit(band, t, nullptr, x_min, x_max, [&](std::int64_t x, const auto& slice) {
        rows.push_back({x, slice.squaredNorm(), slice.cwiseAbs().sum()});
    });
    if (report) *report = r;
    return rows;
}

/// Default window for wavefront_profile: ±(t/2 + 4n) rounded up, plus 8n of margin.
inline std::int64_t wavefront_half_width(int n, double t) {
    return static_cast<std::int64_t>(std::ceil(t / 2.0 + 4.0 * n)) + 8 * n;
}

// ---------------------------------------------------------------------------
// H_n against its Π_1-restricted part

struct RestrictedEquivalence {
    cplx full;             // windowed dense simulation of H_n
    cplx restricted;       // quadrature over k of the Π_1 block
    double difference;
    double boundary_mass;  // probability in the outer n+1 columns of the dense run
};

/// ⟨x₂,j₂|e^{-iH_n t}|x₁,j₁⟩ two ways: dense A_n(line) on [c - half_width, c + half_width]
/// around c = (x₁+x₂)/2, and (1/2π)∫ e^{ik(x₂-x₁)} ⟨j₂|U e^{-iΦt} U*|j₁⟩ dk.
inline RestrictedEquivalence restricted_equivalence_check(int n, std::int64_t x1, std::int64_t x2, Word j1, Word j2,
                                                          double t, std::int64_t half_width,
                                                          const MomentumGrid& grid = MomentumGrid(1024)) {
    detail::require(std::abs(x1 - x2) > 2 * n, "restricted_equivalence_check: requires |x1 - x2| > 2n");
    detail::require(j1 < (1u << n) && j2 < (1u << n), "restricted_equivalence_check: word out of range");
    const std::int64_t c = (x1 + x2) / 2;
    const std::int64_t x_min = c - half_width, x_max = c + half_width;
    detail::require(x_min <= std::min(x1, x2) - n && x_max >= std::max(x1, x2) + n,
                    "restricted_equivalence_check: window does not contain both snakes");
    const auto h = line_window_adjacency(n, x_min, x_max);
    const std::int64_t dim = std::int64_t{1} << n;
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(h.rows());
    v[(x1 - x_min) * dim + j1] = 1.0;
    const Eigen::VectorXcd w = evolve(h, t, v, h.rows() <= kMaxDenseDimension ? Method::dense : Method::chebyshev);
    RestrictedEquivalence out;
    out.full = w[(x2 - x_min) * dim + j2];
    out.boundary_mass = w.head((n + 1) * dim).squaredNorm() + w.tail((n + 1) * dim).squaredNorm();
    if (out.boundary_mass > 1e-8)
        throw TruncationError("restricted_equivalence_check: amplitude reaches the window edge");

    cplx sum = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double k = grid.node(i);
        const Eigen::MatrixXcd u = u_matrix<LineModel>(n, k);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(phi_matrix_generic<LineModel>(n, k));
        Eigen::VectorXcd a = es.eigenvectors().adjoint() * u.row(j1).adjoint();
        for (Eigen::Index q = 0; q < a.size(); ++q) a[q] *= std::polar(1.0, -es.eigenvalues()[q] * t);
        const cplx amp = u.row(j2) * (es.eigenvectors() * a);
        sum += std::polar(1.0, k * static_cast<double>(x2 - x1)) * amp;
    }
    out.restricted = sum * grid.weight();
    out.difference = std::abs(out.full - out.restricted);
    return out;
}

}  // namespace snakewalk
