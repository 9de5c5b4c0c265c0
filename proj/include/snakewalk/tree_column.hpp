#pragma once

// The binary-tree band: Ĥ_{n,k}, its p-equation and median band λ̃, the
// column Hamiltonian H̃_n on a finite x-window, η̂ and ξ packets, and the
// span observable Q_n.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include "error.hpp"
#include "line_dynamics.hpp"
#include "line_spectral.hpp"
#include "momentum.hpp"
#include "parallel.hpp"
#include "propagator.hpp"

namespace snakewalk {

struct TreeModel {
    static constexpr const char* name = "tree";
    static constexpr double chain = 3.0;
    static constexpr double s2 = 1.41421356237309504880;
    static constexpr std::array<double, 4> move_weights{s2, 2.0, 1.0, s2};
    static constexpr double a = 0.81649658092772603273;  // √(2/3)
    static constexpr double b = 0.57735026918962576451;  // √(1/3)
    static constexpr std::array<double, 2> u0{a, b};     // times (e^{-ik}, e^{ik})
    static constexpr std::array<double, 2> u1{b, -a};
    static constexpr std::array<double, 2> v0{b, a};
    static constexpr std::array<double, 2> v1{a, -b};

    template <class T>
    static T diag(const T& k) {
        using std::cos;
        return (4.0 * s2) * cos(k);
    }
    template <class T>
    static T coupling_sq(const T& k) {
        using std::sin;
        T s = sin(k);
        return 1.0 + 8.0 * (s * s);
    }
    static cplx coupling(double k) { return {3.0 * std::sin(k), std::cos(k)}; }

    static double chain_minus_diag(double p, double k) { return 6.0 * std::cos(p) - 4.0 * s2 * std::cos(k); }
    static double two_a_minus_d(double k) { return 6.0 - 4.0 * s2 * std::cos(k); }
    static double two_a_plus_d(double k) { return 6.0 + 4.0 * s2 * std::cos(k); }
    // |c|² ≥ 1, so the end node never decouples.
    static bool degenerate(double) { return false; }
};

using TreeBand = BandFunction<TreeModel>;

inline SparseComplex build_tree_Hnk(int n, double k) { return detail::momentum_hamiltonian<TreeModel>(n, k); }

inline std::vector<double> solve_tree_p_equation(int n, double k) { return solve_p_roots<TreeModel>(n, k); }

/// 6(3 cos p - 2√2 cos k) sin((n+1)p) - (1 + 8 sin²k) sin(np).
inline double tree_p_equation_residual(int n, double k, double p) { return p_function<TreeModel>(n, p, k); }

/// λ̃(k): the median k-dependent eigenvalue of Ĥ_{n,k}.
inline TreeBand tree_band(int n) {
    detail::require(n >= 2 && n % 2 == 0, "tree_band: n must be even and at least 2");
    return TreeBand(n, n / 2);
}

/// Band used for wave packets: the median for even n; for odd n, where the two
/// middle bands move equally fast, the upper one.
inline TreeBand packet_band(int n) {
    detail::require(n >= 1, "packet_band: n must be at least 1");
    return n % 2 == 0 ? tree_band(n) : TreeBand(n, (n - 1) / 2);
}

/// Λ̃(k) = 6 arctan(12√2 cos k / (1 + 8 sin²k)).
inline double TreeLambda(double k) {
    const double s = std::sin(k);
    return 6.0 * std::atan(12.0 * TreeModel::s2 * std::cos(k) / (1.0 + 8.0 * s * s));
}
inline double TreeLambda_d1(double k) {
    const double c = std::cos(k);
    return -72.0 * TreeModel::s2 * std::sin(k) / (9.0 + 8.0 * c * c);
}
inline double TreeLambda_d2(double k) {
    const double c = std::cos(k);
    const double q = 9.0 + 8.0 * c * c;
    return -72.0 * TreeModel::s2 * c * (25.0 - 8.0 * c * c) / (q * q);
}

// ---------------------------------------------------------------------------
// H̃_n on a window

namespace detail {

inline int signed_weight(std::uint32_t j, int bits) {
    const int ones = std::popcount(j);
    return ones - (bits - ones);
}

}  // namespace detail

/// Couplings of H̃_n between columns x and x ± 1, hard-truncated to [x_min, x_max].
///
/// For j of n-1 bits and s = |j|_±, the four families are
///   A (x, j1) ↔ (x+1, 0j),  B (x, j0) ↔ (x-1, 1j),
///   C (x, j0) ↔ (x+1, 0j),  D (x, j1) ↔ (x-1, 1j),
/// weighted 2/1/√2/√2 for x ≤ -max(s,0), √2/√2/(2 or 1)/(1 or 2) up to
/// x ≤ -min(s,0), and 1/2/√2/√2 beyond.
inline SparseReal column_hamiltonian(int n, std::int64_t x_min, std::int64_t x_max) {
    detail::require(n >= 1 && n <= kMaxMomentumN, "column_hamiltonian: n outside [1, 20]");
    detail::require(x_max - x_min + 1 >= 4 * n, "column_hamiltonian: window shorter than 4n");
    const std::int64_t words = std::int64_t{1} << n;
    const std::uint32_t half = 1u << (n - 1);
    const std::int64_t dim = (x_max - x_min + 1) * words;
    detail::require<CapacityError>(dim < std::int64_t{1} << 30, "column_hamiltonian: window too large");
    const double s2 = TreeModel::s2;
    auto idx = [&](std::int64_t x, std::uint32_t j) { return (x - x_min) * words + j; };

    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(dim) * 4);
    auto link = [&](std::int64_t x1, std::uint32_t w1, std::int64_t x2, std::uint32_t w2, double v) {
        if (x1 < x_min || x1 > x_max || x2 < x_min || x2 > x_max) return;
        t.emplace_back(static_cast<int>(idx(x1, w1)), static_cast<int>(idx(x2, w2)), v);
        t.emplace_back(static_cast<int>(idx(x2, w2)), static_cast<int>(idx(x1, w1)), v);
    };
    for (std::uint32_t j = 0; j < half; ++j) {
        const int s = detail::signed_weight(j, n - 1);
        const std::uint32_t j0 = j << 1, j1 = (j << 1) | 1u, zj = j, oj = half | j;
        const std::int64_t deep_end = -std::max(s, 0);
        const std::int64_t mid_end = -std::min(s, 0);
        for (std::int64_t x = x_min; x <= x_max; ++x) {
            double wa, wb, wc, wd;
            if (x <= deep_end) {
                wa = 2.0, wb = 1.0, wc = s2, wd = s2;
            } else if (x <= mid_end) {
                wa = s2, wb = s2;
                wc = s > 0 ? 2.0 : 1.0;
                wd = s > 0 ? 1.0 : 2.0;
            } else {
                wa = 1.0, wb = 2.0, wc = s2, wd = s2;
            }
            link(x, j1, x + 1, zj, wa);
            link(x, j0, x - 1, oj, wb);
            link(x, j0, x + 1, zj, wc);
            link(x, j1, x - 1, oj, wd);
        }
    }
    SparseReal h(dim, dim);
    h.setFromTriplets(t.begin(), t.end());
    return h;
}

/// Position-space form of Ĥ_n = ∫|k̃⟩⟨k̃| ⊗ Ĥ_{n,k} dk on a window: each
/// e^{ik}|a⟩⟨b| of Ĥ_{n,k} becomes Σ_x |x-1, a⟩⟨x, b|.
inline SparseReal tree_position_stencil(int n, std::int64_t x_min, std::int64_t x_max) {
    detail::require(n >= 1 && n <= kMaxMomentumN, "tree_position_stencil: n outside [1, 20]");
    const std::int64_t words = std::int64_t{1} << n;
    const std::uint32_t half = 1u << (n - 1);
    const std::int64_t dim = (x_max - x_min + 1) * words;
    detail::require<CapacityError>(dim < std::int64_t{1} << 30, "tree_position_stencil: window too large");
    const auto& w = TreeModel::move_weights;
    std::vector<Eigen::Triplet<double>> t;
    auto link = [&](std::int64_t x, std::uint32_t a, std::uint32_t b, double v) {
        // |x-1, a⟩⟨x, b| + h.c.
        if (x - 1 < x_min || x > x_max) return;
        const auto r = static_cast<int>((x - 1 - x_min) * words + a);
        const auto c = static_cast<int>((x - x_min) * words + b);
        t.emplace_back(r, c, v);
        t.emplace_back(c, r, v);
    };
    for (std::uint32_t j = 0; j < half; ++j) {
        const std::uint32_t j0 = j << 1, j1 = (j << 1) | 1u, zj = j, oj = half | j;
        for (std::int64_t x = x_min; x <= x_max; ++x) {
            link(x, j0, zj, w[0]);
            link(x, j1, zj, w[1]);
            link(x, oj, j0, w[2]);
            link(x, oj, j1, w[3]);
        }
    }
    SparseReal h(dim, dim);
    h.setFromTriplets(t.begin(), t.end());
    return h;
}

// ---------------------------------------------------------------------------
// η̂ and ξ

inline BandSamples sample_tree_band(int n, const MomentumGrid& grid) { return sample_band(tree_band(n), grid); }

/// η̂_x on [x - 3n, x + 3n].
inline ColumnState build_eta_hat(const BandSamples& band, std::int64_t x) { return build_eta(band, x); }

inline ColumnState build_eta_hat(int n, std::int64_t x, const MomentumGrid& grid) {
    return build_eta(sample_tree_band(n, grid), x);
}

struct WavePacketSpec {
    std::int64_t x0 = 0;
    double k0 = 1.5 * std::numbers::pi;
    double sigma = 0.05;
};

inline void validate(const WavePacketSpec& s) {
    detail::require(s.k0 > std::numbers::pi && s.k0 < 2.0 * std::numbers::pi, "wave packet: k0 must lie in (π, 2π)");
    detail::require(s.sigma > 0.0 && std::isfinite(s.sigma), "wave packet: sigma must be positive");
}

/// Momentum amplitude of ξ: √(2π) √(N(k; k0, σ)) e^{-ikx0} / √erf(π/(√2σ)),
/// with k read in [k0 - π, k0 + π).
inline MomentumAmplitude xi_amplitude(const WavePacketSpec& wp) {
    validate(wp);
    const double sigma = wp.sigma;
    const double norm = std::sqrt(2.0 * std::numbers::pi / std::erf(std::numbers::pi / (std::numbers::sqrt2 * sigma)));
    return [wp, sigma, norm](double k) {
        double d = std::remainder(k - wp.k0, 2.0 * std::numbers::pi);
        if (d >= std::numbers::pi) d -= 2.0 * std::numbers::pi;
        const double density =
            std::exp(-d * d / (2.0 * sigma * sigma)) / (sigma * std::sqrt(2.0 * std::numbers::pi));
        return std::polar(norm * std::sqrt(density), -k * static_cast<double>(wp.x0));
    };
}

/// Half width of the window ξ needs: 1/σ² + 3n.
inline std::int64_t xi_half_width(const WavePacketSpec& wp, int n) {
    return static_cast<std::int64_t>(std::ceil(1.0 / (wp.sigma * wp.sigma))) + 3 * n;
}

inline ColumnState build_xi(const WavePacketSpec& wp, const BandSamples& band, std::int64_t x_min,
                            std::int64_t x_max, BandEvolveReport* report = nullptr) {
    const std::int64_t w = xi_half_width(wp, band.n);
    detail::require(x_min <= wp.x0 - w && x_max >= wp.x0 + w, "build_xi: window must cover x0 ± (1/σ² + 3n)");
    return band_evolve(band, 0.0, xi_amplitude(wp), x_min, x_max, report);
}

inline ColumnState build_xi(const WavePacketSpec& wp, const BandSamples& band) {
    const std::int64_t w = xi_half_width(wp, band.n);
    return build_xi(wp, band, wp.x0 - w, wp.x0 + w);
}

/// ⟨η̂_{x0+z}|ξ⟩ for z in [-z_max, z_max], by quadrature of the Gaussian weight.
inline std::vector<cplx> xi_coefficients(const WavePacketSpec& wp, std::int64_t z_max,
                                         const MomentumGrid& grid = MomentumGrid(4096)) {
    const auto f = xi_amplitude(wp);
    std::vector<cplx> out(static_cast<std::size_t>(2 * z_max + 1));
    for (std::int64_t z = -z_max; z <= z_max; ++z) {
        cplx s = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double k = grid.node(i);
            s += std::polar(1.0, k * static_cast<double>(wp.x0 + z)) * f(k);
        }
        out[z + z_max] = s * grid.weight();
    }
    return out;
}

/// √(C(2m, m+z) / 4^m) with m = ⌊1/(2σ²)⌋: the binomial picture of |⟨η̂_{x0+z}|ξ⟩|.
inline double xi_binomial_magnitude(double sigma, std::int64_t z) {
    const auto m = static_cast<std::int64_t>(std::floor(1.0 / (2.0 * sigma * sigma)));
    if (std::abs(z) > m) return 0.0;
    const double lg = std::lgamma(2.0 * m + 1) - std::lgamma(static_cast<double>(m + z) + 1) -
                      std::lgamma(static_cast<double>(m - z) + 1) - 2.0 * m * std::log(2.0);
    return std::exp(0.5 * lg);
}

// ---------------------------------------------------------------------------
// Span

struct Span {
    int lo = 0;
    int hi = 0;
    int length() const { return hi - lo; }
};

/// Range of the partial sums of ±1 steps (+1 for a 1 bit), including the start.
inline Span span_of_word(std::uint32_t j, int n) {
    Span s;
    int z = 0;
    for (int l = 1; l <= n; ++l) {
        z += ((j >> (n - l)) & 1u) ? 1 : -1;
        s.lo = std::min(s.lo, z);
        s.hi = std::max(s.hi, z);
    }
    return s;
}

/// Diagonal of Q_n in the word basis.
inline Eigen::VectorXd span_observable(int n) {
    detail::require<CapacityError>(n >= 1 && n <= 24, "span_observable: n outside [1, 24]");
    Eigen::VectorXd q(std::int64_t{1} << n);
    for (std::int64_t j = 0; j < q.size(); ++j) q[j] = span_of_word(static_cast<std::uint32_t>(j), n).length();
    return q;
}

/// ⟨χ|(I ⊗ Q_n)|χ⟩ / ⟨χ|χ⟩.
inline double expected_span(const ColumnState& state) {
    const Eigen::VectorXd q = span_observable(state.n);
    double num = 0.0, den = 0.0;
    for (std::int64_t x = state.x_min; x <= state.x_max; ++x) {
        const auto s = state.slice(x);
        num += s.cwiseAbs2().dot(q);
        den += s.squaredNorm();
    }
    detail::require(den > 0.0, "expected_span: zero state");
    return num / den;
}

struct SpanProfileRow {
    double k;
    double value;
};

/// ⟨ψ̂(k)|Q_n|ψ̂(k)⟩ at every grid node; the grid may be coarse.
inline std::vector<SpanProfileRow> band_span_profile(int n, const std::vector<double>& ks) {
    const auto band = tree_band(n);
    const WordExpansion e = word_expansion<TreeModel>(n);
    const Eigen::VectorXd q = span_observable(n);
    std::vector<SpanProfileRow> out(ks.size());
    parallel_for(ks.size(), [&](std::size_t, std::size_t b, std::size_t end) {
        for (std::size_t i = b; i < end; ++i) {
            const Eigen::VectorXcd psi = expand_psi(e, ks[i], band.eigvec(ks[i]));
            out[i] = {ks[i], psi.cwiseAbs2().dot(q)};
        }
    });
    return out;
}

inline std::vector<SpanProfileRow> band_span_profile(int n, const MomentumGrid& grid) {
    return band_span_profile(n, grid.nodes());
}

inline double profile_min(const std::vector<SpanProfileRow>& rows) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& r : rows) m = std::min(m, r.value);
    return m;
}
inline double profile_max(const std::vector<SpanProfileRow>& rows) {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& r : rows) m = std::max(m, r.value);
    return m;
}

/// −i √(2/(n+2)) Σ_l (v1 v1)^{⊗l} (v0 v0)^{⊗(n/2-l)}: ψ̂(π/2) in closed form.
inline Eigen::VectorXcd tree_psi_half_pi(int n) {
    detail::require(n >= 2 && n % 2 == 0 && n <= kMaxMomentumN, "tree_psi_half_pi: n must be even in [2, 20]");
    const std::uint32_t words = 1u << n;
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(words);
    const auto& v0 = TreeModel::v0;
    const auto& v1 = TreeModel::v1;
    for (int l = 0; l <= n / 2; ++l) {
        for (std::uint32_t j = 0; j < words; ++j) {
            double a = 1.0;
            for (int pos = 1; pos <= n; ++pos) {
                const unsigned bit = (j >> (n - pos)) & 1u;
                a *= (pos <= 2 * l) ? v1[bit] : v0[bit];
            }
            out[j] += a;
        }
    }
    return cplx(0.0, -std::sqrt(2.0 / (n + 2))) * out;
}

// ---------------------------------------------------------------------------
// Packet propagation

struct PacketProfile {
    std::vector<ProfileRow> rows;
    BandEvolveReport report;
    std::int64_t peak_x = 0;
    double mean_x = 0.0;
    double norm_sq = 0.0;
};

/// Position distribution of e^{-iĤ_n t}ξ on [x_min, x_max].
inline PacketProfile packet_propagation_profile(const WavePacketSpec& wp, double t, const BandSamples& band,
                                                std::int64_t x_min, std::int64_t x_max) {
    validate(wp);
    PacketProfile out;
    double best = -1.0, sx = 0.0;
    out.report = band_evolve_visit(band, t, xi_amplitude(wp), x_min, x_max, [&](std::int64_t x, const auto& slice) {
        const double p = slice.squaredNorm();
        out.rows.push_back({x, p, slice.cwiseAbs().sum()});
        if (p > best) best = p, out.peak_x = x;
        out.norm_sq += p;
        sx += p * static_cast<double>(x);
    });
    out.mean_x = sx / out.norm_sq;
    return out;
}

/// Window for packet_propagation_profile: x0 + [min(0, v t), max(0, v t)]
/// widened by the packet width 1/σ² + 3n + 2n on each side.
inline std::pair<std::int64_t, std::int64_t> packet_window(const WavePacketSpec& wp, int n, double t,
                                                           double velocity) {
    const double shift = velocity * t;
    const std::int64_t pad = xi_half_width(wp, n) + 2 * n;
    return {wp.x0 + static_cast<std::int64_t>(std::floor(std::min(0.0, shift))) - pad,
            wp.x0 + static_cast<std::int64_t>(std::ceil(std::max(0.0, shift))) + pad};
}

}  // namespace snakewalk
