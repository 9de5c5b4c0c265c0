#pragma once

// Momentum grids and position-space states over (x, j) columns.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

#include "error.hpp"

namespace snakewalk {

using cplx = std::complex<double>;

/// Uniform Riemann-sum nodes on [0, 2π).
///
/// Nodes sit at (i + offset) 2π/K. The default half-step offset keeps every
/// node away from k ≡ 0 mod π.
class MomentumGrid {
public:
    explicit MomentumGrid(std::size_t K = 4096, double offset = 0.5) : K_(K), offset_(offset) {
        detail::require(K >= 256 && K % 2 == 0, "MomentumGrid: K must be even and at least 256");
        detail::require(offset >= 0.0 && offset < 1.0, "MomentumGrid: offset must lie in [0, 1)");
    }

    std::size_t size() const { return K_; }
    double offset() const { return offset_; }
    double step() const { return 2.0 * std::numbers::pi / static_cast<double>(K_); }
    /// Quadrature weight of (1/2π)∫ dk, i.e. 1/K.
    double weight() const { return 1.0 / static_cast<double>(K_); }
    double node(std::size_t i) const { return (static_cast<double>(i) + offset_) * step(); }

    std::vector<double> nodes() const {
        std::vector<double> out(K_);
        for (std::size_t i = 0; i < K_; ++i) out[i] = node(i);
        return out;
    }

private:
    std::size_t K_;
    double offset_;
};

/// Amplitudes over (x, j) with x in [x_min, x_max] and j a word of n bits.
/// Index is (x - x_min) * 2^n + j.
struct ColumnState {
    int n = 0;
    std::int64_t x_min = 0;
    std::int64_t x_max = -1;
    Eigen::VectorXcd amplitudes;

    static ColumnState zeros(int n, std::int64_t x_min, std::int64_t x_max) {
        detail::require(n >= 1 && n <= 24, "ColumnState: n out of range");
        detail::require(x_max >= x_min, "ColumnState: empty window");
        ColumnState s;
        s.n = n;
        s.x_min = x_min;
        s.x_max = x_max;
        s.amplitudes = Eigen::VectorXcd::Zero((x_max - x_min + 1) << n);
        return s;
    }

    std::int64_t words() const { return std::int64_t{1} << n; }
    std::int64_t width() const { return x_max - x_min + 1; }
    bool contains(std::int64_t x) const { return x >= x_min && x <= x_max; }
    Eigen::Index index(std::int64_t x, std::uint32_t j) const {
        return static_cast<Eigen::Index>((x - x_min) * words() + j);
    }

    auto slice(std::int64_t x) { return amplitudes.segment((x - x_min) * words(), words()); }
    auto slice(std::int64_t x) const { return amplitudes.segment((x - x_min) * words(), words()); }

    /// ‖|χ⟩_x‖₂², the probability that a measured snake starts at x.
    double probability(std::int64_t x) const { return contains(x) ? slice(x).squaredNorm() : 0.0; }
    /// ‖|χ⟩_x‖₁.
    double l1(std::int64_t x) const { return contains(x) ? slice(x).cwiseAbs().sum() : 0.0; }
    double norm() const { return amplitudes.norm(); }

    std::vector<double> profile() const {
        std::vector<double> p(static_cast<std::size_t>(width()));
        for (std::int64_t x = x_min; x <= x_max; ++x) p[x - x_min] = probability(x);
        return p;
    }
};

}  // namespace snakewalk
