#include <gtest/gtest.h>

#include <snakewalk/tree_column.hpp>

#include <random>

using namespace snakewalk;

namespace {

constexpr double pi = std::numbers::pi;

std::vector<double> k_grid(int count) {
    std::vector<double> ks;
    for (int i = 0; i < count; ++i) ks.push_back((i + 0.5) * 2.0 * pi / count);
    return ks;
}

const BandSamples& tree8() {
    static const BandSamples b = sample_tree_band(8, MomentumGrid(4096));
    return b;
}

}  // namespace

TEST(TreeHamiltonian, HatBasisForm) {
    for (int n : {2, 3}) {
        const double k = 0.9;
        const auto b = hat_basis<TreeModel>(n, k);
        const Eigen::MatrixXcd h(build_tree_Hnk(n, k));
        EXPECT_LT((b.vectors.adjoint() * b.vectors - Eigen::MatrixXcd::Identity(1 << n, 1 << n)).cwiseAbs().maxCoeff(),
                  1e-12);
        EXPECT_LT((b.vectors.adjoint() * h * b.vectors - hat_basis_form<TreeModel>(n, k)).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(TreeHamiltonian, HermitianAndBounded) {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(0.0, 2 * pi);
    for (int i = 0; i < 5; ++i) {
        const Eigen::MatrixXcd h(build_tree_Hnk(5, u(rng)));
        EXPECT_LT((h - h.adjoint()).cwiseAbs().maxCoeff(), 1e-15);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
        EXPECT_LE(es.eigenvalues().cwiseAbs().maxCoeff(), 6.0 + 1e-12);
    }
}

TEST(TreePEquation, MatchesDensePhi) {
    for (int n = 1; n <= 10; ++n) {
        for (double k : k_grid(64)) {
            const auto p = solve_tree_p_equation(n, k);
            ASSERT_EQ(p.size(), static_cast<std::size_t>(n + 1)) << "n=" << n << " k=" << k;
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(phi_matrix_generic<TreeModel>(n, k));
            for (int i = 0; i <= n; ++i) {
                EXPECT_NEAR(6.0 * std::cos(p[n - i]), es.eigenvalues()[i], 1e-10);
                EXPECT_LT(std::abs(tree_p_equation_residual(n, k, p[i])), 1e-10);
            }
        }
    }
}

TEST(TreePEquation, RootsMoveContinuously) {
    const MomentumGrid grid(512);
    std::vector<double> prev = solve_tree_p_equation(8, grid.node(0));
    double jump = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const auto p = solve_tree_p_equation(8, grid.node(i));
        for (std::size_t r = 0; r < p.size(); ++r) jump = std::max(jump, std::abs(p[r] - prev[r]));
        prev = p;
    }
    EXPECT_LT(jump, 10.0 / grid.size());
}

TEST(TreeBand, Velocities) {
    for (int n = 2; n <= 20; n += 2)
        EXPECT_NEAR(band_derivatives(tree_band(n), 1.5 * pi, 1), 8.0 * std::sqrt(2.0) / (n + 2), 1e-9) << "n=" << n;
    const auto b8 = tree_band(8);
    EXPECT_NEAR(band_derivatives(b8, 7 * pi / 6, 1), 0.42, 0.01);
    EXPECT_NEAR(band_derivatives(b8, 1.5 * pi, 1), 1.13, 0.01);
}

TEST(TreeBand, SymmetryAndHalfPi) {
    const auto b = tree_band(8);
    EXPECT_NEAR(b.eigenvalue(pi / 2), 0.0, 1e-10);
    for (double k : {0.2, 1.1, 2.5}) EXPECT_NEAR(b.eigenvalue(k), b.eigenvalue(-k), 1e-10);
}

TEST(TreeBand, ScaledLimitBounds) {
    for (int n : {8, 12, 16}) {
        const auto b = tree_band(n);
        const MomentumGrid grid(256);
        for (std::size_t i = 0; i < grid.size() / 2; ++i) {
            const double k = grid.node(i);
            const double d = b.jet(k)[1];
            const double lo = TreeLambda_d1(k) / n * (1 + 2.0 / n), hi = TreeLambda_d1(k) / n * (1 - 2.0 / n);
            EXPECT_GE(d, std::min(lo, hi) - 1e-12) << "n=" << n << " k=" << k;
            EXPECT_LE(d, std::max(lo, hi) + 1e-12) << "n=" << n << " k=" << k;
        }
    }
}

TEST(TreeBand, OddLengthPacketBand) {
    // The two middle bands move equally fast at 3π/2.
    for (int n : {3, 5}) {
        const TreeBand lo(n, (n - 1) / 2), hi(n, (n + 1) / 2);
        EXPECT_NEAR(lo.jet(1.5 * pi)[1], hi.jet(1.5 * pi)[1], 1e-9);
        EXPECT_EQ(packet_band(n).rank(), (n - 1) / 2);
    }
}

TEST(ColumnHamiltonian, SymmetricAndStencilDeepInTree) {
    const int n = 3;
    const Eigen::MatrixXd h(column_hamiltonian(n, -20, 20));
    const Eigen::MatrixXd s(tree_position_stencil(n, -20, 20));
    EXPECT_EQ((h - h.transpose()).cwiseAbs().maxCoeff(), 0.0);
    double worst = 0.0;
    for (int x = -18; x <= -2 * n; ++x)
        for (int j = 0; j < 8; ++j) worst = std::max(worst, (h.row((x + 20) * 8 + j) - s.row((x + 20) * 8 + j)).cwiseAbs().maxCoeff());
    EXPECT_LT(worst, 1e-14);
    EXPECT_THROW(column_hamiltonian(n, -3, 3), PreconditionError);
}

TEST(Packets, XiNormalized) {
    const WavePacketSpec wp{0, 1.5 * pi, 0.05};
    EXPECT_NEAR(build_xi(wp, tree8()).norm(), 1.0, 1e-6);
    EXPECT_THROW(validate(WavePacketSpec{0, 0.5 * pi, 0.05}), PreconditionError);
}

TEST(Packets, EtaHatOrthonormal) {
    const auto band = sample_tree_band(4, MomentumGrid(1024));
    std::vector<ColumnState> e;
    for (int x = 0; x <= 6; ++x) e.push_back(build_eta_hat(band, x));
    for (std::size_t a = 0; a < e.size(); ++a)
        for (std::size_t b = 0; b < e.size(); ++b)
            EXPECT_NEAR(std::abs(inner_product(e[a], e[b]) - (a == b ? 1.0 : 0.0)), 0.0, 1e-6);
}

TEST(Packets, BinomialPicture) {
    const WavePacketSpec wp{0, 1.5 * pi, 0.25};
    const auto c = xi_coefficients(wp, 12);
    double peak = 0.0, diff = 0.0;
    for (int z = -12; z <= 12; ++z) {
        const double b = xi_binomial_magnitude(0.25, z);
        peak = std::max(peak, b);
        diff = std::max(diff, std::abs(std::abs(c[z + 12]) - b));
    }
    EXPECT_LT(diff, 0.02 * peak);
}

TEST(Span, Words) {
    EXPECT_EQ(span_of_word(0b1111, 4).length(), 4);
    EXPECT_EQ(span_of_word(0b1111, 4).lo, 0);
    EXPECT_EQ(span_of_word(0b101010, 6).length(), 1);
    std::mt19937 rng(11);
    for (int i = 0; i < 100; ++i) {
        const std::uint32_t j = rng() & 0xfff;
        EXPECT_GE(span_of_word(j, 12).length(), std::abs(2 * std::popcount(j) - 12));
    }
}

TEST(Span, HalfPiClosedForm) {
    for (int n : {2, 4, 8, 12}) EXPECT_LT((tree_band(n).psi(pi / 2) - tree_psi_half_pi(n)).norm(), 1e-10) << "n=" << n;
}

TEST(Span, PacketSpanAboveProfileMinimum) {
    const WavePacketSpec wp{0, 1.5 * pi, 0.05};
    const double span = expected_span(build_xi(wp, tree8()));
    EXPECT_GE(span, profile_min(band_span_profile(8, MomentumGrid(256))) - 1e-6);
    EXPECT_GE(span, 0.0);
    EXPECT_LE(span, 8.0);
}

TEST(Span, ProfileGrowsWithLength) {
    double prev = 0.0;
    for (int n = 2; n <= 20; n += 2) {
        const double m = profile_max(band_span_profile(n, k_grid(16)));
        EXPECT_GT(m, prev) << "n=" << n;
        prev = m;
    }
}

TEST(Propagation, Displacements) {
    const auto b8 = tree_band(8);
    for (double k0 : {1.5 * pi, 7 * pi / 6}) {
        const WavePacketSpec wp{0, k0, 0.05};
        const double v = b8.jet(k0)[1];
        const auto [lo, hi] = packet_window(wp, 8, 100.0, v);
        const auto start = packet_propagation_profile(wp, 0.0, tree8(), lo, hi);
        const auto end = packet_propagation_profile(wp, 100.0, tree8(), lo, hi);
        EXPECT_NEAR(end.norm_sq, 1.0, 1e-6);
        EXPECT_NEAR(static_cast<double>(end.peak_x - start.peak_x), 100.0 * v, 10.0);
        EXPECT_LT(std::abs((end.mean_x - start.mean_x) / 100.0 - v) / v, 0.1);
    }
}
