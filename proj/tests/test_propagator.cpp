#include <gtest/gtest.h>

#include <snakewalk/line_dynamics.hpp>

#include <random>

using namespace snakewalk;

namespace {

Eigen::MatrixXcd random_hermitian(int dim, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> g;
    Eigen::MatrixXcd a(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) a(i, j) = cplx(g(rng), g(rng));
    return (a + a.adjoint()) / 2.0;
}

Eigen::VectorXcd random_unit(int dim, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> g;
    Eigen::VectorXcd v(dim);
    for (int i = 0; i < dim; ++i) v[i] = cplx(g(rng), g(rng));
    return v.normalized();
}

}  // namespace

TEST(Evolve, ZeroTimeIsIdentity) {
    const auto h = random_hermitian(16, 1);
    const auto v = random_unit(16, 2);
    EXPECT_LT((evolve(h, 0.0, v) - v).norm(), 1e-14);
    EXPECT_LT((evolve(h, 0.0, v, Method::chebyshev) - v).norm(), 1e-12);
}

TEST(Evolve, DiagonalPhases) {
    Eigen::VectorXd d(5);
    d << -2.0, -0.5, 0.0, 1.25, 3.0;
    const Eigen::MatrixXcd h = d.cast<cplx>().asDiagonal();
    const auto v = random_unit(5, 3);
    const double t = 1.7;
    for (Method m : {Method::dense, Method::chebyshev}) {
        const auto w = evolve(h, t, v, m);
        for (int i = 0; i < 5; ++i) EXPECT_LT(std::abs(w[i] - std::polar(1.0, -d[i] * t) * v[i]), 1e-9);
    }
}

TEST(Evolve, ChebyshevMatchesDense) {
    const auto h = random_hermitian(64, 4);
    const auto v = random_unit(64, 5);
    const auto a = evolve(h, 3.7, v, Method::dense);
    const auto b = evolve(h, 3.7, v, Method::chebyshev);
    EXPECT_LT((a - b).norm(), 1e-9);
    EXPECT_NEAR(b.norm(), 1.0, 1e-9);
}

TEST(Evolve, SparseInputAndPreconditions) {
    const SparseReal h = line_window_adjacency(2, -10, 10);
    const auto v = random_unit(static_cast<int>(h.rows()), 6);
    const auto a = evolve(h, 2.0, v, Method::dense);
    const auto b = evolve(h, 2.0, v, Method::chebyshev);
    EXPECT_LT((a - b).norm(), 1e-9);

    Eigen::MatrixXcd bad = random_hermitian(4, 7);
    bad(0, 1) += 1.0;
    EXPECT_THROW(evolve(bad, 1.0, random_unit(4, 8)), PreconditionError);
    EXPECT_THROW(evolve(random_hermitian(4, 9), 1.0, Eigen::VectorXcd::Ones(4)), PreconditionError);
    EXPECT_THROW(evolve(random_hermitian(4, 9), 1.0, random_unit(5, 1)), PreconditionError);
}

TEST(BandEvolve, ZeroTimeReproducesEta) {
    const auto band = sample_band(median_band(4), MomentumGrid(512));
    const auto eta = build_eta(band, 0, 20);
    const auto again = band_evolve(band, 0.0, nullptr, -20, 20);
    EXPECT_LT((eta.amplitudes - again.amplitudes).norm(), 1e-12);
    EXPECT_NEAR(eta.norm(), 1.0, 1e-8);
}

TEST(BandEvolve, ConstantBandIsGlobalPhase) {
    auto band = sample_band(median_band(4), MomentumGrid(512));
    const auto before = band_evolve(band, 0.0, nullptr, -20, 20);
    std::fill(band.lambda.begin(), band.lambda.end(), 1.5);
    const auto after = band_evolve(band, 3.0, nullptr, -20, 20);
    EXPECT_LT((after.amplitudes - std::polar(1.0, -4.5) * before.amplitudes).norm(), 1e-12);
}

TEST(BandEvolve, MatchesDenseWindowedWalk) {
    const int n = 2;
    const double t = 5.0;
    const auto band = sample_band(median_band(n), MomentumGrid(1024));
    const auto eta = build_eta(band, 0, 40);
    const SparseReal h = line_window_adjacency(n, -40, 40);
    const Eigen::VectorXcd dense = evolve(h, t, eta.amplitudes);
    const auto fast = band_evolve(band, t, nullptr, -40, 40);
    EXPECT_LT((dense - fast.amplitudes).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(BandEvolve, ReportsTruncation) {
    const auto band = sample_band(median_band(4), MomentumGrid(512));
    EXPECT_THROW(band_evolve(band, 40.0, nullptr, -5, 5), TruncationError);
    EXPECT_THROW(band_evolve(band, 0.0, nullptr, -400, 400), ResolutionError);
}
