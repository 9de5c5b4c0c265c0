#include <gtest/gtest.h>

#include <snakewalk/scattering.hpp>

using namespace snakewalk;

namespace {

constexpr double pi = std::numbers::pi;

const ScatteringEigenvector& mu10() {
    static const ScatteringEigenvector v = solve_scattering_vector(10, 1.5 * pi);
    return v;
}

double probability_at(const std::vector<SpanProbability>& rows, std::int64_t center2) {
    for (const auto& r : rows)
        if (r.center2 == center2) return r.probability;
    return 0.0;
}

}  // namespace

TEST(Coefficients, SpecialMomenta) {
    const auto s = scattering_coefficients(1.5 * pi);
    EXPECT_NEAR(s.transmission(), 8.0 / 9.0, 1e-15);
    EXPECT_NEAR(s.reflection(), 1.0 / 9.0, 1e-15);
    EXPECT_NEAR(scattering_coefficients(pi).transmission(), 0.0, 1e-15);
}

TEST(Coefficients, UnitarityAndClosedForm) {
    const MomentumGrid grid(1024);
    for (double k : grid.nodes()) {
        const auto s = scattering_coefficients(k);
        EXPECT_NEAR(s.reflection() + s.transmission(), 1.0, 1e-12);
        EXPECT_NEAR(s.transmission(), transmission_probability(k), 1e-12);
    }
}

TEST(Coefficients, ExtremalAtThreeHalvesPi) {
    const MomentumGrid grid(4096);
    EXPECT_LE(std::abs(transmission_peak(grid) - 1.5 * pi), grid.step());
    double best = std::numeric_limits<double>::infinity(), arg = 0.0;
    for (double k : grid.nodes()) {
        if (k <= pi + 0.05 || k >= 2 * pi - 0.05) continue;
        const double l = scattering_coefficients(k).effective_length;
        if (l < best) best = l, arg = k;
    }
    EXPECT_LE(std::abs(arg - 1.5 * pi), grid.step());
}

TEST(Eigenvector, SmallCaseResidualAndBoundary) {
    const int n = 2;
    const auto v = solve_scattering_vector(n, 1.5 * pi);
    EXPECT_TRUE(v.satisfied);
    EXPECT_LT(v.residual, 1e-8);
    EXPECT_LT(eigen_residual(v, -3 * n, 3 * n), 1e-8);
    const auto s = v.assemble(-3 * n, 3 * n);
    const Eigen::VectorXcd ansatz = std::polar(1.0, -1.5 * pi * n) * v.psi_in +
                                    v.coefficients.R * std::polar(1.0, 1.5 * pi * n) * v.psi_reflected;
    EXPECT_LT((s.slice(-n) - ansatz).norm(), 1e-12);
}

TEST(Eigenvector, ResidualsAcrossMomenta) {
    for (int n : {2, 4, 6}) {
        const auto band = tree_band(n);
        for (int i = 0; i < 16; ++i) {
            const double k = pi + (i + 0.5) * pi / 16;
            const auto v = solve_scattering_vector(n, k, band);
            EXPECT_LT(v.residual, 1e-8) << "n=" << n << " k=" << k;
            EXPECT_LT(eigen_residual(v, -3 * n, 3 * n), 1e-8) << "n=" << n << " k=" << k;
        }
    }
}

TEST(Eigenvector, Preconditions) {
    EXPECT_THROW(solve_scattering_vector(3, 1.5 * pi), PreconditionError);
    EXPECT_THROW(solve_scattering_vector(4, 1.5 * pi, tree_band(6)), PreconditionError);
}

TEST(SpanProbabilities, NoUnitSpanAtLengthTen) {
    const auto& v = mu10();
    EXPECT_LT(v.residual, 1e-8);
    double worst = 0.0;
    for (const auto& r : span_probabilities(v, 1, -40, 40)) worst = std::max(worst, r.probability);
    EXPECT_LT(worst, 1e-20);
}

TEST(SpanProbabilities, ClassesPartitionEachColumn) {
    const auto& v = mu10();
    for (std::int64_t x : {-15, -3, 0, 4, 12}) {
        double total = 0.0;
        for (int a = 1; a <= v.n; ++a)
            for (const auto& r : span_probabilities(v, a, x, x)) total += r.probability;
        EXPECT_NEAR(total, v.column(x).squaredNorm(), 1e-8) << "x=" << x;
    }
}

TEST(SpanProbabilities, ShortSpansPeakNearGluedPart) {
    const auto& v = mu10();
    const auto p2 = span_probabilities(v, 2, -40, 40);
    const auto p10 = span_probabilities(v, 10, -40, 40);
    const double mid2 = probability_at(p2, 0), far2 = std::max(probability_at(p2, -40), probability_at(p2, 40));
    const double mid10 = probability_at(p10, 0), far10 = std::min(probability_at(p10, -40), probability_at(p10, 40));
    EXPECT_GT(mid2, 2.0 * far2);
    EXPECT_LT(mid10, 0.5 * far10);
}
