#include <gtest/gtest.h>

#include <snakewalk/line_dynamics.hpp>

using namespace snakewalk;

namespace {

constexpr double pi = std::numbers::pi;

const BandSamples& band14() {
    static const BandSamples b = sample_band(median_band(14), MomentumGrid(4096));
    return b;
}

}  // namespace

TEST(Eta, StartPositionTable) {
    const auto eta = build_eta(band14(), 0);
    EXPECT_NEAR(eta.probability(1) + eta.probability(-1), 0.62, 0.01);
    EXPECT_NEAR(eta.probability(3) + eta.probability(-3), 0.26, 0.01);
    EXPECT_NEAR(eta.probability(5) + eta.probability(-5), 0.09, 0.01);
    EXPECT_NEAR(eta.probability(13), 1.61e-5, 0.05 * 1.61e-5);
    EXPECT_NEAR(eta.probability(15), 1.47e-9, 0.10 * 1.47e-9);
    EXPECT_NEAR(eta.norm(), 1.0, 1e-8);
}

TEST(Eta, EvenSlicesVanish) {
    for (int n : {2, 6, 14}) {
        const auto eta = build_eta(n, 0, MomentumGrid(2048));
        double l1 = 0.0;
        for (std::int64_t x = eta.x_min; x <= eta.x_max; ++x)
            if (x % 2 == 0) l1 += eta.l1(x);
        EXPECT_LT(l1, 1e-10) << "n=" << n;
    }
}

TEST(Eta, OrthonormalFamily) {
    const auto band = sample_band(median_band(6), MomentumGrid(2048));
    std::vector<ColumnState> etas;
    for (int x = -10; x <= 10; ++x) etas.push_back(build_eta(band, x));
    for (std::size_t a = 0; a < etas.size(); ++a)
        for (std::size_t b = a; b < etas.size(); ++b)
            EXPECT_NEAR(std::abs(inner_product(etas[a], etas[b]) - (a == b ? 1.0 : 0.0)), 0.0, 1e-6);
}

TEST(Eta, TranslationCovariance) {
    const auto band = sample_band(median_band(4), MomentumGrid(1024));
    const auto e0 = build_eta(band, 0), e5 = build_eta(band, 5);
    for (std::int64_t x = e0.x_min; x <= e0.x_max; ++x) EXPECT_LT((e0.slice(x) - e5.slice(x + 5)).norm(), 1e-12);
}

TEST(Overlap, TimeZero) {
    const auto band = sample_band(median_band(8), MomentumGrid(1024));
    EXPECT_NEAR(std::abs(eta_overlap_evolved(band, 0.0, 0.0) - 1.0), 0.0, 1e-12);
    const auto e0 = build_eta(band, 0), e2 = build_eta(band, 2);
    EXPECT_LT(std::abs(inner_product(e2, e0)), 1e-10);
}

TEST(Overlap, ResolutionGuard) {
    const auto band = sample_band(median_band(8), MomentumGrid(256));
    EXPECT_THROW(eta_overlap_evolved(band, 0.25, 800.0), ResolutionError);
}

TEST(StationaryPhase, Regimes) {
    EXPECT_EQ(stationary_phase_predict(8, 1.0, 100.0).regime, Regime::outside);
    EXPECT_EQ(stationary_phase_predict(8, 0.8, 100.0).regime, Regime::edge);
    const auto p = stationary_phase_predict(8, 0.0, 100.0);
    EXPECT_EQ(p.regime, Regime::interior);
    EXPECT_NEAR(p.k_omega, pi, 1e-9);
    const auto q = stationary_phase_predict(8, 0.3, 100.0);
    EXPECT_GT(q.k_omega, pi / 2);
    EXPECT_LT(q.k_omega, 3 * pi / 2);
    EXPECT_LT(q.stationarity, 1e-10);
}

TEST(StationaryPhase, EdgeAmplitude) {
    const int n = 8;
    const double t = 1000.0;
    const auto p = stationary_phase_predict(n, 8.0 / (n + 2), t);
    const double want = (n + 2) * std::tgamma(1.0 / 3) /
                        (2 * pi * std::cbrt(4 * std::sqrt(3.0) * (3.0 * n * n + 4))) * std::pow(t, -1.0 / 3);
    EXPECT_NEAR(std::abs(p.amplitude), want, 1e-12);
    const auto band = sample_band(median_band(n), MomentumGrid(16384));
    const cplx direct = eta_overlap_evolved(band, 0.8, t);
    EXPECT_LT(std::abs(std::abs(direct) - want) / want, 0.25);

    const auto p14 = stationary_phase_predict(14, 0.5, 400.0);
    const cplx d14 = eta_overlap_evolved(band14(), 0.5, 400.0);
    EXPECT_LT(std::abs(std::abs(d14) - std::abs(p14.amplitude)) / std::abs(p14.amplitude), 0.25);
}

TEST(StationaryPhase, InteriorErrorShrinks) {
    const auto band = sample_band(median_band(8), MomentumGrid(16384));
    double prev = 1e9;
    for (double t : {200.0, 400.0, 800.0}) {
        const auto p = stationary_phase_predict(8, 0.25, t);
        const double err = std::abs(eta_overlap_evolved(band, 0.25, t) - p.amplitude) / interior_envelope(p, t);
        EXPECT_LT(err, prev) << "t=" << t;
        prev = err;
    }
}

TEST(Locality, TailValues) {
    const MomentumGrid grid(4096);
    EXPECT_LT(locality_tail(2, grid), 1e-10);
    double prev = 1e9;
    for (int n = 4; n <= 14; n += 2) {
        const double tail = locality_tail(n, grid);
        EXPECT_LT(tail, prev) << "n=" << n;
        prev = tail;
    }
}

TEST(Locality, TranslationInvariant) {
    const auto band = sample_band(median_band(6), MomentumGrid(2048));
    const auto e5 = build_eta(band, 5, 36);
    double shifted = 0.0;
    for (std::int64_t x = e5.x_min; x <= e5.x_max; ++x)
        if (x - 5 <= -6 || x - 5 >= 6) shifted += e5.l1(x);
    EXPECT_NEAR(shifted, locality_tail(band), 1e-12);
}

TEST(Wavefront, TwoSymmetricPeaks) {
    const double t = 400.0;
    const auto w = wavefront_half_width(14, t);
    BandEvolveReport rep;
    const auto rows = wavefront_profile(band14(), t, -w, w, &rep);
    double total = 0.0, best = 0.0, asym = 0.0;
    std::int64_t peak = 0;
    for (const auto& r : rows) {
        total += r.probability;
        if (r.x > 0 && r.probability > best) best = r.probability, peak = r.x;
        asym = std::max(asym, std::abs(r.probability - rows[rows.size() - 1 - static_cast<std::size_t>(r.x + w)].probability));
    }
    EXPECT_NEAR(total, 1.0, 1e-6);
    EXPECT_LT(asym, 1e-8);
    EXPECT_GE(peak, 0.45 * t);
    EXPECT_LE(peak, 0.55 * t);
}

TEST(RestrictedEquivalence, AgreesAwayFromDiagonal) {
    const auto r = restricted_equivalence_check(2, 0, 5, 1, 2, 2.0, 30);
    EXPECT_LT(r.difference, 1e-6);
    EXPECT_GT(std::abs(r.full), 1e-4);
    const auto z = restricted_equivalence_check(2, 0, 5, 1, 2, 0.0, 30);
    EXPECT_LT(std::abs(z.full), 1e-14);
    EXPECT_LT(std::abs(z.restricted), 1e-12);
    EXPECT_THROW(restricted_equivalence_check(2, 0, 4, 1, 2, 2.0, 30), PreconditionError);
}
