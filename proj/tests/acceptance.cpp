// One PASS/FAIL line per acceptance criterion. Exit status is the number of failures.

#include <snakewalk/snakewalk.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

using namespace snakewalk;

namespace {

constexpr double pi = std::numbers::pi;

struct Outcome {
    bool pass = true;
    std::string detail;

    void check(bool ok, const std::string& what) {
        pass = pass && ok;
        if (!detail.empty()) detail += "; ";
        detail += what + (ok ? "" : " [fail]");
    }
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// 1. {4 cos p} against dense H_{n,k}; cross-block couplings in the hat basis.
Outcome spectral_equivalence() {
    Outcome o;
    double eig_err = 0.0, block = 0.0;
    for (int n : {2, 3, 4, 6, 8}) {
        const auto fixed = k_independent_eigenvalues(n);
        for (int i = 0; i < 64; ++i) {
            const double k = (i + 0.5) * 2.0 * pi / 64;
            std::vector<double> want = fixed;
            for (double p : solve_p_equation(n, k)) want.push_back(4.0 * std::cos(p));
            std::sort(want.begin(), want.end());
            const Eigen::MatrixXcd h(build_Hnk(n, k));
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
            for (std::size_t i = 0; i < want.size(); ++i)
                eig_err = std::max(eig_err, std::abs(es.eigenvalues()[static_cast<Eigen::Index>(i)] - want[i]));
            // ‖Π_a H Π_b‖ equals the norm of the (a, b) sub-block of B†HB.
            const auto basis = hat_basis(n, k);
            const Eigen::MatrixXcd hb = basis.vectors.adjoint() * h * basis.vectors;
            const auto blocks = block_projectors(n, k);
            for (const auto& a : blocks)
                for (const auto& b : blocks) {
                    if (a.l == b.l) continue;
                    double s = 0.0;
                    for (auto r : a.members)
                        for (auto c : b.members) s += std::norm(hb(r, c));
                    block = std::max(block, std::sqrt(s));
                }
        }
    }
    o.check(eig_err < 1e-8, "max eigenvalue mismatch " + fmt("%.2e", eig_err));
    o.check(block < 1e-10, "max cross-block norm " + fmt("%.2e", block));
    return o;
}

// 2. Closed-form derivatives at π/2 and 3π/2.
Outcome closed_form_derivatives() {
    Outcome o;
    double d1 = 0.0, d3 = 0.0, tree = 0.0;
    for (int n = 2; n <= 20; n += 2) {
        const auto b = median_band(n);
        const double m = n + 2.0;
        d1 = std::max(d1, std::abs(band_derivatives(b, pi / 2, 1) + 8.0 / m));
        d3 = std::max(d3, std::abs(band_derivatives(b, pi / 2, 3) - 8.0 * (3.0 * n * n + 4.0) / (m * m * m)));
        tree = std::max(tree, std::abs(band_derivatives(tree_band(n), 1.5 * pi, 1) - 8.0 * std::sqrt(2.0) / m));
    }
    o.check(d1 < 1e-6, "lambda' err " + fmt("%.2e", d1));
    o.check(d3 < 1e-6, "lambda''' err " + fmt("%.2e", d3));
    o.check(tree < 1e-6, "tree lambda' err " + fmt("%.2e", tree));
    return o;
}

// 3. Scaled-limit bounds for the line and tree bands.
Outcome scaled_limit_bounds() {
    Outcome o;
    const MomentumGrid grid(256);
    int outside = 0, tree_outside = 0;
    std::vector<double> c_line, c_tree;
    for (int n : {8, 12, 16}) {
        const auto b = median_band(n);
        const auto tb = tree_band(n);
        double cl = 0.0, ct = 0.0;
        for (double k : grid.nodes()) {
            const auto j = b.jet(k), tj = tb.jet(k);
            auto inside = [&](double d, double ref) {
                const double lo = ref / n * (1 + 2.0 / n), hi = ref / n * (1 - 2.0 / n);
                return d >= std::min(lo, hi) - 1e-12 && d <= std::max(lo, hi) + 1e-12;
            };
            // On (π, 2π) the interval is the mirror image, ordered by the sign of Λ'.
            outside += !inside(j[1], Lambda_d1(k));
            tree_outside += !inside(tj[1], TreeLambda_d1(k));
            cl = std::max(cl, n * double(n) * std::abs(j[2] - Lambda_d2(k) / n));
            ct = std::max(ct, n * double(n) * std::abs(tj[2] - TreeLambda_d2(k) / n));
        }
        c_line.push_back(cl);
        c_tree.push_back(ct);
    }
    auto spread = [](const std::vector<double>& c) {
        return *std::max_element(c.begin(), c.end()) / *std::min_element(c.begin(), c.end());
    };
    o.check(outside == 0, "line nodes outside interval " + std::to_string(outside));
    o.check(tree_outside == 0, "tree nodes outside interval " + std::to_string(tree_outside));
    o.check(spread(c_line) <= 1.5, "line C(n)=" + fmt("%.2f", c_line[0]) + "/" + fmt("%.2f", c_line[1]) + "/" +
                                       fmt("%.2f", c_line[2]) + " max/min " + fmt("%.3f", spread(c_line)));
    o.check(spread(c_tree) <= 1.5, "tree C(n)=" + fmt("%.2f", c_tree[0]) + "/" + fmt("%.2f", c_tree[1]) + "/" +
                                       fmt("%.2f", c_tree[2]) + " max/min " + fmt("%.3f", spread(c_tree)));
    return o;
}

const BandSamples& band14() {
    static const BandSamples b = sample_band(median_band(14), MomentumGrid(4096));
    return b;
}

// 4. η_0 start-position table at n = 14.
Outcome eta_table() {
    Outcome o;
    const auto eta = build_eta(band14(), 0);
    const double p1 = eta.probability(1) + eta.probability(-1);
    const double p3 = eta.probability(3) + eta.probability(-3);
    const double p5 = eta.probability(5) + eta.probability(-5);
    const double p13 = eta.probability(13), p15 = eta.probability(15);
    double even = 0.0;
    for (std::int64_t x = eta.x_min; x <= eta.x_max; ++x)
        if (x % 2 == 0) even = std::max(even, eta.l1(x));
    o.check(std::abs(p1 - 0.62) <= 0.01, "p(±1)=" + fmt("%.4f", p1));
    o.check(std::abs(p3 - 0.26) <= 0.01, "p(±3)=" + fmt("%.4f", p3));
    o.check(std::abs(p5 - 0.09) <= 0.01, "p(±5)=" + fmt("%.4f", p5));
    o.check(std::abs(p13 / 1.61e-5 - 1) <= 0.05, "p(13)=" + fmt("%.4e", p13));
    o.check(std::abs(p15 / 1.47e-9 - 1) <= 0.10, "p(15)=" + fmt("%.4e", p15));
    o.check(even < 1e-10, "even slices " + fmt("%.1e", even));
    return o;
}

// 5. Two symmetric wavefronts at ±t/2.
Outcome wavefronts() {
    Outcome o;
    double prominence[2] = {0, 0};
    int idx = 0;
    for (double t : {400.0, 800.0}) {
        const auto w = wavefront_half_width(14, t);
        const auto rows = wavefront_profile(band14(), t, -w, w);
        double right = 0.0, left = 0.0, plateau = 0.0;
        std::int64_t xr = 0, xl = 0;
        int count = 0;
        for (const auto& r : rows) {
            if (r.x > 0 && r.probability > right) right = r.probability, xr = r.x;
            if (r.x < 0 && r.probability > left) left = r.probability, xl = r.x;
            if (std::abs(static_cast<double>(r.x)) <= 0.25 * t) plateau += r.probability, ++count;
        }
        plateau /= count;
        prominence[idx++] = right / plateau;
        const bool placed = xr >= 0.45 * t && xr <= 0.55 * t && -xl >= 0.45 * t && -xl <= 0.55 * t;
        o.check(placed && xl == -xr, "t=" + fmt("%.0f", t) + " peaks at " + std::to_string(xl) + "," +
                                         std::to_string(xr) + " prominence " + fmt("%.2f", right / plateau));
    }
    o.check(prominence[1] > prominence[0], "prominence grows");
    return o;
}

// 6. Locality tail: zero at n = 2, then strictly decreasing.
Outcome locality() {
    Outcome o;
    const MomentumGrid grid(4096);
    const double t2 = locality_tail(2, grid);
    o.check(t2 < 1e-10, "n=2 " + fmt("%.1e", t2));
    double prev = std::numeric_limits<double>::infinity();
    bool decreasing = true;
    std::string seq;
    for (int n = 4; n <= 14; n += 2) {
        const double v = locality_tail(n, grid);
        decreasing = decreasing && v < prev;
        prev = v;
        seq += (seq.empty() ? "" : ",") + fmt("%.2e", v);
    }
    o.check(decreasing, "n=4..14 " + seq);
    return o;
}

// 7. ξ packets at n = 8.
Outcome packets() {
    Outcome o;
    const auto band = sample_tree_band(8, MomentumGrid(4096));
    const auto tb = tree_band(8);
    for (auto [k0, want] : {std::pair{1.5 * pi, 113.0}, std::pair{7 * pi / 6, 42.0}}) {
        const WavePacketSpec wp{0, k0, 0.05};
        const auto [lo, hi] = packet_window(wp, 8, 100.0, tb.jet(k0)[1]);
        const auto start = packet_propagation_profile(wp, 0.0, band, lo, hi);
        const auto end = packet_propagation_profile(wp, 100.0, band, lo, hi);
        const double shift = static_cast<double>(end.peak_x - start.peak_x);
        o.check(std::abs(shift - want) <= 10.0, "k0=" + fmt("%.4f", k0) + " displacement " + fmt("%.0f", shift));
        o.check(std::abs(end.norm_sq - 1.0) <= 1e-6 && std::abs(start.norm_sq - 1.0) <= 1e-6,
                "norm " + fmt("%.9f", end.norm_sq));
    }
    return o;
}

// 8. Scattering off the glued part.
Outcome scattering() {
    Outcome o;
    const MomentumGrid grid(1024);
    double unitarity = 0.0;
    for (double k : grid.nodes()) {
        const auto s = scattering_coefficients(k);
        unitarity = std::max(unitarity, std::abs(s.reflection() + s.transmission() - 1.0));
    }
    const double t = scattering_coefficients(1.5 * pi).transmission();
    const double peak = transmission_peak(grid);
    o.check(unitarity < 1e-12, "unitarity " + fmt("%.1e", unitarity));
    o.check(std::abs(t - 8.0 / 9.0) < 1e-14, "|T(3pi/2)|^2=" + fmt("%.15f", t));
    o.check(std::abs(peak - 1.5 * pi) <= grid.step(), "argmax " + fmt("%.5f", peak));
    double worst = 0.0;
    for (int n : {2, 4, 6}) {
        const auto band = tree_band(n);
        for (int i = 0; i < 16; ++i) {
            const double k = pi + (i + 0.5) * pi / 16;
            worst = std::max(worst, solve_scattering_vector(n, k, band).residual);
        }
    }
    o.check(worst < 1e-8, "interior residual " + fmt("%.1e", worst));
    return o;
}

// 9. Span probabilities of μ(3π/2) at n = 10.
Outcome span_tables() {
    Outcome o;
    const auto v = solve_scattering_vector(10, 1.5 * pi);
    const std::int64_t lo = -40, hi = 40;
    double unit = 0.0, total = 0.0, norms = 0.0;
    for (int a = 1; a <= 10; ++a)
        for (const auto& r : span_probabilities(v, a, lo, hi)) {
            if (a == 1) unit = std::max(unit, r.probability);
            total += r.probability;
        }
    for (std::int64_t x = lo; x <= hi; ++x) norms += v.column(x).squaredNorm();
    o.check(v.satisfied, "solve residual " + fmt("%.1e", v.residual));
    o.check(unit < 1e-20, "max p_{x,1} " + fmt("%.1e", unit));
    o.check(std::abs(total - norms) < 1e-8, "table sum vs column norms " + fmt("%.1e", std::abs(total - norms)));
    return o;
}

// 10. Search on G^M and column-subspace invariance.
Outcome glued_search() {
    Outcome o;
    const auto base = make_glued_trees(1, 5);
    Oracle oracle(base, 11);
    GluedRunOptions opt;
    opt.N = 1;
    opt.M = 3;
    opt.n = 3;
    opt.t = 2.0;
    opt.samples = 200;
    opt.seed = 42;
    std::size_t bridging = 0;
    bool valid = true;
    try {
        const auto r = run_algorithm(oracle, opt);
        for (const auto& s : r.samples)
            if (s.bridging) {
                ++bridging;
                valid = valid && s.path.size() >= 4;
            }
        o.check(bridging > 0, std::string(mode_name(r.mode)) + " mode, bridging samples " + std::to_string(bridging) + "/200");
    } catch (const OracleValidationError& e) {
        valid = false;
        o.check(false, e.what());
    }
    o.check(valid, "paths validated by oracle");
    const auto inv = column_invariance_check(2, 4, 3, 1, 7);
    o.check(inv.invariance_residual < 1e-10, "invariance residual " + fmt("%.1e", inv.invariance_residual));
    return o;
}

// 11. Momentum-space evolution against dense simulation.
Outcome cross_engine() {
    Outcome o;
    const auto band = sample_band(median_band(2), MomentumGrid(1024));
    const auto eta = build_eta(band, 0, 40);
    const Eigen::VectorXcd dense = evolve(line_window_adjacency(2, -40, 40), 5.0, eta.amplitudes);
    const auto fast = band_evolve(band, 5.0, nullptr, -40, 40);
    const double diff = (dense - fast.amplitudes).cwiseAbs().maxCoeff();
    const auto r = restricted_equivalence_check(2, 0, 5, 1, 2, 5.0, 40);
    o.check(diff < 1e-6, "band vs dense " + fmt("%.1e", diff));
    o.check(r.difference < 1e-6, "restricted block vs dense " + fmt("%.1e", r.difference));
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"spectral oracle equivalence", spectral_equivalence},
        {"closed-form derivatives", closed_form_derivatives},
        {"scaled-limit derivative bounds", scaled_limit_bounds},
        {"eta start-position table (n=14)", eta_table},
        {"wavefronts (n=14, t=400/800)", wavefronts},
        {"locality tail", locality},
        {"tree packets (n=8, t=100)", packets},
        {"scattering", scattering},
        {"span probabilities (n=10)", span_tables},
        {"glued trees search", glued_search},
        {"cross-engine consistency", cross_engine},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failures += !o.pass;
        std::printf("%s %2zu %s (%.1fs): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, secs,
                    o.detail.c_str());
        std::fflush(stdout);
    }
    return failures;
}
