// Command-line front end: every subcommand writes CSV tables plus a JSON
// sidecar with the full configuration into the output directory.

#include <CLI11.hpp>
#include <snakewalk/io.hpp>
#include <snakewalk/snakewalk.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

namespace fs = std::filesystem;
using namespace snakewalk;

namespace {

constexpr double pi = std::numbers::pi;

struct Common {
    std::string out = ".";
    bool svg = false;
};

struct Series {
    std::string name;
    std::vector<double> y;
};

// Minimal line plot: one polyline per series over a shared x axis.
void write_svg(const std::string& path, const std::string& title, const std::string& xlabel,
               const std::vector<double>& x, const std::vector<Series>& series) {
    const double w = 720, h = 440, l = 70, r = 20, t = 40, b = 50;
    double x0 = x.front(), x1 = x.back(), y0 = 0, y1 = 0;
    bool first = true;
    for (const auto& s : series)
        for (double v : s.y) {
            if (!std::isfinite(v)) continue;
            y0 = first ? v : std::min(y0, v);
            y1 = first ? v : std::max(y1, v);
            first = false;
        }
    if (y1 == y0) y1 = y0 + 1;
    if (x1 == x0) x1 = x0 + 1;
    auto px = [&](double v) { return l + (v - x0) / (x1 - x0) * (w - l - r); };
    auto py = [&](double v) { return h - b - (v - y0) / (y1 - y0) * (h - t - b); };
    std::ofstream f(path);
    f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << w / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\">" << title << "</text>\n"
      << "<text x=\"" << w / 2 << "\" y=\"" << h - 12 << "\" text-anchor=\"middle\" font-family=\"sans-serif\">"
      << xlabel << "</text>\n"
      << "<rect x=\"" << l << "\" y=\"" << t << "\" width=\"" << w - l - r << "\" height=\"" << h - t - b
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double v : {y0, y1})
        f << "<text x=\"" << l - 6 << "\" y=\"" << py(v) + 4 << "\" text-anchor=\"end\" font-size=\"11\">"
          << format_number(v) << "</text>\n";
    for (double v : {x0, x1})
        f << "<text x=\"" << px(v) << "\" y=\"" << h - b + 16 << "\" text-anchor=\"middle\" font-size=\"11\">"
          << format_number(v) << "</text>\n";
    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
    for (std::size_t s = 0; s < series.size(); ++s) {
        f << "<polyline fill=\"none\" stroke-width=\"1.2\" stroke=\"" << colors[s % 8] << "\" points=\"";
        for (std::size_t i = 0; i < x.size() && i < series[s].y.size(); ++i)
            if (std::isfinite(series[s].y[i])) f << px(x[i]) << ',' << py(series[s].y[i]) << ' ';
        f << "\"><title>" << series[s].name << "</title></polyline>\n";
    }
    f << "</svg>\n";
}

/// Collects outputs of one run and writes the sidecar.
class Run {
public:
    Run(std::string command, const Common& c, const CLI::App& sub) : command_(std::move(command)), common_(c) {
        fs::create_directories(c.out);
        for (const CLI::Option* o : sub.get_options()) {
            if (o->get_lnames().empty()) continue;
            const std::string& name = o->get_lnames().front();
            if (name == "help" || name == "config") continue;
            config_[name] = o->count() > 0 ? o->as<std::string>() : o->get_default_str();
        }
    }

    std::string path(const std::string& file) const { return (fs::path(common_.out) / file).string(); }

    void csv(const std::string& file, const CsvTable& table) {
        table.save(path(file));
        outputs_.push_back(file);
    }

    void svg(const std::string& file, const std::string& title, const std::string& xlabel, const std::vector<double>& x,
             const std::vector<Series>& series) {
        if (!common_.svg) return;
        write_svg(path(file), title, xlabel, x, series);
        outputs_.push_back(file);
    }

    json& summary() { return summary_; }

    void finish() {
        json side;
        side["command"] = command_;
        side["version"] = kVersion;
        side["config"] = config_;
        side["outputs"] = outputs_;
        side["summary"] = summary_;
        save_json(side, path(command_ + ".json"));
        std::cout << summary_.dump(2) << '\n';
    }

private:
    std::string command_;
    Common common_;
    std::map<std::string, std::string> config_;
    std::vector<std::string> outputs_;
    json summary_ = json::object();
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--out,-o", c.out, "output directory")->envname("SNAKEWALK_OUT");
    sub->add_flag("--svg", c.svg, "also write SVG line plots");
}

template <class Model>
void band_table(Run& run, const std::string& stem, int n, std::size_t K) {
    const MomentumGrid grid(K);
    std::vector<std::string> header{"k_rad"};
    for (int l = 0; l <= n; ++l) header.push_back("lambda_" + std::to_string(l));
    for (int l = 0; l <= n; ++l) header.push_back("dlambda_dk_" + std::to_string(l));
    CsvTable bands(header);
    std::vector<std::string> roots_header{"k_rad"};
    for (int l = 0; l <= n; ++l) roots_header.push_back("p_" + std::to_string(l) + "_rad");
    CsvTable roots(roots_header);
    CsvTable median({"k_rad", "lambda", "dlambda_dk", "d2lambda_dk2"});
    std::vector<BandFunction<Model>> fns;
    for (int l = 0; l <= n; ++l) fns.emplace_back(n, l);
    std::vector<Series> series(static_cast<std::size_t>(n + 1));
    for (int l = 0; l <= n; ++l) series[l].name = "lambda_" + std::to_string(l);
    const auto ks = grid.nodes();
    for (double k : ks) {
        std::vector<double> row{k}, d, proots{k};
        const auto p = solve_p_roots<Model>(n, k);
        for (int l = 0; l <= n; ++l) {
            const auto jet = fns[l].jet(k);
            row.push_back(jet[0]);
            d.push_back(jet[1]);
            series[l].y.push_back(jet[0]);
            proots.push_back(p[n - l]);
        }
        row.insert(row.end(), d.begin(), d.end());
        bands.row(row);
        roots.row(proots);
        if (n % 2 == 0) {
            const auto jet = fns[n / 2].jet(k);
            median.row({k, jet[0], jet[1], jet[2]});
        }
    }
    run.csv(stem + ".csv", bands);
    run.csv(stem + "_roots.csv", roots);
    if (n % 2 == 0) run.csv(stem + "_median.csv", median);
    run.svg(stem + ".svg", stem + " bands, n=" + std::to_string(n), "k (rad)", ks, series);
    run.summary()["bands"] = n + 1;
    run.summary()["grid"] = K;
    if (n % 2 == 0) {
        const double k = Model::chain == 2.0 ? pi / 2 : 1.5 * pi;
        run.summary()["median_velocity_at"] = k;
        run.summary()["median_velocity"] = fns[n / 2].jet(k)[1];
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum snake walks: spectra, dynamics, scattering and glued trees search"};
    app.set_config("--config", "", "key=value configuration file; command-line flags take precedence");
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();
    Common common;
    std::function<void()> action;

    // spectra
    int sp_n = 8;
    std::size_t sp_grid = 512;
    auto* spectra = app.add_subcommand("spectra", "all k-dependent bands of the line with slopes, and the p-roots");
    spectra->add_option("--n", sp_n, "snake length")->check(CLI::Range(1, kMaxDenseN));
    spectra->add_option("--grid", sp_grid, "momentum nodes")->check(CLI::Range(256, 1 << 20));
    add_common(spectra, common);
    spectra->callback([&] {
        action = [&] {
            Run run("spectra", common, *spectra);
            band_table<LineModel>(run, "spectra", sp_n, sp_grid);
            run.finish();
        };
    });

    // eta
    int eta_n = 14;
    std::size_t eta_grid = 4096;
    auto* eta = app.add_subcommand("eta", "position profile of eta_0 and locality tails");
    eta->add_option("--n", eta_n, "even snake length")->check(CLI::Range(2, kMaxMomentumN));
    eta->add_option("--grid", eta_grid, "momentum nodes")->check(CLI::Range(256, 1 << 20));
    add_common(eta, common);
    eta->callback([&] {
        action = [&] {
            Run run("eta", common, *eta);
            const auto band = sample_band(median_band(eta_n), MomentumGrid(eta_grid));
            const auto state = build_eta(band, 0);
            CsvTable profile({"x", "probability", "l1_norm"});
            std::vector<double> xs;
            Series p{"probability", {}};
            for (std::int64_t x = state.x_min; x <= state.x_max; ++x) {
                profile.row({double(x), state.probability(x), state.l1(x)});
                xs.push_back(double(x));
                p.y.push_back(state.probability(x));
            }
            CsvTable starts({"abs_x", "probability"});
            json table = json::object();
            for (std::int64_t a = 1; a <= state.x_max; a += 2) {
                const double q = state.probability(a) + state.probability(-a);
                starts.row({double(a), q});
                table[std::to_string(a)] = q;
            }
            CsvTable tails({"n", "tail_l1"});
            json tail = json::object();
            for (int n = 2; n <= eta_n; n += 2) {
                const double v = locality_tail(n, MomentumGrid(eta_grid));
                tails.row({double(n), v});
                tail[std::to_string(n)] = v;
            }
            run.csv("eta_profile.csv", profile);
            run.csv("eta_starts.csv", starts);
            run.csv("locality_tail.csv", tails);
            run.svg("eta_profile.svg", "eta_0 position probabilities", "x", xs, {p});
            run.summary()["start_probability"] = table;
            run.summary()["locality_tail"] = tail;
            run.finish();
        };
    });

    // evolve-line
    int ev_n = 14;
    double ev_t = 400;
    std::size_t ev_grid = 4096;
    auto* evolve_line = app.add_subcommand("evolve-line", "wavefront profile of eta_0 evolved on the line");
    evolve_line->add_option("--n", ev_n, "even snake length")->check(CLI::Range(2, kMaxMomentumN));
    evolve_line->add_option("--t", ev_t, "evolution time")->check(CLI::NonNegativeNumber);
    evolve_line->add_option("--grid", ev_grid, "momentum nodes")->check(CLI::Range(256, 1 << 22));
    add_common(evolve_line, common);
    evolve_line->callback([&] {
        action = [&] {
            Run run("evolve-line", common, *evolve_line);
            const auto band = sample_band(median_band(ev_n), MomentumGrid(ev_grid));
            const auto w = wavefront_half_width(ev_n, ev_t);
            BandEvolveReport rep;
            const auto rows = wavefront_profile(band, ev_t, -w, w, &rep);
            CsvTable table({"x", "probability", "l1_norm"});
            std::vector<double> xs;
            Series p{"probability", {}};
            double best = -1;
            std::int64_t peak = 0;
            for (const auto& r : rows) {
                table.row({double(r.x), r.probability, r.l1});
                xs.push_back(double(r.x));
                p.y.push_back(r.probability);
                if (r.x > 0 && r.probability > best) best = r.probability, peak = r.x;
            }
            run.csv("wavefront.csv", table);
            run.svg("wavefront.svg", "wavefront, n=" + std::to_string(ev_n), "x", xs, {p});
            run.summary()["peak_x"] = peak;
            run.summary()["peak_probability"] = best;
            run.summary()["predicted_speed"] = 8.0 / (ev_n + 2);
            run.summary()["window_mass"] = rep.window_mass;
            run.finish();
        };
    });

    // tree-spectra
    int ts_n = 8;
    std::size_t ts_grid = 512;
    auto* tree_spectra = app.add_subcommand("tree-spectra", "k-dependent bands of the column Hamiltonian");
    tree_spectra->add_option("--n", ts_n, "snake length")->check(CLI::Range(1, kMaxDenseN));
    tree_spectra->add_option("--grid", ts_grid, "momentum nodes")->check(CLI::Range(256, 1 << 20));
    add_common(tree_spectra, common);
    tree_spectra->callback([&] {
        action = [&] {
            Run run("tree-spectra", common, *tree_spectra);
            band_table<TreeModel>(run, "tree_spectra", ts_n, ts_grid);
            run.finish();
        };
    });

    // packet
    int pk_n = 8;
    double pk_k0 = 1.5 * pi, pk_sigma = 0.05, pk_t = 100;
    std::int64_t pk_x0 = 0;
    std::size_t pk_grid = 4096;
    auto* packet = app.add_subcommand("packet", "xi wave packet before and after evolution");
    packet->add_option("--n", pk_n, "even snake length")->check(CLI::Range(2, kMaxMomentumN));
    packet->add_option("--k0", pk_k0, "central momentum in (pi, 2pi)");
    packet->add_option("--sigma", pk_sigma, "momentum width")->check(CLI::PositiveNumber);
    packet->add_option("--x0", pk_x0, "initial centre");
    packet->add_option("--t", pk_t, "evolution time")->check(CLI::NonNegativeNumber);
    packet->add_option("--grid", pk_grid, "momentum nodes")->check(CLI::Range(256, 1 << 22));
    add_common(packet, common);
    packet->callback([&] {
        action = [&] {
            const WavePacketSpec wp{pk_x0, pk_k0, pk_sigma};
            validate(wp);
            Run run("packet", common, *packet);
            const auto band = sample_band(tree_band(pk_n), MomentumGrid(pk_grid));
            const double v = tree_band(pk_n).jet(pk_k0)[1];
            const auto [lo, hi] = packet_window(wp, pk_n, pk_t, v);
            const auto a = packet_propagation_profile(wp, 0.0, band, lo, hi);
            const auto b = packet_propagation_profile(wp, pk_t, band, lo, hi);
            CsvTable table({"x", "probability_t0", "probability_t"});
            std::vector<double> xs;
            Series s0{"t=0", {}}, s1{"t", {}};
            for (std::size_t i = 0; i < a.rows.size(); ++i) {
                table.row({double(a.rows[i].x), a.rows[i].probability, b.rows[i].probability});
                xs.push_back(double(a.rows[i].x));
                s0.y.push_back(a.rows[i].probability);
                s1.y.push_back(b.rows[i].probability);
            }
            run.csv("packet.csv", table);
            run.svg("packet.svg", "xi packet, n=" + std::to_string(pk_n), "x", xs, {s0, s1});
            run.summary()["group_velocity"] = v;
            run.summary()["peak_displacement"] = b.peak_x - a.peak_x;
            run.summary()["mean_displacement"] = b.mean_x - a.mean_x;
            run.summary()["norm_sq"] = b.norm_sq;
            run.summary()["expected_span_t0"] = expected_span(build_xi(wp, band));
            run.finish();
        };
    });

    // span
    int sn_max = 12;
    std::size_t sn_grid = 256;
    auto* span = app.add_subcommand("span", "expected span length of the band eigenvectors for even n");
    span->add_option("--n-max", sn_max, "largest even n")->check(CLI::Range(2, kMaxMomentumN));
    span->add_option("--grid", sn_grid, "momentum nodes")->check(CLI::Range(256, 1 << 16));
    add_common(span, common);
    span->callback([&] {
        action = [&] {
            Run run("span", common, *span);
            const MomentumGrid grid(sn_grid);
            std::vector<std::string> header{"k_rad"};
            std::vector<Series> series;
            for (int n = 2; n <= sn_max; n += 2) {
                header.push_back("span_n" + std::to_string(n));
                series.push_back({"n=" + std::to_string(n), {}});
                const auto rows = band_span_profile(n, grid);
                for (const auto& r : rows) series.back().y.push_back(r.value);
                run.summary()["min_n" + std::to_string(n)] = profile_min(rows);
                run.summary()["max_n" + std::to_string(n)] = profile_max(rows);
            }
            CsvTable table(header);
            const auto ks = grid.nodes();
            for (std::size_t i = 0; i < ks.size(); ++i) {
                std::vector<double> row{ks[i]};
                for (const auto& s : series) row.push_back(s.y[i]);
                table.row(row);
            }
            run.csv("span_profile.csv", table);
            run.svg("span_profile.svg", "expected span length", "k (rad)", ks, series);
            run.finish();
        };
    });

    // scatter
    std::size_t sc_grid = 1024;
    auto* scatter = app.add_subcommand("scatter", "reflection, transmission and effective length");
    scatter->add_option("--grid", sc_grid, "momentum nodes")->check(CLI::Range(256, 1 << 22));
    add_common(scatter, common);
    scatter->callback([&] {
        action = [&] {
            Run run("scatter", common, *scatter);
            const MomentumGrid grid(sc_grid);
            CsvTable table({"k_rad", "reflection", "transmission", "effective_length"});
            Series t{"transmission", {}}, l{"effective_length", {}};
            const auto ks = grid.nodes();
            for (double k : ks) {
                const auto s = scattering_coefficients(k);
                table.row({k, s.reflection(), s.transmission(), s.effective_length});
                t.y.push_back(s.transmission());
                l.y.push_back(s.effective_length);
            }
            run.csv("scatter.csv", table);
            run.svg("scatter.svg", "transmission through the glued part", "k (rad)", ks, {t, l});
            const double peak = transmission_peak(grid);
            run.summary()["transmission_peak_k"] = peak;
            run.summary()["transmission_at_peak"] = scattering_coefficients(peak).transmission();
            run.summary()["grid_step"] = grid.step();
            run.finish();
        };
    });

    // mu-span
    int mu_n = 10;
    double mu_k = 1.5 * pi;
    std::int64_t mu_window = 40;
    std::vector<int> mu_a{2, 6, 10};
    auto* mu_span = app.add_subcommand("mu-span", "span probabilities of the scattering eigenvector");
    mu_span->add_option("--n", mu_n, "even snake length, at most 10")->check(CLI::Range(2, 10));
    mu_span->add_option("--k", mu_k, "momentum");
    mu_span->add_option("--window", mu_window, "snake starts in [-window, window]")->check(CLI::PositiveNumber);
    mu_span->add_option("--a", mu_a, "span lengths")->check(CLI::Range(1, 10));
    add_common(mu_span, common);
    mu_span->callback([&] {
        action = [&] {
            Run run("mu-span", common, *mu_span);
            const auto v = solve_scattering_vector(mu_n, mu_k);
            CsvTable table({"span_length", "center_x", "probability"});
            for (int a : mu_a)
                for (const auto& r : span_probabilities(v, a, -mu_window, mu_window))
                    table.row({double(a), r.center(), r.probability});
            run.csv("mu_span.csv", table);
            run.summary()["residual"] = v.residual;
            run.summary()["satisfied"] = v.satisfied;
            run.summary()["iterations"] = v.iterations;
            run.summary()["rank"] = v.rank;
            run.finish();
        };
    });

    // glued-run
    GluedRunOptions gr;
    std::uint64_t graph_seed = 1, oracle_seed = 2;
    std::string gr_mode = "automatic";
    auto* glued = app.add_subcommand("glued-run", "snake-walk search on the expanded glued trees graph");
    glued->add_option("--N", gr.N, "glued trees height")->check(CLI::Range(1, kMaxGluedHeight));
    glued->add_option("--M", gr.M, "expanded height")->check(CLI::Range(2, kMaxGluedHeight));
    glued->add_option("--n", gr.n, "snake length, at least 2N+1")->check(CLI::Range(1, kMaxMomentumN));
    glued->add_option("--k0", gr.packet.k0, "packet momentum in (pi, 2pi)");
    glued->add_option("--sigma", gr.packet.sigma, "packet momentum width")->check(CLI::PositiveNumber);
    glued->add_option("--x0", gr.packet.x0, "packet centre layer");
    glued->add_option("--t", gr.t, "evolution time")->check(CLI::NonNegativeNumber);
    glued->add_option("--samples", gr.samples, "measurements")->check(CLI::Range(1, 1000000));
    glued->add_option("--seed", gr.seed, "sampling seed");
    glued->add_option("--graph-seed", graph_seed, "seed of the gluing cycle");
    glued->add_option("--oracle-seed", oracle_seed, "seed of the oracle labels");
    glued->add_option("--mode", gr_mode, "simulation mode")->check(CLI::IsMember({"automatic", "exact", "column"}));
    glued->add_option("--capacity", gr.capacity, "snake-space size limit for exact simulation");
    add_common(glued, common);
    glued->callback([&] {
        action = [&] {
            gr.mode = gr_mode == "exact" ? SimulationMode::exact
                      : gr_mode == "column" ? SimulationMode::column
                                            : SimulationMode::automatic;
            validate(gr.packet);
            Run run("glued-run", common, *glued);
            const auto base = make_glued_trees(gr.N, graph_seed);
            Oracle oracle(base, oracle_seed);
            const auto r = run_algorithm(oracle, gr);
            CsvTable table({"sample", "x", "word", "bridging", "path_vertices"});
            json samples = json::array();
            std::size_t bridging = 0;
            for (std::size_t i = 0; i < r.samples.size(); ++i) {
                const auto& s = r.samples[i];
                bridging += s.bridging;
                table.row({double(i), double(s.x), double(s.word), s.bridging ? 1.0 : 0.0, double(s.path.size())});
                samples.push_back({{"x", s.x}, {"word", s.word}, {"snake", s.vertices}, {"bridging", s.bridging},
                                   {"path_labels", s.path}});
            }
            run.csv("glued_samples.csv", table);
            json outcome;
            outcome["samples"] = samples;
            save_json(outcome, run.path("glued_samples.json"));
            auto& sum = run.summary();
            sum["mode"] = mode_name(r.mode);
            sum["snake_count"] = r.snake_count;
            sum["packet_mass_in_T1"] = r.packet_mass_in_T1;
            sum["bridging_probability"] = r.bridging_probability;
            sum["bridging_samples"] = bridging;
            sum["final_norm"] = r.final_norm;
            sum["queries_before_sampling"] = r.queries_before_sampling;
            sum["queries_total"] = r.queries_total;
            if (!r.warning.empty()) sum["warning"] = r.warning;
            run.finish();
        };
    });

    // snakes
    std::string sk_graph;
    int sk_n = 2;
    std::size_t sk_capacity = kDefaultSnakeCapacity;
    auto* snakes = app.add_subcommand("snakes", "enumerate the snakes of a graph given as an edge list");
    snakes->add_option("--graph", sk_graph, "edge list file, one 'u v' pair per line")->required()->check(CLI::ExistingFile);
    snakes->add_option("--n", sk_n, "snake length")->check(CLI::Range(1, 64));
    snakes->add_option("--capacity", sk_capacity, "enumeration limit");
    add_common(snakes, common);
    snakes->callback([&] {
        action = [&] {
            std::ifstream in(sk_graph);
            const Graph g = read_edge_list(in);
            Run run("snakes", common, *snakes);
            const auto space = enumerate_snakes(g, sk_n, sk_capacity);
            const SparseReal a = snake_adjacency(g, space);
            std::ofstream f(run.path("snakes.csv"));
            f << "index,snake,weighted_degree\n";
            for (std::size_t i = 0; i < space.size(); ++i) {
                f << i << ',';
                for (std::size_t k = 0; k < space[i].vertices.size(); ++k) f << (k ? "-" : "") << g.name(space[i].vertices[k]);
                f << ',' << format_number(a.row(static_cast<Eigen::Index>(i)).sum()) << '\n';
            }
            run.summary()["vertices"] = g.size();
            run.summary()["edges"] = g.edge_count();
            run.summary()["snakes"] = space.size();
            run.summary()["weighted_edges"] = a.sum() / 2;
            run.finish();
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << json{{"error", {{"kind", "usage"}, {"message", e.what()}}}}.dump() << '\n';
        return 2;
    }
    try {
        action();
    } catch (const Error& e) {
        std::cerr << json{{"error", {{"kind", e.kind()}, {"message", e.what()}}}}.dump() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", {{"kind", "internal"}, {"message", e.what()}}}}.dump() << '\n';
        return 1;
    }
    return 0;
}
