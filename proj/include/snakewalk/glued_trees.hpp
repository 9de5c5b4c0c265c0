#pragma once

// Glued trees, the expanded graph G^M, a query-counting oracle, the column
// subspace of A_n(G^M), and the search driver with root-path extraction.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "error.hpp"
#include "graph.hpp"
#include "momentum.hpp"
#include "propagator.hpp"
#include "tree_column.hpp"

namespace snakewalk {

inline constexpr int kMaxGluedHeight = 24;
inline constexpr VertexId kNoVertex = ~VertexId{0};

/// Two complete binary trees of height N with their leaves joined by a cycle
/// alternating between the two leaf sets. Left-tree depth d sits on layer
/// -N + d and right-tree depth d on layer N + 1 - d, so leaves occupy layers
/// 0 and 1.
struct GluedTrees {
    int N = 0;
    Graph graph;
    std::vector<int> layer;
    VertexId root1 = 0, root2 = 0;
    std::vector<VertexId> left_leaves, right_leaves;        // empty for discovered graphs
    std::vector<std::uint64_t> labels;                      // oracle labels, discovered graphs only
};

inline GluedTrees make_glued_trees(int N, std::uint64_t seed) {
    detail::require(N >= 1 && N <= kMaxGluedHeight, "make_glued_trees: N outside [1, 24]");
    GluedTrees g;
    g.N = N;
    auto tree = [&](char side, int sign, int base_layer) {
        std::vector<VertexId> prev, cur;
        for (int d = 0; d <= N; ++d) {
            cur.clear();
            for (std::uint64_t i = 0; i < (std::uint64_t{1} << d); ++i) {
                const VertexId v = g.graph.add_vertex(std::string(1, side) + std::to_string(d) + "." + std::to_string(i));
                g.layer.push_back(base_layer + sign * d);
                if (d > 0) g.graph.add_edge(v, prev[i / 2]);
                cur.push_back(v);
            }
            prev.swap(cur);
        }
        return prev;
    };
    g.left_leaves = tree('L', 1, -N);
    g.root1 = g.graph.id("L0.0");
    g.right_leaves = tree('R', -1, N + 1);
    g.root2 = g.graph.id("R0.0");

    // Cycle L[p(t)] - R[q(t)] - L[p(t+1)] from two uniform permutations.
    std::mt19937_64 rng(seed);
    const std::size_t L = g.left_leaves.size();
    std::vector<std::size_t> p(L), q(L);
    for (std::size_t i = 0; i < L; ++i) p[i] = q[i] = i;
    std::shuffle(p.begin(), p.end(), rng);
    std::shuffle(q.begin(), q.end(), rng);
    for (std::size_t t = 0; t < L; ++t) {
        g.graph.add_edge(g.left_leaves[p[t]], g.right_leaves[q[t]]);
        g.graph.add_edge(g.right_leaves[q[t]], g.left_leaves[p[(t + 1) % L]]);
    }
    return g;
}

// ---------------------------------------------------------------------------
// G^M

/// 2^{M-N} copies of a glued trees graph hung between two binary trees T1 and
/// T2 of height M - N: the leaves of T1 are the copies of root1, those of T2
/// the copies of root2. Layers run from -M (root of T1) to M + 1 (root of T2).
struct ExpandedGluedTrees {
    int N = 0, M = 0;
    Graph graph;
    std::vector<int> layer;
    std::vector<std::int64_t> instance;  // -1 strictly inside T1 or T2
    std::vector<VertexId> base_vertex;   // kNoVertex strictly inside T1 or T2
    VertexId root1 = 0, root2 = 0;
    std::vector<std::vector<VertexId>> layers;  // index x + M

    std::size_t instances() const { return std::size_t{1} << (M - N); }
    bool in_T1(VertexId v) const { return layer[v] <= -N; }
    bool in_T2(VertexId v) const { return layer[v] >= N + 1; }
    const std::vector<VertexId>& layer_vertices(int x) const { return layers.at(static_cast<std::size_t>(x + M)); }
};

inline constexpr std::size_t kMaxExpandedVertices = std::size_t{1} << 24;

inline ExpandedGluedTrees expand(const GluedTrees& g, int M) {
    const int N = g.N;
    detail::require(M > N, "expand: M must exceed N");
    detail::require<CapacityError>(M <= kMaxGluedHeight, "expand: M above 24");
    const std::size_t total = 2 * ((std::size_t{1} << (M + 1)) - 1);
    detail::require<CapacityError>(total <= kMaxExpandedVertices, "expand: expanded graph too large");
    ExpandedGluedTrees e;
    e.N = N;
    e.M = M;
    auto add = [&](const std::string& name, int layer, std::int64_t inst, VertexId base) {
        const VertexId v = e.graph.add_vertex(name);
        e.layer.push_back(layer);
        e.instance.push_back(inst);
        e.base_vertex.push_back(base);
        return v;
    };
    const int h = M - N;
    auto tree = [&](const char* tag, int sign, int root_layer, VertexId leaf_base) {
        std::vector<VertexId> prev, cur;
        for (int d = 0; d <= h; ++d) {
            cur.clear();
            for (std::uint64_t i = 0; i < (std::uint64_t{1} << d); ++i) {
                const bool leaf = d == h;
                const VertexId v = add(std::string(tag) + ":" + std::to_string(d) + "." + std::to_string(i),
                                       root_layer + sign * d, leaf ? static_cast<std::int64_t>(i) : -1,
                                       leaf ? leaf_base : kNoVertex);
                if (d > 0) e.graph.add_edge(v, prev[i / 2]);
                cur.push_back(v);
            }
            prev.swap(cur);
        }
        return prev;
    };
    const auto t1_leaves = tree("T1", 1, -M, g.root1);
    const auto t2_leaves = tree("T2", -1, M + 1, g.root2);
    e.root1 = e.graph.id("T1:0.0");
    e.root2 = e.graph.id("T2:0.0");

    std::vector<VertexId> map(g.graph.size());
    for (std::size_t inst = 0; inst < e.instances(); ++inst) {
        for (VertexId b = 0; b < g.graph.size(); ++b) {
            if (b == g.root1)
                map[b] = t1_leaves[inst];
            else if (b == g.root2)
                map[b] = t2_leaves[inst];
            else
                map[b] = add("I" + std::to_string(inst) + ":" + g.graph.name(b), g.layer[b],
                             static_cast<std::int64_t>(inst), b);
        }
        for (VertexId b = 0; b < g.graph.size(); ++b)
            for (VertexId c : g.graph.neighbors(b))
                if (b < c) e.graph.add_edge(map[b], map[c]);
    }
    e.layers.assign(static_cast<std::size_t>(2 * M + 2), {});
    for (VertexId v = 0; v < e.graph.size(); ++v) e.layers[static_cast<std::size_t>(e.layer[v] + M)].push_back(v);
    return e;
}

// ---------------------------------------------------------------------------
// Oracle

/// Black-box access to a glued trees graph through random labels of 2N + 2
/// bits. Every neighbors() call counts as one query.
class Oracle {
public:
    using Label = std::uint64_t;

    Oracle(const GluedTrees& g, std::uint64_t seed) : graph_(g.graph), root1_(g.root1), bits_(2 * g.N + 2), rng_(seed) {
        detail::require(g.N >= 1 && bits_ <= 62, "Oracle: unsupported height");
        const Label mask = (Label{1} << bits_) - 1;
        std::unordered_set<Label> used;
        labels_.resize(graph_.size());
        for (VertexId v = 0; v < graph_.size(); ++v) {
            Label l;
            do l = rng_() & mask;
            while (!used.insert(l).second);
            labels_[v] = l;
            by_label_.emplace(l, v);
        }
    }

    Oracle(const Oracle&) = delete;
    Oracle& operator=(const Oracle&) = delete;

    int label_bits() const { return bits_; }
    Label entrance() const { return labels_[root1_]; }

    /// Neighbour labels in random order, or nullopt (the failure symbol) for an
    /// invalid label.
    std::optional<std::vector<Label>> neighbors(Label l) {
        ++queries_;
        auto it = by_label_.find(l);
        if (it == by_label_.end()) return std::nullopt;
        std::vector<Label> out;
        for (VertexId w : graph_.neighbors(it->second)) out.push_back(labels_[w]);
        std::lock_guard<std::mutex> lock(mutex_);
        std::shuffle(out.begin(), out.end(), rng_);
        return out;
    }

    std::uint64_t queries() const { return queries_.load(); }

    // Ground truth for test harnesses; not part of the black box.
    Label label_of(VertexId v) const { return labels_.at(v); }

private:
    Graph graph_;
    VertexId root1_;
    int bits_;
    std::vector<Label> labels_;
    std::unordered_map<Label, VertexId> by_label_;
    std::mt19937_64 rng_;
    std::mutex mutex_;
    std::atomic<std::uint64_t> queries_{0};
};

/// Learns the hidden graph by breadth-first search from the entrance. Every
/// edge joins adjacent layers, so layer = distance from the entrance - N.
inline GluedTrees discover(Oracle& oracle, int N) {
    GluedTrees g;
    g.N = N;
    std::unordered_map<Oracle::Label, VertexId> id;
    std::vector<VertexId> queue;
    auto vertex = [&](Oracle::Label l, int layer) {
        auto [it, fresh] = id.emplace(l, static_cast<VertexId>(g.labels.size()));
        if (fresh) {
            g.graph.add_vertex(std::to_string(l));
            g.labels.push_back(l);
            g.layer.push_back(layer);
            queue.push_back(it->second);
        }
        return it->second;
    };
    g.root1 = vertex(oracle.entrance(), -N);
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const VertexId v = queue[head];
        const auto nbrs = oracle.neighbors(g.labels[v]);
        if (!nbrs) throw OracleValidationError("discover: oracle rejected a label it returned");
        for (auto l : *nbrs) {
            const VertexId w = vertex(l, g.layer[v] + 1);
            if (!g.graph.has_edge(v, w)) g.graph.add_edge(v, w);
        }
    }
    const std::size_t expected = 2 * ((std::size_t{1} << (N + 1)) - 1);
    if (g.graph.size() != expected)
        throw OracleValidationError("discover: found " + std::to_string(g.graph.size()) + " vertices, expected " +
                                    std::to_string(expected));
    std::optional<VertexId> exit;
    for (VertexId v = 0; v < g.graph.size(); ++v) {
        if (v != g.root1 && g.graph.degree(v) == 2) {
            if (exit) throw OracleValidationError("discover: more than one candidate exit");
            exit = v;
        }
    }
    if (!exit || g.layer[*exit] != N + 1) throw OracleValidationError("discover: exit root not found at layer N+1");
    g.root2 = *exit;
    return g;
}

// ---------------------------------------------------------------------------
// Column subspace of A_n(G^M)
//
// |x, j⟩ is the normalized uniform superposition of the snakes whose vertex
// layers are x, x + h_1(j), ..., x + h_n(j). Inside any layer every vertex has
// the same number of neighbours one layer up and one layer down, so column
// sizes and A_n(G^M) matrix elements are pure counting.

inline double glued_layer_size(int M, std::int64_t y) {
    if (y < -M || y > M + 1) return 0.0;
    return std::ldexp(1.0, static_cast<int>(y <= 0 ? M + y : M + 1 - y));
}

/// Neighbours one layer up (+1) or down (-1) of a vertex on layer y.
inline double glued_branching(int M, std::int64_t y, bool up) {
    if (y < -M || y > M + 1) return 0.0;
    if (up) return y <= 0 ? 2.0 : (y <= M ? 1.0 : 0.0);
    return y >= 1 ? 2.0 : (y > -M ? 1.0 : 0.0);
}

/// |S_{x,j}|, the number of snakes of G^M in column (x, j).
inline double glued_column_size(int M, std::int64_t x, Word j, int n) {
    double size = glued_layer_size(M, x);
    std::int64_t y = x;
    for (int l = 1; l <= n && size > 0; ++l) {
        const bool up = word_bit(j, n, l) != 0;
        size *= glued_branching(M, y, up);
        y += up ? 1 : -1;
    }
    return size;
}

/// Sign-free layer profile of column (x, j).
inline std::vector<std::int64_t> column_layers(std::int64_t x, Word j, int n) {
    std::vector<std::int64_t> z{x};
    for (int l = 1; l <= n; ++l) z.push_back(z.back() + (word_bit(j, n, l) ? 1 : -1));
    return z;
}

/// A_n(G^M) on column states over x in [-M, M+1]; empty columns get empty rows.
inline SparseReal glued_column_hamiltonian(int M, int n) {
    detail::require(n >= 1 && n <= kMaxMomentumN, "glued_column_hamiltonian: n outside [1, 20]");
    const std::int64_t x_min = -M, x_max = M + 1;
    const std::int64_t words = std::int64_t{1} << n;
    const std::int64_t dim = (x_max - x_min + 1) * words;
    detail::require<CapacityError>(dim < std::int64_t{1} << 30, "glued_column_hamiltonian: too many columns");
    const Word mask = static_cast<Word>(words - 1);
    std::vector<double> size(static_cast<std::size_t>(dim));
    for (std::int64_t x = x_min; x <= x_max; ++x)
        for (Word j = 0; j < words; ++j) size[(x - x_min) * words + j] = glued_column_size(M, x, j, n);
    // Forward moves S -> S' number |S| times the branching at the head.
    std::vector<Eigen::Triplet<double>> t;
    for (std::int64_t x = x_min; x <= x_max; ++x) {
        for (Word j = 0; j < words; ++j) {
            const std::int64_t from = (x - x_min) * words + j;
            if (size[from] == 0.0) continue;
            const auto z = column_layers(x, j, n);
            const std::int64_t x2 = z[1];
            for (Word b = 0; b <= 1; ++b) {
                const double count = size[from] * glued_branching(M, z.back(), b != 0);
                if (count == 0.0) continue;
                const std::int64_t to = (x2 - x_min) * words + (((j << 1) | b) & mask);
                const double w = count / std::sqrt(size[from] * size[to]);
                t.emplace_back(static_cast<int>(to), static_cast<int>(from), w);
                t.emplace_back(static_cast<int>(from), static_cast<int>(to), w);
            }
        }
    }
    SparseReal h(dim, dim);
    h.setFromTriplets(t.begin(), t.end());
    return h;
}

/// Column (x, j) of a snake of G^M.
inline std::pair<std::int64_t, Word> snake_column(const ExpandedGluedTrees& g, const Snake& s) {
    const int n = static_cast<int>(s.length());
    Word j = 0;
    for (int l = 1; l <= n; ++l) {
        const int step = g.layer[s.vertices[l]] - g.layer[s.vertices[l - 1]];
        if (std::abs(step) != 1) throw InternalError("snake_column: step does not change layer by one");
        j = (j << 1) | (step > 0 ? 1u : 0u);
    }
    return {g.layer[s.vertices[0]], j};
}

struct ColumnInvarianceReport {
    std::size_t snakes = 0;
    std::size_t columns = 0;
    double invariance_residual = 0.0;    // max |A C - C CᵀA C|
    double counting_difference = 0.0;    // CᵀA C against glued_column_hamiltonian
    double interior_difference = 0.0;    // CᵀA C against column_hamiltonian away from the roots
    std::size_t interior_entries = 0;
    double seed_difference = 0.0;        // CᵀA C for two cycles
};

namespace detail {

struct ProjectedColumns {
    SparseReal a;
    Eigen::SparseMatrix<double> c;  // snakes × columns, column index (x + M) 2^n + j
    std::size_t snakes = 0;
    std::size_t columns = 0;
};

inline ProjectedColumns project_columns(const ExpandedGluedTrees& g, int n, std::size_t capacity) {
    const auto space = enumerate_snakes(g.graph, n, capacity);
    ProjectedColumns p;
    p.snakes = space.size();
    p.a = snake_adjacency(g.graph, space);
    const std::int64_t words = std::int64_t{1} << n;
    const std::int64_t ncols = (2 * g.M + 2) * words;
    std::vector<std::int64_t> col(space.size());
    std::vector<double> count(static_cast<std::size_t>(ncols), 0.0);
    for (std::size_t i = 0; i < space.size(); ++i) {
        const auto [x, j] = snake_column(g, space[i]);
        col[i] = (x + g.M) * words + j;
        count[col[i]] += 1.0;
    }
    std::vector<Eigen::Triplet<double>> t;
    for (std::size_t i = 0; i < space.size(); ++i)
        t.emplace_back(static_cast<int>(i), static_cast<int>(col[i]), 1.0 / std::sqrt(count[col[i]]));
    p.c.resize(static_cast<Eigen::Index>(space.size()), ncols);
    p.c.setFromTriplets(t.begin(), t.end());
    p.columns = static_cast<std::size_t>(std::count_if(count.begin(), count.end(), [](double c) { return c > 0; }));
    return p;
}

}  // namespace detail

/// Projects A_n(G^M) onto the column states of an explicit G^M and checks
/// invariance and both closed forms of the column Hamiltonian.
inline ColumnInvarianceReport column_invariance_check(int N, int M, int n, std::uint64_t seed,
                                                      std::uint64_t other_seed,
                                                      std::size_t capacity = kDefaultSnakeCapacity) {
    ColumnInvarianceReport r;
    const auto g = expand(make_glued_trees(N, seed), M);
    const auto p = detail::project_columns(g, n, capacity);
    r.snakes = p.snakes;
    r.columns = p.columns;
    const Eigen::MatrixXd c(p.c);
    const Eigen::MatrixXd ac = p.a * c;
    const Eigen::MatrixXd hc = c.transpose() * ac;
    r.invariance_residual = (ac - c * hc).cwiseAbs().maxCoeff();

    const Eigen::MatrixXd counted(glued_column_hamiltonian(M, n));
    r.counting_difference = (hc - counted).cwiseAbs().maxCoeff();

    const std::int64_t words = std::int64_t{1} << n;
    // The displayed form needs a window of at least 4n; pad and read the middle.
    const std::int64_t pad = 2 * n;
    const Eigen::MatrixXd display_full(column_hamiltonian(n, -M - pad, M + 1 + pad));
    const Eigen::MatrixXd display = display_full.block(pad * words, pad * words, hc.rows(), hc.cols());
    auto interior = [&](Eigen::Index idx) {
        const auto z = column_layers(idx / words - M, static_cast<Word>(idx % words), n);
        return *std::min_element(z.begin(), z.end()) >= -M + 1 && *std::max_element(z.begin(), z.end()) <= M;
    };
    for (Eigen::Index a = 0; a < hc.rows(); ++a) {
        if (!interior(a)) continue;
        for (Eigen::Index b = 0; b < hc.cols(); ++b) {
            if (!interior(b)) continue;
            r.interior_difference = std::max(r.interior_difference, std::abs(hc(a, b) - display(a, b)));
            ++r.interior_entries;
        }
    }

    const auto g2 = expand(make_glued_trees(N, other_seed), M);
    const auto p2 = detail::project_columns(g2, n, capacity);
    const Eigen::MatrixXd c2(p2.c);
    r.seed_difference = (c2.transpose() * (p2.a * c2) - hc).cwiseAbs().maxCoeff();
    return r;
}

// ---------------------------------------------------------------------------
// Root paths

inline bool is_bridging(const ExpandedGluedTrees& g, const Snake& s) {
    bool t1 = false, t2 = false;
    for (VertexId v : s.vertices) t1 |= g.in_T1(v), t2 |= g.in_T2(v);
    return t1 && t2;
}

/// The base-graph path from root1 to root2 crossed by a bridging snake, with
/// loops erased; nullopt when the snake does not bridge T1 and T2.
inline std::optional<std::vector<VertexId>> extract_root_path(const Snake& s, const ExpandedGluedTrees& g) {
    const auto& v = s.vertices;
    const int N = g.N;
    std::int64_t last1 = -1, last2 = -1;
    std::optional<std::pair<std::size_t, std::size_t>> seg;
    bool reversed = false;
    for (std::size_t i = 0; i < v.size() && !seg; ++i) {
        const int y = g.layer[v[i]];
        if (y == N + 1 && last1 > last2) seg = {static_cast<std::size_t>(last1), i};
        if (y == -N && last2 > last1) seg = {static_cast<std::size_t>(last2), i}, reversed = true;
        if (y <= -N) last1 = static_cast<std::int64_t>(i);
        if (y >= N + 1) last2 = static_cast<std::int64_t>(i);
    }
    if (!seg) return std::nullopt;
    std::vector<VertexId> walk(v.begin() + static_cast<std::ptrdiff_t>(seg->first),
                               v.begin() + static_cast<std::ptrdiff_t>(seg->second) + 1);
    if (reversed) std::reverse(walk.begin(), walk.end());
    const std::int64_t inst = g.instance[walk.front()];
    std::vector<VertexId> path;
    std::unordered_map<VertexId, std::size_t> at;
    for (VertexId w : walk) {
        if (g.instance[w] != inst) throw InternalError("extract_root_path: crossing leaves its instance");
        if (auto it = at.find(w); it != at.end()) {
            for (std::size_t k = it->second + 1; k < path.size(); ++k) at.erase(path[k]);
            path.resize(it->second + 1);
        } else {
            at.emplace(w, path.size());
            path.push_back(w);
        }
    }
    std::vector<VertexId> base;
    base.reserve(path.size());
    for (VertexId w : path) base.push_back(g.base_vertex[w]);
    return base;
}

/// Walks a base-graph path through the oracle, edge by edge, and returns its
/// labels. Throws OracleValidationError on any mismatch.
inline std::vector<Oracle::Label> validate_root_path(Oracle& oracle, const GluedTrees& base,
                                                     const std::vector<VertexId>& path) {
    auto label = [&](VertexId v) { return base.labels.empty() ? oracle.label_of(v) : base.labels.at(v); };
    if (path.size() < static_cast<std::size_t>(2 * base.N + 2))
        throw OracleValidationError("root path shorter than 2N+1 edges");
    std::vector<Oracle::Label> out;
    for (VertexId v : path) out.push_back(label(v));
    if (out.front() != oracle.entrance()) throw OracleValidationError("root path does not start at the entrance");
    std::unordered_set<Oracle::Label> seen;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (!seen.insert(out[i]).second) throw OracleValidationError("root path repeats a vertex");
        const auto nbrs = oracle.neighbors(out[i]);
        if (!nbrs) throw OracleValidationError("root path contains an invalid label");
        if (i + 1 < out.size() && std::find(nbrs->begin(), nbrs->end(), out[i + 1]) == nbrs->end())
            throw OracleValidationError("root path step " + std::to_string(i) + " is not an edge");
        if (i + 1 == out.size() && nbrs->size() != 2)
            throw OracleValidationError("root path does not end at the exit root");
    }
    return out;
}

// ---------------------------------------------------------------------------
// Search driver

enum class SimulationMode { automatic, exact, column };

inline const char* mode_name(SimulationMode m) {
    switch (m) {
        case SimulationMode::exact: return "exact";
        case SimulationMode::column: return "column";
        default: return "automatic";
    }
}

struct GluedRunOptions {
    int N = 1;
    int M = 3;
    int n = 3;
    WavePacketSpec packet{-2, 1.5 * std::numbers::pi, 0.25};
    double t = 4.0;
    std::size_t samples = 1;
    std::uint64_t seed = 0;
    SimulationMode mode = SimulationMode::automatic;
    std::size_t capacity = kDefaultSnakeCapacity;
    std::size_t grid = 4096;
};

struct SampledSnake {
    std::int64_t x = 0;
    Word word = 0;
    std::vector<std::string> vertices;  // names in G^M; empty when not realized
    bool bridging = false;
    std::vector<Oracle::Label> path;    // validated root path, bridging samples only
};

struct GluedRunResult {
    SimulationMode mode = SimulationMode::automatic;
    std::uint64_t snake_count = 0;        // |S_n(G^M)|
    double packet_mass_in_T1 = 0.0;       // before renormalization
    double bridging_probability = 0.0;    // of the final state
    double final_norm = 0.0;
    std::uint64_t queries_before_sampling = 0;
    std::uint64_t queries_total = 0;
    std::vector<SampledSnake> samples;
    std::string warning;
};

namespace detail {

/// ξ on the columns of G^M lying inside T1, renormalized.
inline ColumnState initial_column_packet(const GluedRunOptions& o, double* mass) {
    const int n = o.n, M = o.M, N = o.N;
    const MomentumGrid grid(o.grid);
    const BandSamples band = sample_band(packet_band(n), grid);
    const ColumnState xi = build_xi(o.packet, band);
    ColumnState s = ColumnState::zeros(n, -M, M + 1);
    const Word words = static_cast<Word>(s.words());
    for (std::int64_t x = -M; x <= -N; ++x) {
        if (!xi.contains(x)) continue;
        for (Word j = 0; j < words; ++j) {
            const auto z = column_layers(x, j, n);
            if (*std::min_element(z.begin(), z.end()) < -M || *std::max_element(z.begin(), z.end()) > -N) continue;
            s.amplitudes[s.index(x, j)] = xi.amplitudes[xi.index(x, j)];
        }
    }
    *mass = s.amplitudes.squaredNorm();
    if (!(*mass > 1e-300)) throw PreconditionError("run_algorithm: the packet has no weight on snakes inside T1");
    s.amplitudes /= std::sqrt(*mass);
    return s;
}

inline std::size_t sample_index(const std::vector<double>& cdf, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, cdf.back());
    const double r = u(rng);
    auto it = std::upper_bound(cdf.begin(), cdf.end(), r);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
}

inline bool column_bridges(std::int64_t x, Word j, int n, int N) {
    const auto z = column_layers(x, j, n);
    return *std::min_element(z.begin(), z.end()) <= -N && *std::max_element(z.begin(), z.end()) >= N + 1;
}

/// Uniform snake in column (x, j): uniform start on layer x, then a uniform
/// neighbour on the next layer at every step.
inline Snake realize_column(const ExpandedGluedTrees& g, std::int64_t x, Word j, int n, std::mt19937_64& rng) {
    const auto& start = g.layer_vertices(static_cast<int>(x));
    std::uniform_int_distribution<std::size_t> pick(0, start.size() - 1);
    Snake s;
    s.vertices.push_back(start[pick(rng)]);
    for (int l = 1; l <= n; ++l) {
        const int target = g.layer[s.vertices.back()] + (word_bit(j, n, l) ? 1 : -1);
        std::vector<VertexId> options;
        for (VertexId w : g.graph.neighbors(s.vertices.back()))
            if (g.layer[w] == target) options.push_back(w);
        if (options.empty()) throw InternalError("realize_column: empty column");
        std::uniform_int_distribution<std::size_t> choose(0, options.size() - 1);
        s.vertices.push_back(options[choose(rng)]);
    }
    return s;
}

inline SampledSnake describe(const ExpandedGluedTrees& g, const GluedTrees& base, const Snake& s, Oracle& oracle) {
    SampledSnake out;
    std::tie(out.x, out.word) = snake_column(g, s);
    for (VertexId v : s.vertices) out.vertices.push_back(g.graph.name(v));
    out.bridging = is_bridging(g, s);
    if (out.bridging) {
        const auto path = extract_root_path(s, g);
        if (!path) throw InternalError("run_algorithm: bridging snake without a crossing");
        out.path = validate_root_path(oracle, base, *path);
    }
    return out;
}

}  // namespace detail

/// Snake-walk search on G^M: a ξ packet over T1, evolution for time t, and
/// seeded measurements in the snake basis. Bridging samples are turned into
/// root paths and validated against the oracle.
inline GluedRunResult run_algorithm(Oracle& oracle, const GluedRunOptions& o) {
    detail::require(o.N >= 1, "run_algorithm: N must be at least 1");
    detail::require(o.M > o.N, "run_algorithm: M must exceed N");
    detail::require(o.n >= 2 * o.N + 1, "run_algorithm: n must be at least 2N+1");
    detail::require(o.t >= 0.0, "run_algorithm: t must be non-negative");
    detail::require(o.samples >= 1, "run_algorithm: need at least one sample");

    GluedRunResult r;
    const int n = o.n, M = o.M, N = o.N;
    const std::int64_t words = std::int64_t{1} << n;
    double total = 0.0;
    for (std::int64_t x = -M; x <= M + 1; ++x)
        for (Word j = 0; j < words; ++j) total += glued_column_size(M, x, j, n);
    r.snake_count = static_cast<std::uint64_t>(std::min(total, 1.8e19));
    r.mode = o.mode;
    if (r.mode == SimulationMode::automatic)
        r.mode = total <= static_cast<double>(o.capacity) ? SimulationMode::exact : SimulationMode::column;
    if (r.mode == SimulationMode::exact && total > static_cast<double>(o.capacity))
        throw CapacityError("run_algorithm: " + std::to_string(r.snake_count) + " snakes exceed capacity");

    const ColumnState init = detail::initial_column_packet(o, &r.packet_mass_in_T1);

    std::mt19937_64 rng(o.seed);
    if (r.mode == SimulationMode::exact) {
        const GluedTrees base = discover(oracle, N);
        const auto g = expand(base, M);
        const auto space = enumerate_snakes(g.graph, n, o.capacity);
        const SparseReal a = snake_adjacency(g.graph, space);
        Eigen::VectorXcd v(static_cast<Eigen::Index>(space.size()));
        for (std::size_t i = 0; i < space.size(); ++i) {
            const auto [x, j] = snake_column(g, space[i]);
            v[static_cast<Eigen::Index>(i)] = init.amplitudes[init.index(x, j)] / std::sqrt(glued_column_size(M, x, j, n));
        }
        const Eigen::VectorXcd w =
            o.t == 0.0 ? v : evolve(a, o.t, v, a.rows() <= kMaxDenseDimension ? Method::dense : Method::chebyshev);
        r.final_norm = w.norm();
        std::vector<double> cdf(space.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < space.size(); ++i) {
            const double p = std::norm(w[static_cast<Eigen::Index>(i)]);
            acc += p;
            cdf[i] = acc;
            if (is_bridging(g, space[i])) r.bridging_probability += p;
        }
        r.queries_before_sampling = oracle.queries();
        for (std::size_t s = 0; s < o.samples; ++s)
            r.samples.push_back(detail::describe(g, base, space[detail::sample_index(cdf, rng)], oracle));
    } else {
        const SparseReal h = glued_column_hamiltonian(M, n);
        const Eigen::VectorXcd w =
            o.t == 0.0 ? init.amplitudes
                       : evolve(h, o.t, init.amplitudes, h.rows() <= kMaxDenseDimension ? Method::dense : Method::chebyshev);
        r.final_norm = w.norm();
        std::vector<double> cdf(static_cast<std::size_t>(w.size()));
        double acc = 0.0;
        for (Eigen::Index i = 0; i < w.size(); ++i) {
            const double p = std::norm(w[i]);
            acc += p;
            cdf[static_cast<std::size_t>(i)] = acc;
            if (p > 0.0 && detail::column_bridges(i / words - M, static_cast<Word>(i % words), n, N))
                r.bridging_probability += p;
        }
        r.queries_before_sampling = oracle.queries();
        std::optional<GluedTrees> base;
        std::optional<ExpandedGluedTrees> g;
        const bool realizable = 2 * ((std::size_t{1} << (M + 1)) - 1) <= kMaxExpandedVertices;
        if (!realizable) r.warning = "G^M too large to realize snakes; samples report columns only";
        for (std::size_t s = 0; s < o.samples; ++s) {
            const std::size_t i = detail::sample_index(cdf, rng);
            const std::int64_t x = static_cast<std::int64_t>(i) / words - M;
            const Word j = static_cast<Word>(static_cast<std::int64_t>(i) % words);
            if (!realizable) {
                SampledSnake out;
                out.x = x;
                out.word = j;
                out.bridging = detail::column_bridges(x, j, n, N);
                r.samples.push_back(out);
                continue;
            }
            if (!g) {
                base = discover(oracle, N);
                g = expand(*base, M);
            }
            r.samples.push_back(detail::describe(*g, *base, detail::realize_column(*g, x, j, n, rng), oracle));
        }
    }
    r.queries_total = oracle.queries();
    return r;
}

}  // namespace snakewalk
