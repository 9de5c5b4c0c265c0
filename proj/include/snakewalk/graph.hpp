#pragma once

// Host graphs, snake configuration spaces and the snake-walk Hamiltonian A_n(G).

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cstdint>
#include <istream>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "error.hpp"

namespace snakewalk {

using VertexId = std::uint32_t;
using SparseReal = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Undirected simple graph with string vertex names.
class Graph {
public:
    VertexId add_vertex(const std::string& name) {
        if (auto it = by_name_.find(name); it != by_name_.end()) return it->second;
        const auto id = static_cast<VertexId>(names_.size());
        names_.push_back(name);
        adjacency_.emplace_back();
        by_name_.emplace(name, id);
        return id;
    }

    /// Adds {u, v}. Self-loops and repeated edges are rejected.
    void add_edge(VertexId u, VertexId v) {
        detail::require(u < size() && v < size(), "add_edge: unknown vertex");
        detail::require(u != v, "add_edge: self-loop on '" + names_[u] + "'");
        auto& nu = adjacency_[u];
        auto pos = std::lower_bound(nu.begin(), nu.end(), v);
        detail::require(pos == nu.end() || *pos != v,
                        "add_edge: duplicate edge '" + names_[u] + "' -- '" + names_[v] + "'");
        nu.insert(pos, v);
        auto& nv = adjacency_[v];
        nv.insert(std::lower_bound(nv.begin(), nv.end(), u), u);
        ++edge_count_;
    }

    void add_edge(const std::string& u, const std::string& v) { add_edge(add_vertex(u), add_vertex(v)); }

    std::size_t size() const { return names_.size(); }
    std::size_t edge_count() const { return edge_count_; }
    bool empty() const { return names_.empty(); }

    /// Neighbours in ascending id order.
    std::span<const VertexId> neighbors(VertexId v) const { return adjacency_[v]; }
    std::size_t degree(VertexId v) const { return adjacency_[v].size(); }

    bool has_edge(VertexId u, VertexId v) const {
        const auto& nu = adjacency_[u];
        return std::binary_search(nu.begin(), nu.end(), v);
    }

    const std::string& name(VertexId v) const { return names_[v]; }

    VertexId id(const std::string& name) const {
        auto it = by_name_.find(name);
        if (it == by_name_.end()) throw PreconditionError("unknown vertex '" + name + "'");
        return it->second;
    }

private:
    std::vector<std::string> names_;
    std::vector<std::vector<VertexId>> adjacency_;
    std::unordered_map<std::string, VertexId> by_name_;
    std::size_t edge_count_ = 0;
};

/// Reads "u v" pairs, one per line. Blank lines and '#' comments are skipped.
inline Graph read_edge_list(std::istream& in) {
    Graph g;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream fields(line);
        std::string u, v, extra;
        if (!(fields >> u)) continue;
        if (!(fields >> v) || (fields >> extra))
            throw ParseError("edge list line " + std::to_string(line_no) + ": expected exactly two vertex ids");
        try {
            g.add_edge(u, v);
        } catch (const PreconditionError& e) {
            throw ParseError("edge list line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return g;
}

/// A directed walk (v_0, ..., v_n). Reversal gives a different snake.
struct Snake {
    std::vector<VertexId> vertices;

    std::size_t length() const { return vertices.empty() ? 0 : vertices.size() - 1; }
    bool operator==(const Snake&) const = default;
    auto operator<=>(const Snake&) const = default;
};

struct SnakeHash {
    std::size_t operator()(const Snake& s) const noexcept {
        std::uint64_t h = 1469598103934665603ULL;
        for (VertexId v : s.vertices) {
            h ^= v;
            h *= 1099511628211ULL;
        }
        return static_cast<std::size_t>(h);
    }
};

inline constexpr std::size_t kDefaultSnakeCapacity = 5'000'000;

/// |S_n(G)| as the sum of entries of A^n, saturating at the uint64 maximum.
inline std::uint64_t count_snakes(const Graph& g, int n) {
    constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
    std::vector<std::uint64_t> ending(g.size(), 1), next(g.size());
    for (int step = 0; step < n; ++step) {
        std::fill(next.begin(), next.end(), 0);
        for (VertexId v = 0; v < g.size(); ++v)
            for (VertexId w : g.neighbors(v))
                next[w] = (kMax - next[w] < ending[v]) ? kMax : next[w] + ending[v];
        ending.swap(next);
    }
    std::uint64_t total = 0;
    for (auto c : ending) total = (kMax - total < c) ? kMax : total + c;
    return total;
}

/// Enumerated S_n(G) with a snake -> ordinal index.
class SnakeSpace {
public:
    int length() const { return n_; }
    std::size_t size() const { return snakes_.size(); }
    const std::vector<Snake>& snakes() const { return snakes_; }
    const Snake& operator[](std::size_t i) const { return snakes_[i]; }

    /// Ordinal of s, or size() when s is not in the space.
    std::size_t index_of(const Snake& s) const {
        auto it = index_.find(s);
        return it == index_.end() ? size() : it->second;
    }
    bool contains(const Snake& s) const { return index_.count(s) != 0; }

private:
    friend SnakeSpace enumerate_snakes(const Graph&, int, std::size_t);
    int n_ = 0;
    std::vector<Snake> snakes_;
    std::unordered_map<Snake, std::size_t, SnakeHash> index_;
};

/// All directed walks of length n, in lexicographic order of vertex ids.
inline SnakeSpace enumerate_snakes(const Graph& g, int n, std::size_t capacity = kDefaultSnakeCapacity) {
    detail::require(n >= 1, "enumerate_snakes: snake length must be at least 1");
    detail::require(!g.empty(), "enumerate_snakes: graph is empty");
    const auto expected = count_snakes(g, n);
    if (expected > capacity)
        throw CapacityError("enumerate_snakes: " + std::to_string(expected) + " snakes exceed capacity " +
                            std::to_string(capacity));

    SnakeSpace space;
    space.n_ = n;
    space.snakes_.reserve(expected);
    space.index_.reserve(expected);
    std::vector<VertexId> path(n + 1);
    // Iterative DFS over choice indices keeps the order lexicographic.
    std::vector<std::size_t> choice(n + 1, 0);
    for (VertexId start = 0; start < g.size(); ++start) {
        path[0] = start;
        int depth = 1;
        choice[1] = 0;
        while (depth >= 1) {
            auto nbrs = g.neighbors(path[depth - 1]);
            if (choice[depth] >= nbrs.size()) {
                --depth;
                if (depth >= 1) ++choice[depth];
                continue;
            }
            path[depth] = nbrs[choice[depth]];
            if (depth == n) {
                space.index_.emplace(Snake{path}, space.snakes_.size());
                space.snakes_.push_back(Snake{path});
                ++choice[depth];
            } else {
                ++depth;
                choice[depth] = 0;
            }
        }
    }
    if (space.snakes_.size() != expected) throw InternalError("enumerate_snakes: count mismatch");
    return space;
}

inline bool is_snake(const Graph& g, const Snake& s) {
    for (std::size_t l = 1; l < s.vertices.size(); ++l)
        if (!g.has_edge(s.vertices[l - 1], s.vertices[l])) return false;
    return !s.vertices.empty();
}

/// m_f(s, t): t = (v_1, ..., v_n, w) with w adjacent to v_n.
inline bool can_move_forward(const Graph& g, const Snake& s, const Snake& t) {
    detail::require(s.vertices.size() == t.vertices.size(), "can_move_forward: snake lengths differ");
    const auto& a = s.vertices;
    const auto& b = t.vertices;
    if (a.empty()) return false;
    if (!std::equal(a.begin() + 1, a.end(), b.begin())) return false;
    return g.has_edge(a.back(), b.back());
}

/// m_b(s, t): t = (w, v_0, ..., v_{n-1}) with w adjacent to v_0.
inline bool can_move_backward(const Graph& g, const Snake& s, const Snake& t) {
    return can_move_forward(g, t, s);
}

/// a_{s,t} = m_f(s,t) + m_b(s,t) over the whole space, as a sparse symmetric matrix.
inline SparseReal snake_adjacency(const Graph& g, const SnakeSpace& space) {
    const std::size_t n = static_cast<std::size_t>(space.length());
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(space.size() * 6);
    Snake moved;
    moved.vertices.resize(n + 1);
    for (std::size_t i = 0; i < space.size(); ++i) {
        const auto& v = space[i].vertices;
        // forward: drop tail, extend head
        std::copy(v.begin() + 1, v.end(), moved.vertices.begin());
        for (VertexId w : g.neighbors(v.back())) {
            moved.vertices[n] = w;
            triplets.emplace_back(static_cast<int>(i), static_cast<int>(space.index_of(moved)), 1.0);
        }
        // backward: drop head, extend tail
        std::copy(v.begin(), v.end() - 1, moved.vertices.begin() + 1);
        for (VertexId w : g.neighbors(v.front())) {
            moved.vertices[0] = w;
            triplets.emplace_back(static_cast<int>(i), static_cast<int>(space.index_of(moved)), 1.0);
        }
    }
    SparseReal a(static_cast<Eigen::Index>(space.size()), static_cast<Eigen::Index>(space.size()));
    a.setFromTriplets(triplets.begin(), triplets.end());  // duplicates sum to weight 2
    return a;
}

// ---------------------------------------------------------------------------
// Snakes on the integer line, encoded as (start x, move word j).
//
// Bit l of the word (1-based, j_1 is the most significant of the n bits) is 0
// for a step -1 and 1 for a step +1.

using Word = std::uint32_t;

struct LineCode {
    std::int64_t x = 0;
    Word word = 0;
    int n = 0;
    bool operator==(const LineCode&) const = default;
};

inline int word_bit(Word j, int n, int l) { return static_cast<int>((j >> (n - l)) & 1u); }

inline LineCode line_encode(std::span<const std::int64_t> vertices) {
    detail::require(vertices.size() >= 2, "line_encode: snake needs at least one edge");
    const int n = static_cast<int>(vertices.size()) - 1;
    detail::require(n <= 31, "line_encode: snake too long for a 32-bit word");
    LineCode code{vertices[0], 0, n};
    for (int l = 1; l <= n; ++l) {
        const auto step = vertices[l] - vertices[l - 1];
        if (step != 1 && step != -1)
            throw PreconditionError("line_encode: consecutive vertices are not adjacent on the line");
        code.word = (code.word << 1) | (step == 1 ? 1u : 0u);
    }
    return code;
}

inline std::vector<std::int64_t> line_decode(const LineCode& code) {
    std::vector<std::int64_t> v(code.n + 1);
    v[0] = code.x;
    for (int l = 1; l <= code.n; ++l) v[l] = v[l - 1] + (word_bit(code.word, code.n, l) ? 1 : -1);
    return v;
}

/// H_n = A_n(line) on start positions [x_min, x_max], indexed (x - x_min) * 2^n + j.
/// Moves whose new start leaves the window are dropped.
inline SparseReal line_window_adjacency(int n, std::int64_t x_min, std::int64_t x_max) {
    detail::require(n >= 1 && n <= 24, "line_window_adjacency: n out of range");
    detail::require(x_max >= x_min, "line_window_adjacency: empty window");
    const std::int64_t dim = std::int64_t{1} << n;
    const std::int64_t width = x_max - x_min + 1;
    const Word mask = static_cast<Word>(dim - 1);
    auto index = [&](std::int64_t x, Word j) { return static_cast<int>((x - x_min) * dim + j); };
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(width * dim * 4));
    for (std::int64_t x = x_min; x <= x_max; ++x) {
        for (Word j = 0; j < static_cast<Word>(dim); ++j) {
            const int row = index(x, j);
            const std::int64_t fx = x + (word_bit(j, n, 1) ? 1 : -1);
            if (fx >= x_min && fx <= x_max)
                for (Word b = 0; b < 2; ++b) triplets.emplace_back(row, index(fx, ((j << 1) | b) & mask), 1.0);
            const Word shifted = j >> 1;
            if (x - 1 >= x_min) triplets.emplace_back(row, index(x - 1, shifted | (Word{1} << (n - 1))), 1.0);
            if (x + 1 <= x_max) triplets.emplace_back(row, index(x + 1, shifted), 1.0);
        }
    }
    SparseReal h(static_cast<Eigen::Index>(width * dim), static_cast<Eigen::Index>(width * dim));
    h.setFromTriplets(triplets.begin(), triplets.end());
    return h;
}

/// Path graph with integer-named vertices x_min..x_max.
inline Graph line_segment(std::int64_t x_min, std::int64_t x_max) {
    Graph g;
    for (auto x = x_min; x <= x_max; ++x) g.add_vertex(std::to_string(x));
    for (auto x = x_min; x < x_max; ++x) g.add_edge(static_cast<VertexId>(x - x_min), static_cast<VertexId>(x - x_min + 1));
    return g;
}

}  // namespace snakewalk
