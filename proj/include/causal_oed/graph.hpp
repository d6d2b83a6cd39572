#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "causal_oed/errors.hpp"

namespace causal_oed {

using NodeId = int;

/// Bitmask over node indices. Everything in this library keeps V small, so a
/// 32-bit mask with a hard cap leaves headroom above every documented limit.
using NodeSet = std::uint32_t;

inline constexpr int kMaxNodes = 25;

constexpr NodeSet node_bit(NodeId i) { return NodeSet{1} << i; }
constexpr bool set_contains(NodeSet s, NodeId i) { return (s >> i) & 1u; }
constexpr NodeSet full_set(int num_nodes) {
    return num_nodes == 0 ? 0u : (NodeSet{1} << num_nodes) - 1u;
}
inline int set_size(NodeSet s) { return std::popcount(s); }

inline std::vector<NodeId> set_to_nodes(NodeSet s) {
    std::vector<NodeId> out;
    out.reserve(static_cast<std::size_t>(set_size(s)));
    while (s) {
        out.push_back(std::countr_zero(s));
        s &= s - 1;
    }
    return out;
}

/// Directed acyclic graph over nodes 0..V-1, stored as per-node parent sets.
/// Construction validates: indices in range, no self loops, no cycles.
class Dag {
public:
    Dag(int num_nodes, std::vector<NodeSet> parents)
        : num_nodes_(num_nodes), parents_(std::move(parents)) {
        if (num_nodes_ < 1 || num_nodes_ > kMaxNodes)
            throw ValidationError("Dag: num_nodes must be in [1, " + std::to_string(kMaxNodes) + "]");
        if (parents_.size() != static_cast<std::size_t>(num_nodes_))
            throw DimensionError("Dag: parent vector size does not match num_nodes");
        const NodeSet all = full_set(num_nodes_);
        for (NodeId v = 0; v < num_nodes_; ++v) {
            if (parents_[v] & ~all)
                throw ValidationError("Dag: parent set of node " + std::to_string(v) +
                                      " references a node out of range");
            if (set_contains(parents_[v], v))
                throw SelfLoopError("Dag: node " + std::to_string(v) + " is its own parent");
        }
        check_acyclic();
    }

    static Dag empty(int num_nodes) {
        return Dag(num_nodes, std::vector<NodeSet>(static_cast<std::size_t>(num_nodes), 0u));
    }

    int num_nodes() const { return num_nodes_; }
    NodeSet parents(NodeId v) const { return parents_[static_cast<std::size_t>(v)]; }
    const std::vector<NodeSet>& parent_masks() const { return parents_; }

    bool has_edge(NodeId u, NodeId v) const {
        return set_contains(parents_[static_cast<std::size_t>(v)], u);
    }

    int num_edges() const {
        int n = 0;
        for (NodeSet p : parents_) n += set_size(p);
        return n;
    }

    /// Edge list sorted by (source, target).
    std::vector<std::pair<NodeId, NodeId>> edges() const {
        std::vector<std::pair<NodeId, NodeId>> out;
        for (NodeId v = 0; v < num_nodes_; ++v)
            for (NodeId u : set_to_nodes(parents_[static_cast<std::size_t>(v)]))
                out.emplace_back(u, v);
        std::sort(out.begin(), out.end());
        return out;
    }

    bool operator==(const Dag& o) const {
        return num_nodes_ == o.num_nodes_ && parents_ == o.parents_;
    }

private:
    void check_acyclic() const;

    int num_nodes_;
    std::vector<NodeSet> parents_;
};

/// Directed graph that may contain cycles and 2-cycles. Self loops are still
/// rejected. Used for edge-thresholded point estimates, which need not be
/// acyclic.
struct DirectedGraph {
    int num_nodes = 0;
    std::vector<std::pair<NodeId, NodeId>> edge_list;  // sorted, unique

    static DirectedGraph from_edges(int num_nodes,
                                    std::vector<std::pair<NodeId, NodeId>> edges) {
        if (num_nodes < 1 || num_nodes > kMaxNodes)
            throw ValidationError("DirectedGraph: num_nodes must be in [1, " +
                                  std::to_string(kMaxNodes) + "]");
        for (auto [u, v] : edges) {
            if (u < 0 || u >= num_nodes || v < 0 || v >= num_nodes)
                throw ValidationError("DirectedGraph: edge endpoint out of range");
            if (u == v) throw SelfLoopError("DirectedGraph: self loop on node " + std::to_string(u));
        }
        std::sort(edges.begin(), edges.end());
        if (std::adjacent_find(edges.begin(), edges.end()) != edges.end())
            throw ValidationError("DirectedGraph: duplicate edge");
        return DirectedGraph{num_nodes, std::move(edges)};
    }

    bool has_edge(NodeId u, NodeId v) const {
        return std::binary_search(edge_list.begin(), edge_list.end(), std::make_pair(u, v));
    }

    bool operator==(const DirectedGraph&) const = default;
};

inline void Dag::check_acyclic() const {
    // Kahn's algorithm over parent masks; placed = nodes already ordered.
    NodeSet placed = 0;
    const NodeSet all = full_set(num_nodes_);
    for (int step = 0; step < num_nodes_; ++step) {
        bool advanced = false;
        for (NodeId v = 0; v < num_nodes_; ++v) {
            if (set_contains(placed, v)) continue;
            if ((parents_[static_cast<std::size_t>(v)] & ~placed) == 0) {
                placed |= node_bit(v);
                advanced = true;
                break;
            }
        }
        if (!advanced) break;
    }
    if (placed != all) throw CycleError("Dag: edge set contains a directed cycle");
}

/// Builds a Dag from an explicit edge list. Duplicate edges are rejected.
inline Dag dag_from_edges(int num_nodes, const std::vector<std::pair<NodeId, NodeId>>& edges) {
    if (num_nodes < 1 || num_nodes > kMaxNodes)
        throw ValidationError("dag_from_edges: num_nodes must be in [1, " +
                              std::to_string(kMaxNodes) + "]");
    std::vector<NodeSet> parents(static_cast<std::size_t>(num_nodes), 0u);
    for (auto [u, v] : edges) {
        if (u < 0 || u >= num_nodes || v < 0 || v >= num_nodes)
            throw ValidationError("dag_from_edges: edge endpoint out of range");
        if (u == v) throw SelfLoopError("dag_from_edges: self loop on node " + std::to_string(u));
        if (set_contains(parents[static_cast<std::size_t>(v)], u))
            throw ValidationError("dag_from_edges: duplicate edge (" + std::to_string(u) + ", " +
                                  std::to_string(v) + ")");
        parents[static_cast<std::size_t>(v)] |= node_bit(u);
    }
    return Dag(num_nodes, std::move(parents));
}

/// Deterministic topological order: repeatedly emit the smallest-index node
/// whose parents have all been emitted.
inline std::vector<NodeId> topological_order(const Dag& g) {
    const int V = g.num_nodes();
    std::vector<NodeId> order;
    order.reserve(static_cast<std::size_t>(V));
    NodeSet placed = 0;
    for (int step = 0; step < V; ++step) {
        for (NodeId v = 0; v < V; ++v) {
            if (set_contains(placed, v)) continue;
            if ((g.parents(v) & ~placed) == 0) {
                order.push_back(v);
                placed |= node_bit(v);
                break;
            }
        }
    }
    return order;
}

struct Relations {
    NodeSet parents = 0;
    NodeSet children = 0;
    NodeSet descendants = 0;  // proper descendants, excludes the node itself
};

inline NodeSet children_of(const Dag& g, NodeId e) {
    NodeSet c = 0;
    for (NodeId v = 0; v < g.num_nodes(); ++v)
        if (v != e && g.has_edge(e, v)) c |= node_bit(v);
    return c;
}

inline Relations relations(const Dag& g, NodeId e) {
    if (e < 0 || e >= g.num_nodes()) throw ValidationError("relations: node out of range");
    Relations r;
    r.parents = g.parents(e);
    r.children = children_of(g, e);
    // breadth-first closure over children
    NodeSet frontier = r.children;
    r.descendants = frontier;
    while (frontier) {
        NodeSet next = 0;
        for (NodeId v : set_to_nodes(frontier)) next |= children_of(g, v);
        frontier = next & ~r.descendants;
        r.descendants |= next;
    }
    return r;
}

/// Graph surgery for a single-node intervention: all edges into e are cut,
/// everything else is untouched.
inline Dag intervention_surgery(const Dag& g, NodeId e) {
    if (e < 0 || e >= g.num_nodes()) throw ValidationError("intervention_surgery: node out of range");
    std::vector<NodeSet> parents = g.parent_masks();
    parents[static_cast<std::size_t>(e)] = 0;
    return Dag(g.num_nodes(), std::move(parents));
}

/// Canonical key of a Markov equivalence class: the skeleton plus the set of
/// v-structures (immoralities), each sorted, packed into a fixed-width byte
/// string. Two DAGs get equal keys iff they are Markov equivalent.
class MecKey {
public:
    MecKey(int num_nodes,
           std::vector<std::pair<NodeId, NodeId>> skeleton,
           std::vector<std::array<NodeId, 3>> v_structures)
        : num_nodes_(num_nodes),
          skeleton_(std::move(skeleton)),
          v_structures_(std::move(v_structures)) {
        std::sort(skeleton_.begin(), skeleton_.end());
        std::sort(v_structures_.begin(), v_structures_.end());
        encoded_.reserve(4 + 2 * skeleton_.size() + 3 * v_structures_.size());
        encoded_.push_back(static_cast<char>(num_nodes_));
        encoded_.push_back(static_cast<char>(skeleton_.size() & 0xff));
        encoded_.push_back(static_cast<char>(skeleton_.size() >> 8));
        for (auto [a, b] : skeleton_) {
            encoded_.push_back(static_cast<char>(a));
            encoded_.push_back(static_cast<char>(b));
        }
        for (auto [x, y, z] : v_structures_) {
            encoded_.push_back(static_cast<char>(x));
            encoded_.push_back(static_cast<char>(y));
            encoded_.push_back(static_cast<char>(z));
        }
    }

    int num_nodes() const { return num_nodes_; }
    const std::vector<std::pair<NodeId, NodeId>>& skeleton() const { return skeleton_; }
    const std::vector<std::array<NodeId, 3>>& v_structures() const { return v_structures_; }

    /// Byte encoding; equal strings iff equal keys.
    const std::string& bytes() const { return encoded_; }

    bool operator==(const MecKey& o) const { return encoded_ == o.encoded_; }
    bool operator<(const MecKey& o) const { return encoded_ < o.encoded_; }

private:
    int num_nodes_;
    std::vector<std::pair<NodeId, NodeId>> skeleton_;
    std::vector<std::array<NodeId, 3>> v_structures_;
    std::string encoded_;
};

/// Markov equivalence class of g: same skeleton, same v-structures. A
/// v-structure is x -> y <- z with x and z non-adjacent.
inline MecKey mec_key(const Dag& g) {
    const int V = g.num_nodes();
    std::vector<std::pair<NodeId, NodeId>> skeleton;
    for (auto [u, v] : g.edges()) skeleton.emplace_back(std::min(u, v), std::max(u, v));

    auto adjacent = [&](NodeId a, NodeId b) { return g.has_edge(a, b) || g.has_edge(b, a); };

    std::vector<std::array<NodeId, 3>> vs;
    for (NodeId y = 0; y < V; ++y) {
        const std::vector<NodeId> pa = set_to_nodes(g.parents(y));
        for (std::size_t i = 0; i < pa.size(); ++i)
            for (std::size_t j = i + 1; j < pa.size(); ++j)
                if (!adjacent(pa[i], pa[j])) vs.push_back({pa[i], y, pa[j]});
    }
    return MecKey(V, std::move(skeleton), std::move(vs));
}

namespace detail {

// Edge positions in lexicographic (u, v) order, u-major, diagonal skipped.
inline std::vector<std::pair<NodeId, NodeId>> ordered_pairs(int num_nodes) {
    std::vector<std::pair<NodeId, NodeId>> pairs;
    pairs.reserve(static_cast<std::size_t>(num_nodes) * (num_nodes - 1));
    for (NodeId u = 0; u < num_nodes; ++u)
        for (NodeId v = 0; v < num_nodes; ++v)
            if (u != v) pairs.emplace_back(u, v);
    return pairs;
}

template <typename Fn>
void enumerate_dags_rec(const std::vector<std::pair<NodeId, NodeId>>& pairs, std::size_t idx,
                        int num_nodes, std::vector<NodeSet>& parents,
                        std::array<NodeSet, kMaxNodes>& reach, Fn&& emit) {
    if (idx == pairs.size()) {
        emit(Dag(num_nodes, parents));
        return;
    }
    auto [u, v] = pairs[idx];
    // absent branch first: earlier pairs are more significant, 0 sorts before 1
    enumerate_dags_rec(pairs, idx + 1, num_nodes, parents, reach, emit);
    if (set_contains(reach[static_cast<std::size_t>(v)], u)) return;  // u -> v would close a cycle
    parents[static_cast<std::size_t>(v)] |= node_bit(u);
    std::array<NodeSet, kMaxNodes> reach2 = reach;
    const NodeSet gained = reach2[static_cast<std::size_t>(v)] | node_bit(v);
    for (NodeId w = 0; w < num_nodes; ++w)
        if (w == u || set_contains(reach2[static_cast<std::size_t>(w)], u))
            reach2[static_cast<std::size_t>(w)] |= gained;
    enumerate_dags_rec(pairs, idx + 1, num_nodes, parents, reach2, emit);
    parents[static_cast<std::size_t>(v)] &= ~node_bit(u);
}

}  // namespace detail

/// Visits every labeled DAG on num_nodes exactly once, ordered by the edge
/// bitvector read along ordered_pairs (most significant first). Capped at 6
/// nodes; superexponential growth makes anything larger a programming error.
template <typename Fn>
void for_each_dag(int num_nodes, Fn&& emit) {
    if (num_nodes < 1) throw ValidationError("for_each_dag: num_nodes must be positive");
    if (num_nodes > 6)
        throw LimitError("for_each_dag: enumeration capped at 6 nodes, got " +
                         std::to_string(num_nodes));
    const auto pairs = detail::ordered_pairs(num_nodes);
    std::vector<NodeSet> parents(static_cast<std::size_t>(num_nodes), 0u);
    std::array<NodeSet, kMaxNodes> reach{};
    detail::enumerate_dags_rec(pairs, 0, num_nodes, parents, reach, emit);
}

inline std::vector<Dag> enumerate_dags(int num_nodes) {
    std::vector<Dag> out;
    for_each_dag(num_nodes, [&](const Dag& g) { out.push_back(g); });
    return out;
}

}  // namespace causal_oed
