#include <catch2/catch_amalgamated.hpp>

#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <vector>

#include "causal_oed/graph.hpp"

using namespace causal_oed;

namespace {

// Independent ground truth for enumeration tests: walk every adjacency
// matrix and keep the acyclic ones, with a DFS cycle check that shares
// nothing with the library's Kahn-based one.
bool oracle_acyclic(int V, const std::vector<std::vector<int>>& adj) {
    std::vector<int> color(static_cast<std::size_t>(V), 0);
    std::function<bool(int)> dfs = [&](int u) {
        color[static_cast<std::size_t>(u)] = 1;
        for (int v = 0; v < V; ++v) {
            if (!adj[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)]) continue;
            if (color[static_cast<std::size_t>(v)] == 1) return false;
            if (color[static_cast<std::size_t>(v)] == 0 && !dfs(v)) return false;
        }
        color[static_cast<std::size_t>(u)] = 2;
        return true;
    };
    for (int u = 0; u < V; ++u)
        if (color[static_cast<std::size_t>(u)] == 0 && !dfs(u)) return false;
    return true;
}

std::vector<std::vector<std::vector<int>>> oracle_all_dags(int V) {
    std::vector<std::pair<int, int>> pairs;
    for (int u = 0; u < V; ++u)
        for (int v = 0; v < V; ++v)
            if (u != v) pairs.emplace_back(u, v);
    std::vector<std::vector<std::vector<int>>> out;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << pairs.size()); ++mask) {
        std::vector<std::vector<int>> adj(static_cast<std::size_t>(V),
                                          std::vector<int>(static_cast<std::size_t>(V), 0));
        for (std::size_t b = 0; b < pairs.size(); ++b)
            if ((mask >> b) & 1)
                adj[static_cast<std::size_t>(pairs[b].first)]
                   [static_cast<std::size_t>(pairs[b].second)] = 1;
        if (oracle_acyclic(V, adj)) out.push_back(std::move(adj));
    }
    return out;
}

// Independent Markov-equivalence check straight from the definition.
bool oracle_mec_equal(int V, const std::vector<std::vector<int>>& a,
                      const std::vector<std::vector<int>>& b) {
    auto skel = [V](const std::vector<std::vector<int>>& adj) {
        std::set<std::pair<int, int>> s;
        for (int u = 0; u < V; ++u)
            for (int v = 0; v < V; ++v)
                if (adj[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)])
                    s.insert({std::min(u, v), std::max(u, v)});
        return s;
    };
    auto vstructs = [V](const std::vector<std::vector<int>>& adj) {
        std::set<std::tuple<int, int, int>> s;
        for (int y = 0; y < V; ++y)
            for (int x = 0; x < V; ++x)
                for (int z = x + 1; z < V; ++z) {
                    if (x == y || z == y) continue;
                    const auto ux = static_cast<std::size_t>(x);
                    const auto uy = static_cast<std::size_t>(y);
                    const auto uz = static_cast<std::size_t>(z);
                    if (adj[ux][uy] && adj[uz][uy] && !adj[ux][uz] && !adj[uz][ux])
                        s.insert({x, y, z});
                }
        return s;
    };
    return skel(a) == skel(b) && vstructs(a) == vstructs(b);
}

Dag dag_from_adj(int V, const std::vector<std::vector<int>>& adj) {
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (int u = 0; u < V; ++u)
        for (int v = 0; v < V; ++v)
            if (adj[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)])
                edges.emplace_back(u, v);
    return dag_from_edges(V, edges);
}

}  // namespace

TEST_CASE("node set helpers", "[graph]") {
    REQUIRE(set_size(0u) == 0);
    REQUIRE(set_size(node_bit(0) | node_bit(3)) == 2);
    REQUIRE(set_to_nodes(node_bit(4) | node_bit(1) | node_bit(2)) ==
            std::vector<NodeId>{1, 2, 4});
    REQUIRE(full_set(3) == 0b111u);
    REQUIRE_FALSE(set_contains(full_set(3), 3));
}

TEST_CASE("dag_from_edges validates its input", "[graph]") {
    const Dag chain = dag_from_edges(3, {{0, 1}, {1, 2}});
    REQUIRE(chain.num_edges() == 2);
    REQUIRE(chain.has_edge(0, 1));
    REQUIRE(chain.has_edge(1, 2));
    REQUIRE_FALSE(chain.has_edge(1, 0));
    REQUIRE(chain.parents(2) == node_bit(1));

    REQUIRE(Dag::empty(4).num_edges() == 0);
    REQUIRE_THROWS_AS(dag_from_edges(2, {{0, 1}, {1, 0}}), CycleError);
    REQUIRE_THROWS_AS(dag_from_edges(3, {{0, 1}, {1, 2}, {2, 0}}), CycleError);
    REQUIRE_THROWS_AS(dag_from_edges(2, {{1, 1}}), SelfLoopError);
    REQUIRE_THROWS_AS(dag_from_edges(2, {{0, 1}, {0, 1}}), ValidationError);
    REQUIRE_THROWS_AS(dag_from_edges(2, {{0, 2}}), ValidationError);
    REQUIRE_THROWS_AS(dag_from_edges(2, {{-1, 0}}), ValidationError);
    REQUIRE_THROWS_AS(dag_from_edges(0, {}), ValidationError);
    REQUIRE_THROWS_AS(dag_from_edges(kMaxNodes + 1, {}), ValidationError);
}

TEST_CASE("edges come back sorted", "[graph]") {
    const Dag g = dag_from_edges(4, {{2, 3}, {0, 3}, {1, 2}});
    const std::vector<std::pair<NodeId, NodeId>> want = {{0, 3}, {1, 2}, {2, 3}};
    REQUIRE(g.edges() == want);
}

TEST_CASE("topological order is smallest-index-first", "[graph]") {
    REQUIRE(topological_order(dag_from_edges(3, {{2, 1}, {1, 0}})) ==
            std::vector<NodeId>{2, 1, 0});
    REQUIRE(topological_order(dag_from_edges(3, {{1, 0}})) == std::vector<NodeId>{1, 0, 2});
    REQUIRE(topological_order(Dag::empty(3)) == std::vector<NodeId>{0, 1, 2});

    // parents always precede their children, for every small DAG
    for (const Dag& g : enumerate_dags(4)) {
        const auto order = topological_order(g);
        std::vector<int> pos(4);
        for (int k = 0; k < 4; ++k) pos[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] = k;
        for (auto [u, v] : g.edges()) REQUIRE(pos[static_cast<std::size_t>(u)] < pos[static_cast<std::size_t>(v)]);
    }
}

TEST_CASE("relations of a node", "[graph]") {
    const Dag chain = dag_from_edges(3, {{0, 1}, {1, 2}});
    const Relations r0 = relations(chain, 0);
    REQUIRE(r0.parents == 0u);
    REQUIRE(r0.children == node_bit(1));
    REQUIRE(r0.descendants == (node_bit(1) | node_bit(2)));
    const Relations r2 = relations(chain, 2);
    REQUIRE(r2.parents == node_bit(1));
    REQUIRE(r2.children == 0u);
    REQUIRE(r2.descendants == 0u);

    const Dag diamond = dag_from_edges(4, {{0, 1}, {0, 2}, {1, 3}, {2, 3}});
    REQUIRE(relations(diamond, 0).descendants == (node_bit(1) | node_bit(2) | node_bit(3)));

    REQUIRE_THROWS_AS(relations(chain, 3), ValidationError);

    // children are descendants, and a node never descends from itself
    for (const Dag& g : enumerate_dags(4))
        for (NodeId e = 0; e < 4; ++e) {
            const Relations r = relations(g, e);
            REQUIRE((r.children & ~r.descendants) == 0u);
            REQUIRE_FALSE(set_contains(r.descendants, e));
        }
}

TEST_CASE("intervention surgery cuts incoming edges only", "[graph]") {
    const Dag chain = dag_from_edges(3, {{0, 1}, {1, 2}});
    const Dag cut = intervention_surgery(chain, 1);
    REQUIRE(cut.parents(1) == 0u);
    REQUIRE(cut.has_edge(1, 2));
    REQUIRE(cut.num_edges() == 1);

    // parentless target: nothing changes
    REQUIRE(intervention_surgery(chain, 0) == chain);

    // idempotent on every small DAG
    for (const Dag& g : enumerate_dags(4))
        for (NodeId e = 0; e < 4; ++e) {
            const Dag once = intervention_surgery(g, e);
            REQUIRE(intervention_surgery(once, e) == once);
        }
}

TEST_CASE("markov equivalence keys", "[graph]") {
    const Dag chain = dag_from_edges(3, {{0, 1}, {1, 2}});
    const Dag fork = dag_from_edges(3, {{1, 0}, {1, 2}});
    const Dag collider = dag_from_edges(3, {{0, 1}, {2, 1}});
    REQUIRE(mec_key(chain) == mec_key(fork));
    REQUIRE(mec_key(chain).bytes() == mec_key(fork).bytes());
    REQUIRE_FALSE(mec_key(chain) == mec_key(collider));
    REQUIRE(mec_key(collider).v_structures().size() == 1);
    REQUIRE(mec_key(collider).v_structures().front() == std::array<NodeId, 3>{0, 1, 2});
    REQUIRE(mec_key(Dag::empty(3)).skeleton().empty());

    // shielded collider is not a v-structure
    const Dag shielded = dag_from_edges(3, {{0, 1}, {2, 1}, {0, 2}});
    REQUIRE(mec_key(shielded).v_structures().empty());
}

TEST_CASE("mec_key groups match a from-scratch equivalence check", "[graph]") {
    for (int V = 2; V <= 4; ++V) {
        const auto all = oracle_all_dags(V);
        // union-find over pairwise oracle equivalence
        std::vector<std::size_t> root(all.size());
        std::iota(root.begin(), root.end(), 0);
        std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
            return root[x] == x ? x : root[x] = find(root[x]);
        };
        for (std::size_t i = 0; i < all.size(); ++i)
            for (std::size_t j = i + 1; j < all.size(); ++j)
                if (oracle_mec_equal(V, all[i], all[j])) root[find(j)] = find(i);
        std::set<std::size_t> oracle_classes;
        for (std::size_t i = 0; i < all.size(); ++i) oracle_classes.insert(find(i));

        std::set<std::string> key_classes;
        std::map<std::string, std::size_t> rep;  // key -> representative index
        for (std::size_t i = 0; i < all.size(); ++i) {
            const auto key = mec_key(dag_from_adj(V, all[i])).bytes();
            key_classes.insert(key);
            auto [it, fresh] = rep.emplace(key, i);
            if (!fresh) REQUIRE(find(it->second) == find(i));  // same key => same oracle class
        }
        REQUIRE(key_classes.size() == oracle_classes.size());
    }
}

TEST_CASE("dag enumeration counts and order", "[graph]") {
    REQUIRE(enumerate_dags(1).size() == 1);
    REQUIRE(enumerate_dags(2).size() == 3);
    REQUIRE(enumerate_dags(3).size() == 25);
    REQUIRE(enumerate_dags(4).size() == 543);
    REQUIRE_THROWS_AS(enumerate_dags(7), LimitError);

    // V=3 splits into the canonical 11 equivalence classes
    std::set<std::string> classes;
    for (const Dag& g : enumerate_dags(3)) classes.insert(mec_key(g).bytes());
    REQUIRE(classes.size() == 11);

    // first graph is empty; V=2 order is fixed by the edge bitvector
    const auto two = enumerate_dags(2);
    REQUIRE(two[0].num_edges() == 0);
    REQUIRE(two[1].has_edge(1, 0));
    REQUIRE(two[2].has_edge(0, 1));

    // exact same set of graphs as the brute-force oracle, each exactly once
    for (int V = 2; V <= 4; ++V) {
        const auto all = oracle_all_dags(V);
        std::set<std::vector<NodeSet>> seen;
        for (const Dag& g : enumerate_dags(V)) REQUIRE(seen.insert(g.parent_masks()).second);
        REQUIRE(seen.size() == all.size());
        for (const auto& adj : all)
            REQUIRE(seen.count(dag_from_adj(V, adj).parent_masks()) == 1);
    }
}

TEST_CASE("enumeration at five nodes hits the known count", "[graph]") {
    std::size_t n = 0;
    for_each_dag(5, [&](const Dag&) { ++n; });
    REQUIRE(n == 29281);
}

TEST_CASE("directed graph accepts 2-cycles but not self loops", "[graph]") {
    const DirectedGraph g = DirectedGraph::from_edges(2, {{0, 1}, {1, 0}});
    REQUIRE(g.has_edge(0, 1));
    REQUIRE(g.has_edge(1, 0));
    REQUIRE_THROWS_AS(DirectedGraph::from_edges(2, {{0, 0}}), SelfLoopError);
    REQUIRE_THROWS_AS(DirectedGraph::from_edges(2, {{0, 1}, {0, 1}}), ValidationError);
    REQUIRE_THROWS_AS(DirectedGraph::from_edges(2, {{0, 5}}), ValidationError);
}
