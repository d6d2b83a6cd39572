#pragma once

#include <string>
#include <utility>
#include <vector>

#include "causal_oed/errors.hpp"
#include "causal_oed/graph.hpp"
#include "causal_oed/network.hpp"
#include "causal_oed/rng.hpp"

namespace causal_oed {

namespace detail {

/// Binary cascade: the root is fair, every child copies its single parent
/// with probability copy_prob, clamps are uniform.
inline CategoricalNetwork binary_cascade(int num_nodes,
                                         const std::vector<std::pair<NodeId, NodeId>>& edges,
                                         double copy_prob) {
    Dag dag = dag_from_edges(num_nodes, edges);
    std::vector<int> arities(static_cast<std::size_t>(num_nodes), 2);
    std::vector<std::vector<std::vector<double>>> cpt(static_cast<std::size_t>(num_nodes));
    std::vector<std::vector<double>> idist(static_cast<std::size_t>(num_nodes),
                                           std::vector<double>{0.5, 0.5});
    for (NodeId i = 0; i < num_nodes; ++i) {
        if (dag.parents(i) == 0) {
            cpt[static_cast<std::size_t>(i)] = {{0.5, 0.5}};
        } else {
            cpt[static_cast<std::size_t>(i)] = {{copy_prob, 1.0 - copy_prob},
                                                {1.0 - copy_prob, copy_prob}};
        }
    }
    return CategoricalNetwork(std::move(dag), std::move(arities), std::move(cpt), std::move(idist));
}

/// Fixed structure, synthetic conditionals: every cpt row and clamp row is a
/// flat-Dirichlet draw from the given seed.
inline CategoricalNetwork synthetic_cpts(Dag dag, std::vector<int> arities, std::uint64_t seed) {
    Rng rng(seed);
    const int V = dag.num_nodes();
    std::vector<std::vector<std::vector<double>>> cpt(static_cast<std::size_t>(V));
    std::vector<std::vector<double>> idist(static_cast<std::size_t>(V));
    for (NodeId i = 0; i < V; ++i) {
        const auto q = config_count(dag.parents(i), arities);
        for (std::int64_t j = 0; j < q; ++j)
            cpt[static_cast<std::size_t>(i)].push_back(
                rng.dirichlet_flat(arities[static_cast<std::size_t>(i)]));
        idist[static_cast<std::size_t>(i)] =
            rng.dirichlet_flat(arities[static_cast<std::size_t>(i)]);
    }
    return CategoricalNetwork(std::move(dag), std::move(arities), std::move(cpt), std::move(idist));
}

inline CategoricalNetwork asia_network() {
    // 0 visit-to-asia, 1 smoking, 2 tuberculosis, 3 lung cancer, 4 bronchitis,
    // 5 tub-or-cancer, 6 xray, 7 dyspnoea; state 1 = present. The usual
    // textbook chest-clinic parameters.
    Dag dag = dag_from_edges(
        8, {{0, 2}, {1, 3}, {1, 4}, {2, 5}, {3, 5}, {5, 6}, {4, 7}, {5, 7}});
    std::vector<int> arities(8, 2);
    std::vector<std::vector<std::vector<double>>> cpt(8);
    cpt[0] = {{0.99, 0.01}};
    cpt[1] = {{0.5, 0.5}};
    cpt[2] = {{0.99, 0.01}, {0.95, 0.05}};                    // tub | asia
    cpt[3] = {{0.99, 0.01}, {0.9, 0.1}};                      // lung | smoking
    cpt[4] = {{0.7, 0.3}, {0.4, 0.6}};                        // bronc | smoking
    cpt[5] = {{1.0, 0.0}, {0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}};  // or(tub, lung), j = tub + 2*lung
    cpt[6] = {{0.95, 0.05}, {0.02, 0.98}};                    // xray | either
    cpt[7] = {{0.9, 0.1}, {0.2, 0.8}, {0.3, 0.7}, {0.1, 0.9}};  // dysp, j = bronc + 2*either
    std::vector<std::vector<double>> idist(8, {0.5, 0.5});
    return CategoricalNetwork(std::move(dag), std::move(arities), std::move(cpt), std::move(idist));
}

inline CategoricalNetwork sachs_network() {
    // 0 raf, 1 mek, 2 plcg, 3 pip2, 4 pip3, 5 erk, 6 akt, 7 pka, 8 pkc,
    // 9 p38, 10 jnk. Structure follows the accepted signalling currency of
    // the flow-cytometry benchmark; conditionals are synthetic since the
    // original quantities are not part of the fixture.
    Dag dag = dag_from_edges(11, {{8, 0}, {8, 1}, {8, 7}, {8, 9}, {8, 10},
                                  {7, 0}, {7, 1}, {7, 5}, {7, 6}, {7, 9}, {7, 10},
                                  {0, 1}, {1, 5}, {5, 6},
                                  {2, 3}, {2, 4}, {4, 3}});
    std::vector<int> arities(11, 3);
    return synthetic_cpts(std::move(dag), std::move(arities), 0x5ac5110bULL);
}

}  // namespace detail

inline std::vector<std::string> fixture_names() {
    return {"asia8", "chain8", "random10", "sachs11", "tree8"};
}

/// Named ground-truth networks used by studies and tests. The code here is
/// the source of truth; the JSON files under fixtures/ are emitted from it.
inline CategoricalNetwork fixture(const std::string& name) {
    if (name == "chain8")
        return detail::binary_cascade(
            8, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6}, {6, 7}}, 0.9);
    if (name == "tree8")
        return detail::binary_cascade(
            8, {{0, 1}, {0, 2}, {1, 3}, {1, 4}, {2, 5}, {2, 6}, {6, 7}}, 0.9);
    if (name == "asia8") return detail::asia_network();
    if (name == "random10")
        return random_network(10, std::vector<int>(10, 2), 0.25, 0x10ca1b0bULL);
    if (name == "sachs11") return detail::sachs_network();
    throw UnknownFixtureError("unknown fixture '" + name + "'");
}

}  // namespace causal_oed
