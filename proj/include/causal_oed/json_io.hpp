#pragma once

#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

#include <json.hpp>

#include "causal_oed/errors.hpp"
#include "causal_oed/graph.hpp"
#include "causal_oed/metrics.hpp"
#include "causal_oed/network.hpp"

namespace causal_oed {

using json = nlohmann::json;

namespace detail {

inline void reject_unknown_keys(const json& j, std::initializer_list<const char*> known,
                                const std::string& what) {
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* k : known)
            if (item.key() == k) {
                ok = true;
                break;
            }
        if (!ok) throw ValidationError(what + ": unknown key '" + item.key() + "'");
    }
}

inline const json& require_key(const json& j, const char* key, const std::string& what) {
    auto it = j.find(key);
    if (it == j.end()) throw ValidationError(what + ": missing key '" + key + "'");
    return *it;
}

inline std::int64_t as_int(const json& j, const std::string& what) {
    if (!j.is_number_integer()) throw ValidationError(what + " must be an integer");
    return j.get<std::int64_t>();
}

inline double as_double(const json& j, const std::string& what) {
    if (!j.is_number()) throw ValidationError(what + " must be a number");
    return j.get<double>();
}

}  // namespace detail

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError("'" + path + "': " + e.what());
    }
}

/// Graph file: {"num_nodes": V, "edges": [[u, v], ...]}.
inline json dag_to_json(const Dag& g) {
    json j;
    j["num_nodes"] = g.num_nodes();
    j["edges"] = json::array();
    for (auto [u, v] : g.edges()) j["edges"].push_back(json::array({u, v}));
    return j;
}

inline json directed_graph_to_json(const DirectedGraph& g) {
    json j;
    j["num_nodes"] = g.num_nodes;
    j["edges"] = json::array();
    for (auto [u, v] : g.edge_list) j["edges"].push_back(json::array({u, v}));
    return j;
}

inline std::vector<std::pair<NodeId, NodeId>> edges_from_json(const json& j,
                                                              const std::string& what) {
    if (!j.is_array()) throw ValidationError(what + ": 'edges' must be an array");
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (const auto& e : j) {
        if (!e.is_array() || e.size() != 2)
            throw ValidationError(what + ": each edge must be a [from, to] pair");
        edges.emplace_back(static_cast<NodeId>(detail::as_int(e[0], what + ": edge endpoint")),
                           static_cast<NodeId>(detail::as_int(e[1], what + ": edge endpoint")));
    }
    return edges;
}

inline Dag dag_from_json(const json& j) {
    const std::string what = "graph";
    if (!j.is_object()) throw ValidationError(what + ": expected a JSON object");
    detail::reject_unknown_keys(j, {"num_nodes", "edges"}, what);
    const int V = static_cast<int>(
        detail::as_int(detail::require_key(j, "num_nodes", what), what + ": num_nodes"));
    return dag_from_edges(V, edges_from_json(detail::require_key(j, "edges", what), what));
}

/// Network file: the graph keys plus per-node arities, cpt rows indexed by
/// parent configuration, and one clamp distribution per node.
inline json network_to_json(const CategoricalNetwork& net) {
    json j = dag_to_json(net.dag());
    j["arities"] = net.arities();
    json cpt = json::array();
    for (NodeId i = 0; i < net.num_nodes(); ++i) cpt.push_back(net.cpt(i));
    j["cpt"] = std::move(cpt);
    json idist = json::array();
    for (NodeId i = 0; i < net.num_nodes(); ++i) idist.push_back(net.intervention_dist(i));
    j["intervention_dist"] = std::move(idist);
    return j;
}

inline CategoricalNetwork network_from_json(const json& j) {
    const std::string what = "network";
    if (!j.is_object()) throw ValidationError(what + ": expected a JSON object");
    detail::reject_unknown_keys(j, {"num_nodes", "edges", "arities", "cpt", "intervention_dist"},
                                what);
    const int V = static_cast<int>(
        detail::as_int(detail::require_key(j, "num_nodes", what), what + ": num_nodes"));
    Dag dag = dag_from_edges(V, edges_from_json(detail::require_key(j, "edges", what), what));

    const json& ja = detail::require_key(j, "arities", what);
    if (!ja.is_array()) throw ValidationError(what + ": 'arities' must be an array");
    std::vector<int> arities;
    for (const auto& a : ja)
        arities.push_back(static_cast<int>(detail::as_int(a, what + ": arity")));

    auto dist_from = [&](const json& row, const std::string& ctx) {
        if (!row.is_array()) throw ValidationError(ctx + " must be an array");
        std::vector<double> out;
        for (const auto& p : row) out.push_back(detail::as_double(p, ctx + " entry"));
        return out;
    };

    const json& jc = detail::require_key(j, "cpt", what);
    if (!jc.is_array()) throw ValidationError(what + ": 'cpt' must be an array");
    std::vector<std::vector<std::vector<double>>> cpt;
    for (const auto& node_rows : jc) {
        if (!node_rows.is_array()) throw ValidationError(what + ": cpt entry must be an array");
        std::vector<std::vector<double>> rows;
        for (const auto& row : node_rows) rows.push_back(dist_from(row, what + ": cpt row"));
        cpt.push_back(std::move(rows));
    }

    const json& ji = detail::require_key(j, "intervention_dist", what);
    if (!ji.is_array()) throw ValidationError(what + ": 'intervention_dist' must be an array");
    std::vector<std::vector<double>> idist;
    for (const auto& row : ji) idist.push_back(dist_from(row, what + ": intervention_dist row"));

    return CategoricalNetwork(std::move(dag), std::move(arities), std::move(cpt), std::move(idist));
}

inline json experiment_log_to_json(const ExperimentLog& log) {
    json j;
    j["policy"] = log.policy;
    j["scheme"] = log.scheme;
    j["seed"] = log.seed;
    j["stop_reason"] = log.stop_reason;
    j["records"] = json::array();
    for (const auto& r : log.records) {
        json jr;
        jr["experiment"] = r.experiment;
        jr["chosen_node"] = r.chosen_node;
        jr["criterion_collapsed"] = r.criterion_collapsed;
        jr["criterion_scores"] = json::array();
        for (auto [e, s] : r.criterion_scores)
            jr["criterion_scores"].push_back(json::array({e, s}));
        jr["hamming"] = r.hamming;
        jr["tpr"] = r.tpr;
        jr["entropy_nats"] = r.entropy_nats;
        jr["n_distinct_graphs"] = r.n_distinct_graphs;
        jr["dataset_rows"] = r.dataset_rows;
        j["records"].push_back(std::move(jr));
    }
    return j;
}

}  // namespace causal_oed
