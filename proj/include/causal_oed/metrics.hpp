#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "causal_oed/errors.hpp"
#include "causal_oed/graph.hpp"
#include "causal_oed/posterior.hpp"

namespace causal_oed {

/// Point estimate: keep every edge with posterior probability >= 0.5. The
/// result can contain 2-cycles when both directions clear the threshold; it
/// is a summary, not a DAG.
inline DirectedGraph median_probability_graph(const EdgeMatrix& edge_probs) {
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (NodeId u = 0; u < edge_probs.num_nodes; ++u)
        for (NodeId v = 0; v < edge_probs.num_nodes; ++v)
            if (u != v && edge_probs.at(u, v) >= 0.5) edges.emplace_back(u, v);
    return DirectedGraph::from_edges(edge_probs.num_nodes, std::move(edges));
}

/// Directed structural Hamming distance: false positives plus false
/// negatives over ordered pairs, so one reversed edge costs 2.
inline int hamming(const DirectedGraph& estimate, const Dag& truth) {
    if (estimate.num_nodes != truth.num_nodes())
        throw DimensionError("hamming: graphs disagree on num_nodes");
    int d = 0;
    for (NodeId u = 0; u < truth.num_nodes(); ++u)
        for (NodeId v = 0; v < truth.num_nodes(); ++v) {
            if (u == v) continue;
            if (estimate.has_edge(u, v) != truth.has_edge(u, v)) ++d;
        }
    return d;
}

/// Fraction of true edges recovered with their orientation.
inline double tpr(const DirectedGraph& estimate, const Dag& truth) {
    if (estimate.num_nodes != truth.num_nodes())
        throw DimensionError("tpr: graphs disagree on num_nodes");
    const int total = truth.num_edges();
    if (total == 0) throw UndefinedError("tpr: undefined for an edgeless true graph");
    int hit = 0;
    for (auto [u, v] : truth.edges())
        if (estimate.has_edge(u, v)) ++hit;
    return static_cast<double>(hit) / static_cast<double>(total);
}

/// Plug-in entropy of the sampled posterior, in nats. Zero-weight atoms
/// contribute nothing. This estimator is biased low for MCMC output because
/// unvisited graphs are treated as mass zero.
inline double posterior_entropy_estimate(const PosteriorSamples& samples) {
    double h = 0.0;
    for (double w : samples.weights())
        if (w > 0.0) h -= w * std::log(w);
    return std::max(h, 0.0);
}

/// One selection round inside a simulation. Experiment numbers are 1-based;
/// the first round is observational and has chosen_node -1.
struct ExperimentRecord {
    int experiment = 0;
    NodeId chosen_node = -1;
    std::vector<std::pair<NodeId, double>> criterion_scores;  // eligible candidates, ascending id
    bool criterion_collapsed = false;  // every candidate scored zero, fell back to smallest id
    int hamming = 0;
    double tpr = 0.0;
    double entropy_nats = 0.0;
    std::int64_t n_distinct_graphs = 0;
    std::int64_t dataset_rows = 0;
};

struct ExperimentLog {
    std::string policy;
    std::string scheme;
    std::uint64_t seed = 0;
    std::vector<ExperimentRecord> records;
    std::string stop_reason;
};

struct AggregateRow {
    int experiment = 0;
    int n = 0;
    double mean_hamming = 0.0, se_hamming = 0.0;
    double mean_tpr = 0.0, se_tpr = 0.0;
    double mean_entropy = 0.0, se_entropy = 0.0;
    bool degenerate = false;  // n == 1, standard errors reported as 0
};

namespace detail {

inline std::pair<double, double> mean_se(const std::vector<double>& xs) {
    const auto n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    if (xs.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / (n - 1.0)) / std::sqrt(n)};
}

}  // namespace detail

/// Per-experiment mean and standard error across simulations of one policy.
/// Logs must all have the same number of records.
inline std::vector<AggregateRow> aggregate(const std::vector<ExperimentLog>& logs) {
    if (logs.empty()) throw ValidationError("aggregate: no logs");
    const std::size_t T = logs.front().records.size();
    for (const auto& log : logs)
        if (log.records.size() != T)
            throw DimensionError("aggregate: logs disagree on experiment count");
    std::vector<AggregateRow> rows;
    rows.reserve(T);
    for (std::size_t t = 0; t < T; ++t) {
        std::vector<double> h, tp, en;
        for (const auto& log : logs) {
            h.push_back(static_cast<double>(log.records[t].hamming));
            tp.push_back(log.records[t].tpr);
            en.push_back(log.records[t].entropy_nats);
        }
        AggregateRow row;
        row.experiment = logs.front().records[t].experiment;
        row.n = static_cast<int>(logs.size());
        std::tie(row.mean_hamming, row.se_hamming) = detail::mean_se(h);
        std::tie(row.mean_tpr, row.se_tpr) = detail::mean_se(tp);
        std::tie(row.mean_entropy, row.se_entropy) = detail::mean_se(en);
        row.degenerate = logs.size() == 1;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace causal_oed
