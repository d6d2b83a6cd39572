#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "causal_oed/dataset.hpp"
#include "causal_oed/errors.hpp"
#include "causal_oed/graph.hpp"
#include "causal_oed/network.hpp"

namespace causal_oed {

struct ScoreConfig {
    /// Adds the graph-independent marginal likelihood of the manipulated
    /// values themselves (flat-ish Dirichlet with concentration 1/r per
    /// node). Off by default; it cancels in every posterior ratio.
    bool include_intervention_term = false;
};

/// Sufficient statistics of one family (node, parent set). Rows where the
/// node itself was manipulated are excluded; its value there carries no
/// information about the conditional.
struct CountTable {
    NodeId node = 0;
    NodeSet parent_set = 0;
    int r = 0;                  // arity of node
    std::int64_t q = 0;         // number of parent configurations
    std::vector<std::int64_t> n_jk;  // q*r, row-major j*r + k
    std::vector<std::int64_t> n_j;   // q
};

inline CountTable count_table(const InterventionalDataset& data, NodeId node, NodeSet parent_set) {
    if (node < 0 || node >= data.num_nodes()) throw ValidationError("count_table: node out of range");
    if (parent_set & ~full_set(data.num_nodes()))
        throw ValidationError("count_table: parent set out of range");
    if (set_contains(parent_set, node))
        throw ValidationError("count_table: node cannot be its own parent");
    CountTable t;
    t.node = node;
    t.parent_set = parent_set;
    t.r = data.arity(node);
    t.q = config_count(parent_set, data.arities());
    if (t.q * t.r > (std::int64_t{1} << 24))
        throw LimitError("count_table: family table too large");
    t.n_jk.assign(static_cast<std::size_t>(t.q * t.r), 0);
    t.n_j.assign(static_cast<std::size_t>(t.q), 0);
    for (const auto& row : data.rows()) {
        if (set_contains(row.manipulated, node)) continue;
        const int j = parent_config_index(row.states, parent_set, data.arities());
        const int k = row.states[static_cast<std::size_t>(node)];
        ++t.n_jk[static_cast<std::size_t>(j) * static_cast<std::size_t>(t.r) +
                 static_cast<std::size_t>(k)];
        ++t.n_j[static_cast<std::size_t>(j)];
    }
    return t;
}

/// BDeu family score with total pseudocount 1 split evenly over the family's
/// cells: alpha_jk = 1/(r*q), alpha_j = 1/q. Empty table scores 0.
inline double local_log_score(const CountTable& t) {
    const double alpha_jk = 1.0 / (static_cast<double>(t.r) * static_cast<double>(t.q));
    const double alpha_j = 1.0 / static_cast<double>(t.q);
    double score = 0.0;
    for (std::int64_t j = 0; j < t.q; ++j) {
        if (t.n_j[static_cast<std::size_t>(j)] == 0) continue;
        score += std::lgamma(alpha_j) -
                 std::lgamma(alpha_j + static_cast<double>(t.n_j[static_cast<std::size_t>(j)]));
        for (int k = 0; k < t.r; ++k) {
            const auto n = t.n_jk[static_cast<std::size_t>(j) * static_cast<std::size_t>(t.r) +
                                  static_cast<std::size_t>(k)];
            if (n == 0) continue;
            score += std::lgamma(alpha_jk + static_cast<double>(n)) - std::lgamma(alpha_jk);
        }
    }
    return score;
}

/// Marginal likelihood of the manipulated values under per-node Dirichlet
/// priors with concentration 1/r. Does not depend on any graph.
inline double intervention_term_log(const InterventionalDataset& data) {
    double total = 0.0;
    for (NodeId i = 0; i < data.num_nodes(); ++i) {
        const int r = data.arity(i);
        std::vector<std::int64_t> m(static_cast<std::size_t>(r), 0);
        std::int64_t m_total = 0;
        for (const auto& row : data.rows()) {
            if (!set_contains(row.manipulated, i)) continue;
            ++m[row.states[static_cast<std::size_t>(i)]];
            ++m_total;
        }
        if (m_total == 0) continue;
        const double a = 1.0 / static_cast<double>(r);
        total += std::lgamma(1.0) - std::lgamma(1.0 + static_cast<double>(m_total));
        for (int k = 0; k < r; ++k)
            if (m[static_cast<std::size_t>(k)] != 0)
                total += std::lgamma(a + static_cast<double>(m[static_cast<std::size_t>(k)])) -
                         std::lgamma(a);
    }
    return total;
}

/// Log marginal likelihood of the dataset given a graph: the product of BDeu
/// family scores with interventional rows masked per node, optionally times
/// the manipulated-value term.
inline double log_marginal_likelihood(const InterventionalDataset& data, const Dag& g,
                                      const ScoreConfig& cfg = {}) {
    if (g.num_nodes() != data.num_nodes())
        throw DimensionError("log_marginal_likelihood: graph and data disagree on num_nodes");
    double score = 0.0;
    for (NodeId i = 0; i < g.num_nodes(); ++i)
        score += local_log_score(count_table(data, i, g.parents(i)));
    if (cfg.include_intervention_term) score += intervention_term_log(data);
    return score;
}

/// Same quantity by a different route: the chain rule over one-step-ahead
/// posterior predictive probabilities, walking the dataset in row order. No
/// gamma functions anywhere; kept independent of local_log_score so the two
/// can check each other.
inline double sequential_predictive_log_prob(const InterventionalDataset& data, const Dag& g,
                                             const ScoreConfig& cfg = {}) {
    if (g.num_nodes() != data.num_nodes())
        throw DimensionError("sequential_predictive_log_prob: graph and data disagree on num_nodes");
    const int V = data.num_nodes();

    struct NodeState {
        std::vector<NodeId> parents;      // ascending
        std::int64_t q = 1;
        std::vector<std::int64_t> c_jk;   // q*r
        std::vector<std::int64_t> c_j;    // q
        std::vector<std::int64_t> m_k;    // manipulated-value counts
        std::int64_t m_total = 0;
    };
    std::vector<NodeState> nodes(static_cast<std::size_t>(V));
    for (NodeId i = 0; i < V; ++i) {
        auto& ns = nodes[static_cast<std::size_t>(i)];
        ns.parents = set_to_nodes(g.parents(i));
        for (NodeId p : ns.parents) {
            ns.q *= data.arity(p);
            if (ns.q * data.arity(i) > (std::int64_t{1} << 24))
                throw LimitError("sequential_predictive_log_prob: family table too large");
        }
        ns.c_jk.assign(static_cast<std::size_t>(ns.q * data.arity(i)), 0);
        ns.c_j.assign(static_cast<std::size_t>(ns.q), 0);
        ns.m_k.assign(static_cast<std::size_t>(data.arity(i)), 0);
    }

    double lp = 0.0;
    for (const auto& row : data.rows()) {
        for (NodeId i = 0; i < V; ++i) {
            auto& ns = nodes[static_cast<std::size_t>(i)];
            const int r = data.arity(i);
            const int k = row.states[static_cast<std::size_t>(i)];
            if (set_contains(row.manipulated, i)) {
                if (cfg.include_intervention_term) {
                    const double a = 1.0 / static_cast<double>(r);
                    lp += std::log((a + static_cast<double>(ns.m_k[static_cast<std::size_t>(k)])) /
                                   (1.0 + static_cast<double>(ns.m_total)));
                    ++ns.m_k[static_cast<std::size_t>(k)];
                    ++ns.m_total;
                }
                continue;
            }
            std::int64_t j = 0;
            std::int64_t stride = 1;
            for (NodeId p : ns.parents) {
                j += stride * row.states[static_cast<std::size_t>(p)];
                stride *= data.arity(p);
            }
            const double a_jk = 1.0 / (static_cast<double>(r) * static_cast<double>(ns.q));
            const double a_j = 1.0 / static_cast<double>(ns.q);
            const auto cell = static_cast<std::size_t>(j * r + k);
            lp += std::log((a_jk + static_cast<double>(ns.c_jk[cell])) /
                           (a_j + static_cast<double>(ns.c_j[static_cast<std::size_t>(j)])));
            ++ns.c_jk[cell];
            ++ns.c_j[static_cast<std::size_t>(j)];
        }
    }
    return lp;
}

/// Memo of BDeu family scores for one dataset snapshot. Appending rows bumps
/// the dataset version and silently invalidates everything cached here.
class FamilyScoreCache {
public:
    explicit FamilyScoreCache(const InterventionalDataset& data)
        : data_(&data), version_(data.version()) {}

    double family_score(NodeId node, NodeSet parent_set) {
        refresh();
        const std::uint64_t key =
            (static_cast<std::uint64_t>(static_cast<std::uint32_t>(node)) << 32) | parent_set;
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        const double s = local_log_score(count_table(*data_, node, parent_set));
        cache_.emplace(key, s);
        return s;
    }

    /// Family scores only; the manipulated-value term is graph-independent
    /// and never cached here.
    double log_marginal_likelihood(const Dag& g) {
        if (g.num_nodes() != data_->num_nodes())
            throw DimensionError("FamilyScoreCache: graph and data disagree on num_nodes");
        double score = 0.0;
        for (NodeId i = 0; i < g.num_nodes(); ++i) score += family_score(i, g.parents(i));
        return score;
    }

    const InterventionalDataset& data() const { return *data_; }
    std::size_t size() const { return cache_.size(); }

private:
    void refresh() {
        if (data_->version() != version_) {
            cache_.clear();
            version_ = data_->version();
        }
    }

    const InterventionalDataset* data_;
    std::uint64_t version_;
    std::unordered_map<std::uint64_t, double> cache_;
};

}  // namespace causal_oed
