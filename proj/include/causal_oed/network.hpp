#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <utility>
#include <vector>

#include "causal_oed/dataset.hpp"
#include "causal_oed/errors.hpp"
#include "causal_oed/graph.hpp"
#include "causal_oed/rng.hpp"

namespace causal_oed {

/// Mixed-radix index of a parent configuration. Parents are taken in
/// ascending node order with the lowest-indexed parent as the least
/// significant digit, e.g. parents {0,2} with arities r0=3, r2=2 and states
/// X0=2, X2=1 give j = 2 + 1*3 = 5.
inline int parent_config_index(const std::vector<std::uint8_t>& states, NodeSet parent_set,
                               const std::vector<int>& arities) {
    long long j = 0;
    long long stride = 1;
    for (NodeId p : set_to_nodes(parent_set)) {
        j += stride * states[static_cast<std::size_t>(p)];
        stride *= arities[static_cast<std::size_t>(p)];
    }
    return static_cast<int>(j);
}

/// Number of parent configurations of a parent set under given arities.
inline std::int64_t config_count(NodeSet parent_set, const std::vector<int>& arities) {
    std::int64_t q = 1;
    for (NodeId p : set_to_nodes(parent_set)) {
        q *= arities[static_cast<std::size_t>(p)];
        if (q > (std::int64_t{1} << 40)) throw LimitError("config_count: parent state space overflow");
    }
    return q;
}

/// Ground-truth categorical Bayesian network: a DAG, per-node arities, one
/// conditional distribution per parent configuration, and one clamp
/// distribution per node used when that node is manipulated.
class CategoricalNetwork {
public:
    CategoricalNetwork(Dag dag, std::vector<int> arities,
                       std::vector<std::vector<std::vector<double>>> cpt,
                       std::vector<std::vector<double>> intervention_dist)
        : dag_(std::move(dag)),
          arities_(std::move(arities)),
          cpt_(std::move(cpt)),
          intervention_dist_(std::move(intervention_dist)) {
        const int V = dag_.num_nodes();
        if (arities_.size() != static_cast<std::size_t>(V))
            throw DimensionError("CategoricalNetwork: arity vector size mismatch");
        for (int r : arities_)
            if (r < 2) throw ValidationError("CategoricalNetwork: arities must be >= 2");
        if (cpt_.size() != static_cast<std::size_t>(V) ||
            intervention_dist_.size() != static_cast<std::size_t>(V))
            throw DimensionError("CategoricalNetwork: cpt or intervention_dist size mismatch");
        for (NodeId i = 0; i < V; ++i) {
            const auto q = config_count(dag_.parents(i), arities_);
            const auto& rows = cpt_[static_cast<std::size_t>(i)];
            if (rows.size() != static_cast<std::size_t>(q))
                throw DimensionError("CategoricalNetwork: node " + std::to_string(i) + " needs " +
                                     std::to_string(q) + " cpt rows, got " +
                                     std::to_string(rows.size()));
            for (const auto& row : rows) check_row(row, arity(i), "cpt row of node " + std::to_string(i));
            check_row(intervention_dist_[static_cast<std::size_t>(i)], arity(i),
                      "intervention_dist of node " + std::to_string(i));
        }
    }

    const Dag& dag() const { return dag_; }
    int num_nodes() const { return dag_.num_nodes(); }
    int arity(NodeId i) const { return arities_[static_cast<std::size_t>(i)]; }
    const std::vector<int>& arities() const { return arities_; }

    const std::vector<double>& cpt_row(NodeId i, int j) const {
        return cpt_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    const std::vector<std::vector<double>>& cpt(NodeId i) const {
        return cpt_[static_cast<std::size_t>(i)];
    }
    const std::vector<double>& intervention_dist(NodeId i) const {
        return intervention_dist_[static_cast<std::size_t>(i)];
    }

private:
    static void check_row(const std::vector<double>& row, int r, const std::string& what) {
        if (row.size() != static_cast<std::size_t>(r))
            throw DimensionError("CategoricalNetwork: " + what + " has wrong length");
        double sum = 0.0;
        for (double p : row) {
            if (!(p >= 0.0) || !std::isfinite(p))
                throw ValidationError("CategoricalNetwork: " + what + " has an invalid entry");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw ValidationError("CategoricalNetwork: " + what + " does not sum to 1");
    }

    Dag dag_;
    std::vector<int> arities_;
    std::vector<std::vector<std::vector<double>>> cpt_;
    std::vector<std::vector<double>> intervention_dist_;
};

/// How to clamp nodes while sampling. Each target is either forced to a fixed
/// state or drawn from a given distribution; untargeted nodes follow the
/// network. Empty spec = observational sampling.
class InterventionSpec {
public:
    struct Mode {
        int fixed_state = -1;          // >= 0 when the target is forced
        std::vector<double> dist;      // nonempty when the target is randomized
    };

    static InterventionSpec observational() { return InterventionSpec{}; }

    static InterventionSpec fixed_value(NodeId e, int state) {
        InterventionSpec s;
        s.targets_[e] = Mode{state, {}};
        return s;
    }

    static InterventionSpec distribution(NodeId e, std::vector<double> dist) {
        InterventionSpec s;
        s.targets_[e] = Mode{-1, std::move(dist)};
        return s;
    }

    InterventionSpec& add_fixed(NodeId e, int state) {
        targets_[e] = Mode{state, {}};
        return *this;
    }

    const std::map<NodeId, Mode>& targets() const { return targets_; }
    bool is_observational() const { return targets_.empty(); }

    NodeSet target_mask() const {
        NodeSet m = 0;
        for (const auto& [e, mode] : targets_) m |= node_bit(e);
        return m;
    }

    void validate(const CategoricalNetwork& net) const {
        for (const auto& [e, mode] : targets_) {
            if (e < 0 || e >= net.num_nodes())
                throw ValidationError("InterventionSpec: target node out of range");
            if (mode.fixed_state >= 0) {
                if (mode.fixed_state >= net.arity(e))
                    throw ValidationError("InterventionSpec: fixed state exceeds arity of node " +
                                          std::to_string(e));
            } else {
                if (mode.dist.size() != static_cast<std::size_t>(net.arity(e)))
                    throw DimensionError("InterventionSpec: distribution length mismatch on node " +
                                         std::to_string(e));
            }
        }
    }

private:
    std::map<NodeId, Mode> targets_;
};

/// Samples one row by ancestral sampling in topological order; targeted nodes
/// are clamped instead of sampled from their conditional.
inline DatasetRow draw_row(const CategoricalNetwork& net, const InterventionSpec& spec, Rng& rng) {
    spec.validate(net);
    DatasetRow row;
    row.states.assign(static_cast<std::size_t>(net.num_nodes()), 0);
    row.manipulated = spec.target_mask();
    for (NodeId i : topological_order(net.dag())) {
        auto it = spec.targets().find(i);
        if (it != spec.targets().end()) {
            const auto& mode = it->second;
            if (mode.fixed_state >= 0)
                row.states[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(mode.fixed_state);
            else
                row.states[static_cast<std::size_t>(i)] =
                    static_cast<std::uint8_t>(rng.categorical(mode.dist));
        } else {
            const int j = parent_config_index(row.states, net.dag().parents(i), net.arities());
            row.states[static_cast<std::size_t>(i)] =
                static_cast<std::uint8_t>(rng.categorical(net.cpt_row(i, j)));
        }
    }
    return row;
}

/// Log probability of a complete state vector under the truncated
/// factorization: manipulated nodes contribute their clamp density, all
/// others their conditional. Returns -inf when any factor is zero.
inline double log_joint(const CategoricalNetwork& net, const std::vector<std::uint8_t>& states,
                        NodeSet manipulated) {
    if (states.size() != static_cast<std::size_t>(net.num_nodes()))
        throw DimensionError("log_joint: state vector length mismatch");
    if (manipulated & ~full_set(net.num_nodes()))
        throw ValidationError("log_joint: manipulated set out of range");
    double lp = 0.0;
    for (NodeId i = 0; i < net.num_nodes(); ++i) {
        const int x = states[static_cast<std::size_t>(i)];
        if (x >= net.arity(i)) throw ValidationError("log_joint: state exceeds arity");
        double p;
        if (set_contains(manipulated, i)) {
            p = net.intervention_dist(i)[static_cast<std::size_t>(x)];
        } else {
            const int j = parent_config_index(states, net.dag().parents(i), net.arities());
            p = net.cpt_row(i, j)[static_cast<std::size_t>(x)];
        }
        if (p <= 0.0) return -std::numeric_limits<double>::infinity();
        lp += std::log(p);
    }
    return lp;
}

inline double log_joint(const CategoricalNetwork& net, const DatasetRow& row) {
    return log_joint(net, row.states, row.manipulated);
}

/// Variant that uses the clamp densities carried by an explicit spec rather
/// than the network's own intervention distributions.
inline double log_joint(const CategoricalNetwork& net, const std::vector<std::uint8_t>& states,
                        const InterventionSpec& spec) {
    spec.validate(net);
    if (states.size() != static_cast<std::size_t>(net.num_nodes()))
        throw DimensionError("log_joint: state vector length mismatch");
    double lp = 0.0;
    for (NodeId i = 0; i < net.num_nodes(); ++i) {
        const int x = states[static_cast<std::size_t>(i)];
        if (x >= net.arity(i)) throw ValidationError("log_joint: state exceeds arity");
        double p;
        auto it = spec.targets().find(i);
        if (it != spec.targets().end()) {
            const auto& mode = it->second;
            p = mode.fixed_state >= 0 ? (x == mode.fixed_state ? 1.0 : 0.0)
                                      : mode.dist[static_cast<std::size_t>(x)];
        } else {
            const int j = parent_config_index(states, net.dag().parents(i), net.arities());
            p = net.cpt_row(i, j)[static_cast<std::size_t>(x)];
        }
        if (p <= 0.0) return -std::numeric_limits<double>::infinity();
        lp += std::log(p);
    }
    return lp;
}

/// n i.i.d. rows under one spec. Same seed, same dataset, bit for bit.
inline InterventionalDataset generate_dataset(const CategoricalNetwork& net,
                                              const InterventionSpec& spec, std::int64_t n,
                                              std::uint64_t seed) {
    if (n < 0) throw ValidationError("generate_dataset: n must be nonnegative");
    InterventionalDataset data(net.num_nodes(), net.arities());
    Rng rng(seed);
    for (std::int64_t k = 0; k < n; ++k) data.append(draw_row(net, spec, rng));
    return data;
}

/// Random ground truth: a uniform random node order, each forward edge kept
/// independently with edge_prob, and every cpt row and clamp row drawn from a
/// flat Dirichlet. Deterministic given the seed.
inline CategoricalNetwork random_network(int num_nodes, const std::vector<int>& arities,
                                         double edge_prob, std::uint64_t seed) {
    if (num_nodes < 1 || num_nodes > kMaxNodes)
        throw ValidationError("random_network: num_nodes must be in [1, " +
                              std::to_string(kMaxNodes) + "]");
    if (arities.size() != static_cast<std::size_t>(num_nodes))
        throw DimensionError("random_network: arity vector size mismatch");
    if (!(edge_prob >= 0.0 && edge_prob <= 1.0))
        throw ValidationError("random_network: edge_prob must be in [0, 1]");

    Rng rng(seed);
    std::vector<NodeId> order(static_cast<std::size_t>(num_nodes));
    for (NodeId i = 0; i < num_nodes; ++i) order[static_cast<std::size_t>(i)] = i;
    for (int i = num_nodes - 1; i > 0; --i)
        std::swap(order[static_cast<std::size_t>(i)],
                  order[rng.uniform_int(static_cast<std::uint64_t>(i) + 1)]);

    std::vector<NodeSet> parents(static_cast<std::size_t>(num_nodes), 0u);
    for (int a = 0; a < num_nodes; ++a)
        for (int b = a + 1; b < num_nodes; ++b)
            if (rng.uniform() < edge_prob)
                parents[static_cast<std::size_t>(order[static_cast<std::size_t>(b)])] |=
                    node_bit(order[static_cast<std::size_t>(a)]);
    Dag dag(num_nodes, std::move(parents));

    std::vector<std::vector<std::vector<double>>> cpt(static_cast<std::size_t>(num_nodes));
    std::vector<std::vector<double>> intervention_dist(static_cast<std::size_t>(num_nodes));
    for (NodeId i = 0; i < num_nodes; ++i) {
        const auto q = config_count(dag.parents(i), arities);
        auto& rows = cpt[static_cast<std::size_t>(i)];
        rows.reserve(static_cast<std::size_t>(q));
        for (std::int64_t j = 0; j < q; ++j)
            rows.push_back(rng.dirichlet_flat(arities[static_cast<std::size_t>(i)]));
        intervention_dist[static_cast<std::size_t>(i)] =
            rng.dirichlet_flat(arities[static_cast<std::size_t>(i)]);
    }
    return CategoricalNetwork(std::move(dag), arities, std::move(cpt), std::move(intervention_dist));
}

}  // namespace causal_oed
