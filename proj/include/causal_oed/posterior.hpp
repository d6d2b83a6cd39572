#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "causal_oed/dataset.hpp"
#include "causal_oed/errors.hpp"
#include "causal_oed/graph.hpp"
#include "causal_oed/rng.hpp"
#include "causal_oed/scoring.hpp"

namespace causal_oed {

/// Graphs are keyed by their parent-mask vector; lexicographic comparison
/// gives the canonical ordering used for posterior support.
using DagKey = std::vector<NodeSet>;

inline DagKey dag_key(const Dag& g) { return g.parent_masks(); }

/// Prior over graphs. Uniform and TableLookup are usable everywhere;
/// Modular is the order-modular prior implied by the dynamic-programming
/// marginals and is not a per-graph weight, so only the DP accepts it.
class GraphPrior {
public:
    enum class Kind { Uniform, TableLookup, Modular };

    static GraphPrior uniform() { return GraphPrior(Kind::Uniform); }

    static GraphPrior table_lookup(std::map<DagKey, double> log_weights) {
        GraphPrior p(Kind::TableLookup);
        p.table_ = std::move(log_weights);
        return p;
    }

    static GraphPrior modular(int parent_cap = 5) {
        GraphPrior p(Kind::Modular);
        p.parent_cap_ = parent_cap;
        return p;
    }

    Kind kind() const { return kind_; }
    int parent_cap() const { return parent_cap_; }

    /// Log prior weight of a graph, up to an additive constant. Graphs
    /// missing from a lookup table carry zero prior mass.
    double log_weight(const DagKey& key) const {
        switch (kind_) {
            case Kind::Uniform:
                return 0.0;
            case Kind::TableLookup: {
                auto it = table_.find(key);
                return it == table_.end() ? -std::numeric_limits<double>::infinity() : it->second;
            }
            case Kind::Modular:
                throw ValidationError("GraphPrior: modular prior has no per-graph weight");
        }
        throw Error("GraphPrior: unreachable");
    }

    double log_weight(const Dag& g) const { return log_weight(dag_key(g)); }

private:
    explicit GraphPrior(Kind k) : kind_(k) {}

    Kind kind_;
    std::map<DagKey, double> table_;
    int parent_cap_ = 5;
};

struct Provenance {
    std::string method;            // "exact" or "mcmc"
    std::uint64_t seed = 0;
    std::int64_t n_iterations = 0;
    std::int64_t burn_in = 0;
    std::int64_t retained = 0;
    std::int64_t accepted = 0;
};

/// A posterior over graphs: a support of distinct DAGs, sorted by graph key,
/// with normalized weights. Either an exact enumeration or the occupation
/// distribution of an MCMC run.
class PosteriorSamples {
public:
    static PosteriorSamples exact(std::vector<Dag> support, std::vector<double> weights,
                                  Provenance prov) {
        return PosteriorSamples(std::move(support), std::move(weights), true, std::move(prov));
    }

    static PosteriorSamples from_counts(int num_nodes, const std::map<DagKey, std::int64_t>& counts,
                                        Provenance prov) {
        std::vector<Dag> support;
        std::vector<double> weights;
        std::int64_t total = 0;
        for (const auto& [key, c] : counts) total += c;
        if (total <= 0) throw ValidationError("PosteriorSamples: no retained samples");
        support.reserve(counts.size());
        weights.reserve(counts.size());
        for (const auto& [key, c] : counts) {
            support.emplace_back(num_nodes, key);
            weights.push_back(static_cast<double>(c) / static_cast<double>(total));
        }
        return PosteriorSamples(std::move(support), std::move(weights), false, std::move(prov));
    }

    int num_nodes() const { return support_.empty() ? 0 : support_.front().num_nodes(); }
    const std::vector<Dag>& support() const { return support_; }
    const std::vector<double>& weights() const { return weights_; }
    bool is_exact() const { return exact_; }
    const Provenance& provenance() const { return prov_; }

    std::map<DagKey, double> as_map() const {
        std::map<DagKey, double> m;
        for (std::size_t k = 0; k < support_.size(); ++k) m[dag_key(support_[k])] = weights_[k];
        return m;
    }

private:
    PosteriorSamples(std::vector<Dag> support, std::vector<double> weights, bool exact,
                     Provenance prov)
        : support_(std::move(support)),
          weights_(std::move(weights)),
          exact_(exact),
          prov_(std::move(prov)) {
        if (support_.empty()) throw ValidationError("PosteriorSamples: empty support");
        if (support_.size() != weights_.size())
            throw DimensionError("PosteriorSamples: support and weight size mismatch");
    }

    std::vector<Dag> support_;
    std::vector<double> weights_;
    bool exact_;
    Provenance prov_;
};

/// Full enumeration posterior. Exponential in V, so refuses anything above
/// v_limit nodes.
inline PosteriorSamples exact_posterior(const InterventionalDataset& data, const GraphPrior& prior,
                                        int v_limit = 5) {
    const int V = data.num_nodes();
    if (V > v_limit)
        throw LimitError("exact_posterior: " + std::to_string(V) + " nodes exceeds limit " +
                         std::to_string(v_limit));
    if (prior.kind() == GraphPrior::Kind::Modular)
        throw ValidationError("exact_posterior: modular prior is only usable by dp_edge_marginals");

    FamilyScoreCache cache(data);
    std::vector<std::pair<DagKey, double>> scored;
    for_each_dag(V, [&](const Dag& g) {
        const double lp = prior.log_weight(g);
        if (lp == -std::numeric_limits<double>::infinity()) return;
        scored.emplace_back(dag_key(g), cache.log_marginal_likelihood(g) + lp);
    });
    if (scored.empty()) throw ValidationError("exact_posterior: prior excludes every graph");
    std::sort(scored.begin(), scored.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    double mx = -std::numeric_limits<double>::infinity();
    for (const auto& [key, lw] : scored) mx = std::max(mx, lw);
    std::vector<Dag> support;
    std::vector<double> weights;
    support.reserve(scored.size());
    weights.reserve(scored.size());
    double total = 0.0;
    for (const auto& [key, lw] : scored) {
        support.emplace_back(V, key);
        weights.push_back(std::exp(lw - mx));
        total += weights.back();
    }
    for (double& w : weights) w /= total;
    return PosteriorSamples::exact(std::move(support), std::move(weights), Provenance{"exact"});
}

struct EdgeMatrix {
    int num_nodes = 0;
    std::vector<double> p;  // row-major, p[u*V + v] = p(u -> v)

    explicit EdgeMatrix(int V = 0)
        : num_nodes(V), p(static_cast<std::size_t>(V) * static_cast<std::size_t>(V), 0.0) {}

    double at(NodeId u, NodeId v) const {
        return p[static_cast<std::size_t>(u) * static_cast<std::size_t>(num_nodes) +
                 static_cast<std::size_t>(v)];
    }
    double& at(NodeId u, NodeId v) {
        return p[static_cast<std::size_t>(u) * static_cast<std::size_t>(num_nodes) +
                 static_cast<std::size_t>(v)];
    }
};

namespace detail {

inline double log_add(double x, double y) {
    if (x == -std::numeric_limits<double>::infinity()) return y;
    if (y == -std::numeric_limits<double>::infinity()) return x;
    const double hi = std::max(x, y);
    const double lo = std::min(x, y);
    return hi + std::log1p(std::exp(lo - hi));
}

}  // namespace detail

/// Exact posterior edge probabilities under the label-order-modular prior:
/// uniform over (order, graph) pairs where the graph respects the order and
/// every parent set has at most parent_cap members. Forward-backward sums
/// over node subsets, entirely in the log domain: at realistic sample sizes
/// family scores sit hundreds of nats apart, beyond any linear-space scaling.
/// Memory and time scale as V^2 * 2^V.
inline EdgeMatrix dp_edge_marginals(const InterventionalDataset& data, int parent_cap = 5) {
    const int V = data.num_nodes();
    if (V > 20) throw LimitError("dp_edge_marginals: feasible only up to 20 nodes");
    if (parent_cap < 0) throw ValidationError("dp_edge_marginals: parent_cap must be nonnegative");
    const int K = std::min(parent_cap, V - 1);
    const NodeSet full = full_set(V);
    const std::size_t M = std::size_t{1} << V;
    constexpr double ninf = -std::numeric_limits<double>::infinity();

    FamilyScoreCache cache(data);

    // la[i][U] = log sum over parent sets S subseteq U, |S| <= K, of
    // exp(family score). In-place subset-sum transform in the log semiring.
    std::vector<std::vector<double>> la(static_cast<std::size_t>(V));
    for (NodeId i = 0; i < V; ++i) {
        auto& ai = la[static_cast<std::size_t>(i)];
        ai.assign(M, ninf);
        for (NodeSet S = 0; S <= full; ++S) {
            if (S & node_bit(i)) continue;
            if (set_size(S) > K) continue;
            ai[S] = cache.family_score(i, S);
        }
        for (NodeId e = 0; e < V; ++e)
            for (NodeSet U = 0; U <= full; ++U)
                if (U & node_bit(e)) ai[U] = detail::log_add(ai[U], ai[U & ~node_bit(e)]);
    }

    // lf[U]: log mass of all order prefixes covering exactly U; lb: suffixes.
    std::vector<double> lf(M, ninf), lb(M, ninf);
    lf[0] = 0.0;
    for (NodeSet U = 1; U <= full; ++U)
        for (NodeId i : set_to_nodes(U))
            lf[U] = detail::log_add(
                lf[U], lf[U & ~node_bit(i)] + la[static_cast<std::size_t>(i)][U & ~node_bit(i)]);
    lb[full] = 0.0;
    for (NodeSet U = full; U-- > 0;)
        for (NodeId i : set_to_nodes(full & ~U))
            lb[U] = detail::log_add(lb[U],
                                    la[static_cast<std::size_t>(i)][U] + lb[U | node_bit(i)]);

    const double log_z = lf[full];
    if (!std::isfinite(log_z)) throw Error("dp_edge_marginals: partition function underflow");

    EdgeMatrix out(V);
    for (NodeId v = 0; v < V; ++v) {
        const auto& av = la[static_cast<std::size_t>(v)];
        for (NodeSet U = 0; U <= full; ++U) {
            if (U & node_bit(v)) continue;
            const double lt = lf[U] + lb[U | node_bit(v)];
            if (lt == ninf) continue;
            for (NodeId u : set_to_nodes(U)) {
                // share of av[U] contributed by parent sets containing u
                const double without = av[U & ~node_bit(u)];
                if (without >= av[U]) continue;
                const double share = -std::expm1(without - av[U]);
                out.at(u, v) += std::exp(lt + av[U] - log_z) * share;
            }
        }
        for (NodeId u = 0; u < V; ++u) out.at(u, v) = std::clamp(out.at(u, v), 0.0, 1.0);
    }
    return out;
}

struct McmcConfig {
    std::int64_t n_iterations = 250000;
    std::int64_t burn_in = 150000;
    // Chance of an independence proposal per step. Local moves alone get very
    // sticky once the posterior concentrates (acceptance drops under 3% on
    // large datasets) while the DP proposal tracks concentrated posteriors
    // well, so a sizable global share keeps the occupation estimates tight.
    double global_move_prob = 0.3;
    int parent_cap = 5;             // cap for the DP behind the independence proposal
    std::uint64_t seed = 0;
};

namespace detail {

struct Move {
    enum Kind { Add, Delete, Reverse } kind;
    NodeId u, v;
};

/// Mutable chain state: parent and child masks plus the transitive
/// reachability of every node, rebuilt after each accepted move.
struct ChainState {
    int V = 0;
    std::vector<NodeSet> parents;
    std::vector<NodeSet> children;
    std::array<NodeSet, kMaxNodes> reach{};

    explicit ChainState(int num_nodes)
        : V(num_nodes),
          parents(static_cast<std::size_t>(num_nodes), 0u),
          children(static_cast<std::size_t>(num_nodes), 0u) {}

    bool has_edge(NodeId u, NodeId v) const {
        return set_contains(parents[static_cast<std::size_t>(v)], u);
    }

    void rebuild_derived() {
        for (NodeId v = 0; v < V; ++v) children[static_cast<std::size_t>(v)] = 0;
        for (NodeId v = 0; v < V; ++v)
            for (NodeId u : set_to_nodes(parents[static_cast<std::size_t>(v)]))
                children[static_cast<std::size_t>(u)] |= node_bit(v);
        // reverse topological sweep: reach[v] = children plus their reach
        NodeSet placed = 0;
        std::array<NodeId, kMaxNodes> order{};
        for (int step = 0; step < V; ++step) {
            for (NodeId v = 0; v < V; ++v) {
                if (set_contains(placed, v)) continue;
                if ((parents[static_cast<std::size_t>(v)] & ~placed) == 0) {
                    order[static_cast<std::size_t>(step)] = v;
                    placed |= node_bit(v);
                    break;
                }
            }
        }
        for (int k = V - 1; k >= 0; --k) {
            const NodeId v = order[static_cast<std::size_t>(k)];
            NodeSet r = children[static_cast<std::size_t>(v)];
            for (NodeId c : set_to_nodes(children[static_cast<std::size_t>(v)]))
                r |= reach[static_cast<std::size_t>(c)];
            reach[static_cast<std::size_t>(v)] = r;
        }
    }

    bool reversal_keeps_acyclic(NodeId u, NodeId v) const {
        // only the direct edge may connect u to v, otherwise v -> u closes a loop
        NodeSet other = 0;
        for (NodeId w : set_to_nodes(children[static_cast<std::size_t>(u)] & ~node_bit(v)))
            other |= node_bit(w) | reach[static_cast<std::size_t>(w)];
        return !set_contains(other, v);
    }

    template <typename Fn>
    void for_each_move(Fn&& fn) const {
        for (NodeId u = 0; u < V; ++u) {
            for (NodeId v = 0; v < V; ++v) {
                if (u == v) continue;
                if (has_edge(u, v)) {
                    fn(Move{Move::Delete, u, v});
                    if (reversal_keeps_acyclic(u, v)) fn(Move{Move::Reverse, u, v});
                } else if (!set_contains(reach[static_cast<std::size_t>(v)], u)) {
                    fn(Move{Move::Add, u, v});
                }
            }
        }
    }

    std::int64_t count_moves() const {
        std::int64_t n = 0;
        for_each_move([&](const Move&) { ++n; });
        return n;
    }

    void apply(const Move& m) {
        switch (m.kind) {
            case Move::Add:
                parents[static_cast<std::size_t>(m.v)] |= node_bit(m.u);
                break;
            case Move::Delete:
                parents[static_cast<std::size_t>(m.v)] &= ~node_bit(m.u);
                break;
            case Move::Reverse:
                parents[static_cast<std::size_t>(m.v)] &= ~node_bit(m.u);
                parents[static_cast<std::size_t>(m.u)] |= node_bit(m.v);
                break;
        }
        rebuild_derived();
    }

    bool is_acyclic() const {
        NodeSet placed = 0;
        for (int step = 0; step < V; ++step) {
            bool advanced = false;
            for (NodeId v = 0; v < V; ++v) {
                if (set_contains(placed, v)) continue;
                if ((parents[static_cast<std::size_t>(v)] & ~placed) == 0) {
                    placed |= node_bit(v);
                    advanced = true;
                    break;
                }
            }
            if (!advanced) return false;
        }
        return true;
    }
};

}  // namespace detail

/// Metropolis-Hastings over DAGs targeting p(D|G)p(G). Most steps pick
/// uniformly among single-edge additions, deletions and reversals; with
/// probability global_move_prob the step instead proposes a whole graph with
/// edges drawn independently from the DP edge marginals, which lets the chain
/// hop between distant modes. Every post-burn-in state is retained.
inline PosteriorSamples mcmc_sample(const InterventionalDataset& data, const GraphPrior& prior,
                                    const McmcConfig& cfg) {
    if (prior.kind() == GraphPrior::Kind::Modular)
        throw ValidationError("mcmc_sample: prior must be Uniform or TableLookup");
    if (cfg.n_iterations < 1) throw ValidationError("mcmc_sample: n_iterations must be positive");
    if (cfg.burn_in < 0 || cfg.burn_in >= cfg.n_iterations)
        throw ValidationError("mcmc_sample: burn_in must be in [0, n_iterations)");
    if (!(cfg.global_move_prob >= 0.0 && cfg.global_move_prob <= 1.0))
        throw ValidationError("mcmc_sample: global_move_prob must be in [0, 1]");

    const int V = data.num_nodes();
    const double neg_inf = -std::numeric_limits<double>::infinity();
    FamilyScoreCache cache(data);

    // proposal edge probabilities, clamped away from 0 and 1 so the
    // independence kernel keeps full support
    EdgeMatrix prop(V);
    const bool use_global = cfg.global_move_prob > 0.0 && V > 1;
    if (use_global) {
        prop = dp_edge_marginals(data, cfg.parent_cap);
        for (double& x : prop.p) x = std::clamp(x, 1e-6, 1.0 - 1e-6);
    }
    auto log_proposal_density = [&](const std::vector<NodeSet>& parents) {
        double lq = 0.0;
        for (NodeId u = 0; u < V; ++u)
            for (NodeId v = 0; v < V; ++v) {
                if (u == v) continue;
                const double puv = prop.at(u, v);
                lq += set_contains(parents[static_cast<std::size_t>(v)], u) ? std::log(puv)
                                                                            : std::log1p(-puv);
            }
        return lq;
    };

    Rng rng(cfg.seed);
    detail::ChainState cur(V), next(V);
    cur.rebuild_derived();
    double cur_fam = cache.log_marginal_likelihood(Dag::empty(V));
    double cur_prior = prior.log_weight(DagKey(cur.parents));
    if (cur_prior == neg_inf)
        throw ValidationError("mcmc_sample: prior gives the empty graph zero mass, nowhere to start");

    std::map<DagKey, std::int64_t> counts;
    std::vector<detail::Move> moves;
    moves.reserve(static_cast<std::size_t>(V) * static_cast<std::size_t>(V) * 2);
    std::int64_t accepted = 0;

    for (std::int64_t t = 1; t <= cfg.n_iterations; ++t) {
        const bool global = use_global && rng.uniform() < cfg.global_move_prob;
        if (global) {
            next.parents.assign(static_cast<std::size_t>(V), 0u);
            for (NodeId u = 0; u < V; ++u)
                for (NodeId v = 0; v < V; ++v) {
                    if (u == v) continue;
                    if (rng.uniform() < prop.at(u, v))
                        next.parents[static_cast<std::size_t>(v)] |= node_bit(u);
                }
            if (next.is_acyclic()) {
                double next_fam = 0.0;
                for (NodeId i = 0; i < V; ++i)
                    next_fam += cache.family_score(i, next.parents[static_cast<std::size_t>(i)]);
                const double next_prior = prior.log_weight(DagKey(next.parents));
                const double la = (next_fam + next_prior) - (cur_fam + cur_prior) +
                                  log_proposal_density(cur.parents) -
                                  log_proposal_density(next.parents);
                if (la >= 0.0 || rng.uniform() < std::exp(la)) {
                    next.rebuild_derived();
                    std::swap(cur, next);
                    cur_fam = next_fam;
                    cur_prior = next_prior;
                    ++accepted;
                }
            }
        } else {
            moves.clear();
            cur.for_each_move([&](const detail::Move& m) { moves.push_back(m); });
            if (!moves.empty()) {
                const auto& m = moves[rng.uniform_int(moves.size())];
                next = cur;
                next.apply(m);
                double next_fam = cur_fam;
                switch (m.kind) {
                    case detail::Move::Add:
                    case detail::Move::Delete:
                        next_fam += cache.family_score(
                                        m.v, next.parents[static_cast<std::size_t>(m.v)]) -
                                    cache.family_score(m.v,
                                                       cur.parents[static_cast<std::size_t>(m.v)]);
                        break;
                    case detail::Move::Reverse:
                        next_fam += cache.family_score(
                                        m.v, next.parents[static_cast<std::size_t>(m.v)]) -
                                    cache.family_score(
                                        m.v, cur.parents[static_cast<std::size_t>(m.v)]) +
                                    cache.family_score(
                                        m.u, next.parents[static_cast<std::size_t>(m.u)]) -
                                    cache.family_score(m.u,
                                                       cur.parents[static_cast<std::size_t>(m.u)]);
                        break;
                }
                const double next_prior = prior.log_weight(DagKey(next.parents));
                const double la = (next_fam + next_prior) - (cur_fam + cur_prior) +
                                  std::log(static_cast<double>(moves.size())) -
                                  std::log(static_cast<double>(next.count_moves()));
                if (la >= 0.0 || rng.uniform() < std::exp(la)) {
                    std::swap(cur, next);
                    cur_fam = next_fam;
                    cur_prior = next_prior;
                    ++accepted;
                }
            }
        }
        if (t > cfg.burn_in) ++counts[cur.parents];
    }

    Provenance prov{"mcmc", cfg.seed, cfg.n_iterations, cfg.burn_in,
                    cfg.n_iterations - cfg.burn_in, accepted};
    return PosteriorSamples::from_counts(V, counts, std::move(prov));
}

/// Posterior probability of each directed edge under a sampled posterior.
inline EdgeMatrix edge_probabilities(const PosteriorSamples& samples) {
    const int V = samples.num_nodes();
    EdgeMatrix out(V);
    for (std::size_t k = 0; k < samples.support().size(); ++k) {
        const Dag& g = samples.support()[k];
        const double w = samples.weights()[k];
        for (NodeId v = 0; v < V; ++v)
            for (NodeId u : set_to_nodes(g.parents(v))) out.at(u, v) += w;
    }
    for (double& x : out.p) x = std::clamp(x, 0.0, 1.0);
    return out;
}

}  // namespace causal_oed
