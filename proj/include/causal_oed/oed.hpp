#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "causal_oed/errors.hpp"
#include "causal_oed/graph.hpp"
#include "causal_oed/metrics.hpp"
#include "causal_oed/network.hpp"
#include "causal_oed/posterior.hpp"
#include "causal_oed/rng.hpp"
#include "causal_oed/scoring.hpp"

namespace causal_oed {

/// What an intervention on node e would let us tell apart. Each scheme maps
/// a graph to the feature that the manipulated data identifies; graphs in
/// the same cell stay indistinguishable after the experiment.
enum class PartitionScheme { Mec, ChildSet, DescendantSet, ParentSet };

inline std::string scheme_name(PartitionScheme s) {
    switch (s) {
        case PartitionScheme::Mec: return "mec";
        case PartitionScheme::ChildSet: return "cs";
        case PartitionScheme::DescendantSet: return "ds";
        case PartitionScheme::ParentSet: return "ps";
    }
    throw Error("scheme_name: unreachable");
}

inline PartitionScheme scheme_from_name(const std::string& name) {
    if (name == "mec") return PartitionScheme::Mec;
    if (name == "cs") return PartitionScheme::ChildSet;
    if (name == "ds") return PartitionScheme::DescendantSet;
    if (name == "ps") return PartitionScheme::ParentSet;
    throw ValidationError("unknown partition scheme '" + name + "'");
}

/// Opaque partition cell identifier; equal bytes iff same cell.
using PartitionKey = std::string;

namespace detail {

inline PartitionKey mask_key(NodeSet s) {
    PartitionKey k(4, '\0');
    k[0] = static_cast<char>(s & 0xff);
    k[1] = static_cast<char>((s >> 8) & 0xff);
    k[2] = static_cast<char>((s >> 16) & 0xff);
    k[3] = static_cast<char>((s >> 24) & 0xff);
    return k;
}

}  // namespace detail

inline PartitionKey partition_value(PartitionScheme scheme, const Dag& g, NodeId e) {
    if (e < 0 || e >= g.num_nodes()) throw ValidationError("partition_value: node out of range");
    switch (scheme) {
        case PartitionScheme::Mec:
            return mec_key(intervention_surgery(g, e)).bytes();
        case PartitionScheme::ChildSet:
            return detail::mask_key(children_of(g, e));
        case PartitionScheme::DescendantSet:
            return detail::mask_key(relations(g, e).descendants);
        case PartitionScheme::ParentSet:
            return detail::mask_key(g.parents(e));
    }
    throw Error("partition_value: unreachable");
}

/// Plug-in entropy (nats) of the partition a manipulation of e induces on
/// the posterior. Only cells with posterior mass contribute; an unvisited
/// cell cannot be counted because its mass estimate is zero.
inline double criterion_entropy(const PosteriorSamples& samples, PartitionScheme scheme, NodeId e) {
    std::map<PartitionKey, double> mass;
    for (std::size_t k = 0; k < samples.support().size(); ++k)
        mass[partition_value(scheme, samples.support()[k], e)] += samples.weights()[k];
    double h = 0.0;
    for (const auto& [key, p] : mass)
        if (p > 0.0) h -= p * std::log(p);
    return std::max(h, 0.0);
}

/// Sum over other nodes of the binary entropy of the posterior probability
/// that e points at them. A cheap surrogate that ignores correlations
/// between edges.
inline double pwc_score(const PosteriorSamples& samples, NodeId e) {
    if (e < 0 || e >= samples.num_nodes()) throw ValidationError("pwc_score: node out of range");
    const EdgeMatrix probs = edge_probabilities(samples);
    double total = 0.0;
    for (NodeId v = 0; v < samples.num_nodes(); ++v) {
        if (v == e) continue;
        const double p = probs.at(e, v);
        if (p > 0.0 && p < 1.0) total += -p * std::log(p) - (1.0 - p) * std::log1p(-p);
    }
    return total;
}

/// Experiment selection rule. Entropy policies maximize the partition
/// entropy under their scheme; Pwc maximizes the pairwise surrogate; Random
/// and FixedSequence are baselines.
struct SelectionPolicy {
    enum class Kind { Entropy, Pwc, Random, FixedSequence };

    Kind kind = Kind::Entropy;
    PartitionScheme scheme = PartitionScheme::Mec;  // Entropy only
    std::vector<NodeId> sequence;                   // FixedSequence only

    static SelectionPolicy entropy(PartitionScheme s) { return {Kind::Entropy, s, {}}; }
    static SelectionPolicy pwc() { return {Kind::Pwc, PartitionScheme::Mec, {}}; }
    static SelectionPolicy random() { return {Kind::Random, PartitionScheme::Mec, {}}; }
    static SelectionPolicy fixed_sequence(std::vector<NodeId> seq) {
        return {Kind::FixedSequence, PartitionScheme::Mec, std::move(seq)};
    }

    /// Short label used in output files: mec, cs, ds, ps, pwc, random, fixed.
    std::string name() const {
        switch (kind) {
            case Kind::Entropy: return scheme_name(scheme);
            case Kind::Pwc: return "pwc";
            case Kind::Random: return "random";
            case Kind::FixedSequence: return "fixed";
        }
        throw Error("SelectionPolicy: unreachable");
    }
};

struct OedConfig {
    NodeSet candidates = 0;          // nodes eligible for manipulation; 0 = all
    bool allow_repeat = false;
    double entropy_tolerance = 0.0;  // stop when posterior entropy < this; 0 never stops
    int max_experiments = 1;         // total rounds including the observational one
    std::int64_t n_obs = 1;
    std::int64_t n_intv = 1;
    std::map<NodeId, int> intervention_values;  // state to clamp to, default 0

    NodeSet candidate_mask(int num_nodes) const {
        return candidates ? candidates : full_set(num_nodes);
    }
    int value_for(NodeId e) const {
        auto it = intervention_values.find(e);
        return it == intervention_values.end() ? 0 : it->second;
    }
};

struct SelectionResult {
    NodeId node = -1;
    std::vector<std::pair<NodeId, double>> scores;  // criterion per eligible candidate
    bool collapsed = false;  // criterion gave every candidate zero
};

namespace detail {

inline SelectionResult select_from(const PosteriorSamples& samples, const SelectionPolicy& policy,
                                   NodeSet eligible, Rng& rng) {
    if (!eligible) throw ExhaustedError("select_next: no eligible candidate remains");
    const std::vector<NodeId> nodes = set_to_nodes(eligible);
    SelectionResult res;
    switch (policy.kind) {
        case SelectionPolicy::Kind::Entropy:
        case SelectionPolicy::Kind::Pwc: {
            for (NodeId e : nodes) {
                const double s = policy.kind == SelectionPolicy::Kind::Entropy
                                     ? criterion_entropy(samples, policy.scheme, e)
                                     : pwc_score(samples, e);
                res.scores.emplace_back(e, s);
            }
            double best = -1.0;
            for (const auto& [e, s] : res.scores) {
                if (s > best) {
                    best = s;
                    res.node = e;
                }
            }
            if (best <= 0.0) {
                // nothing to learn by the criterion; take the smallest id so
                // the run stays deterministic
                res.collapsed = true;
                res.node = nodes.front();
            }
            return res;
        }
        case SelectionPolicy::Kind::Random:
            res.node = nodes[rng.uniform_int(nodes.size())];
            return res;
        case SelectionPolicy::Kind::FixedSequence:
            for (NodeId e : policy.sequence)
                if (set_contains(eligible, e)) {
                    res.node = e;
                    return res;
                }
            throw ExhaustedError("select_next: fixed sequence has no eligible entry left");
    }
    throw Error("select_from: unreachable");
}

}  // namespace detail

/// Next node to manipulate. history holds nodes already manipulated; with
/// allow_repeat unset they are excluded. Ties go to the smallest node id.
inline NodeId select_next(const PosteriorSamples& samples, const SelectionPolicy& policy,
                          const OedConfig& cfg, NodeSet history, Rng& rng) {
    NodeSet eligible = cfg.candidate_mask(samples.num_nodes());
    if (!cfg.allow_repeat) eligible &= ~history;
    return detail::select_from(samples, policy, eligible, rng).node;
}

/// One full simulated design loop against a known ground truth: draw an
/// observational batch, then alternate posterior fitting, candidate scoring
/// and interventional batches until a stop rule fires. Experiment 1 is the
/// observational round. Everything is driven by streams derived from seed,
/// so a run is reproducible from (truth, configs, seed) alone.
inline ExperimentLog run_sequential(const CategoricalNetwork& truth,
                                    const SelectionPolicy& policy, const OedConfig& oed_cfg,
                                    const McmcConfig& mcmc_cfg, std::uint64_t seed) {
    if (oed_cfg.max_experiments < 1)
        throw ValidationError("run_sequential: max_experiments must be positive");
    if (oed_cfg.n_obs < 0 || oed_cfg.n_intv < 1)
        throw ValidationError("run_sequential: need n_obs >= 0 and n_intv >= 1");
    const int V = truth.num_nodes();
    if (oed_cfg.candidates & ~full_set(V))
        throw ValidationError("run_sequential: candidate set references a node out of range");

    ExperimentLog log;
    log.policy = policy.name();
    log.scheme = policy.kind == SelectionPolicy::Kind::Entropy ? scheme_name(policy.scheme)
                 : policy.kind == SelectionPolicy::Kind::Pwc   ? "pwc"
                                                               : "";
    log.seed = seed;

    Rng data_rng(derive_seed(seed, 0, "data"));
    Rng policy_rng(derive_seed(seed, 0, "policy"));
    InterventionalDataset data(V, truth.arities());
    for (std::int64_t k = 0; k < oed_cfg.n_obs; ++k)
        data.append(draw_row(truth, InterventionSpec::observational(), data_rng));

    NodeSet history = 0;
    int t = 1;
    auto fit_and_record = [&](NodeId chosen, SelectionResult sel) {
        McmcConfig mc = mcmc_cfg;
        mc.seed = derive_seed(seed, static_cast<std::uint64_t>(t), "mcmc");
        const PosteriorSamples samples = mcmc_sample(data, GraphPrior::uniform(), mc);
        const DirectedGraph est = median_probability_graph(edge_probabilities(samples));
        ExperimentRecord rec;
        rec.experiment = t;
        rec.chosen_node = chosen;
        rec.criterion_scores = std::move(sel.scores);
        rec.criterion_collapsed = sel.collapsed;
        rec.hamming = hamming(est, truth.dag());
        rec.tpr = tpr(est, truth.dag());
        rec.entropy_nats = posterior_entropy_estimate(samples);
        rec.n_distinct_graphs = static_cast<std::int64_t>(samples.support().size());
        rec.dataset_rows = data.num_rows();
        log.records.push_back(std::move(rec));
        return samples;
    };

    PosteriorSamples samples = fit_and_record(-1, SelectionResult{});
    while (true) {
        if (t >= oed_cfg.max_experiments) {
            log.stop_reason = "max_experiments";
            break;
        }
        if (posterior_entropy_estimate(samples) < oed_cfg.entropy_tolerance) {
            log.stop_reason = "entropy_below_tolerance";
            break;
        }
        NodeSet eligible = oed_cfg.candidate_mask(V);
        if (!oed_cfg.allow_repeat) eligible &= ~history;
        if (!eligible) {
            log.stop_reason = "candidates_exhausted";
            break;
        }
        const SelectionResult sel = detail::select_from(samples, policy, eligible, policy_rng);
        history |= node_bit(sel.node);
        const auto spec = InterventionSpec::fixed_value(sel.node, oed_cfg.value_for(sel.node));
        spec.validate(truth);
        for (std::int64_t k = 0; k < oed_cfg.n_intv; ++k)
            data.append(draw_row(truth, spec, data_rng));
        ++t;
        samples = fit_and_record(sel.node, sel);
    }
    return log;
}

/// Ranks candidate manipulations for an existing dataset, highest criterion
/// first, ties by node id. Nodes already manipulated in the data count as
/// history unless repeats are allowed.
inline std::vector<std::pair<NodeId, double>> recommend(const InterventionalDataset& data,
                                                        const SelectionPolicy& policy,
                                                        const OedConfig& cfg,
                                                        const McmcConfig& mcmc_cfg) {
    const int V = data.num_nodes();
    NodeSet history = 0;
    for (const auto& row : data.rows()) history |= row.manipulated;
    NodeSet eligible = cfg.candidate_mask(V);
    if (!cfg.allow_repeat) eligible &= ~history;
    if (!eligible) throw ExhaustedError("recommend: every candidate was already manipulated");

    const PosteriorSamples samples = mcmc_sample(data, GraphPrior::uniform(), mcmc_cfg);
    Rng rng(derive_seed(mcmc_cfg.seed, 0, "recommend"));
    SelectionResult sel = detail::select_from(samples, policy, eligible, rng);
    if (sel.scores.empty())  // random or fixed policies carry no scores
        for (NodeId e : set_to_nodes(eligible))
            sel.scores.emplace_back(e, e == sel.node ? 1.0 : 0.0);
    std::stable_sort(sel.scores.begin(), sel.scores.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    return sel.scores;
}

}  // namespace causal_oed
