#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>

#include "causal_oed/metrics.hpp"

using namespace causal_oed;
using Catch::Matchers::WithinAbs;

namespace {

ExperimentLog log_with(const std::vector<std::array<double, 3>>& rows) {
    // rows of (hamming, tpr, entropy), one per experiment
    ExperimentLog log;
    for (std::size_t t = 0; t < rows.size(); ++t) {
        ExperimentRecord rec;
        rec.experiment = static_cast<int>(t + 1);
        rec.hamming = static_cast<int>(rows[t][0]);
        rec.tpr = rows[t][1];
        rec.entropy_nats = rows[t][2];
        log.records.push_back(rec);
    }
    return log;
}

}  // namespace

TEST_CASE("median probability graph keeps edges at or above one half", "[metrics]") {
    EdgeMatrix m(3);
    m.at(0, 1) = 0.5;    // boundary stays in
    m.at(1, 2) = 0.499;  // just below drops out
    m.at(2, 1) = 0.9;
    const DirectedGraph g = median_probability_graph(m);
    REQUIRE(g.has_edge(0, 1));
    REQUIRE_FALSE(g.has_edge(1, 2));
    REQUIRE(g.has_edge(2, 1));
    REQUIRE(g.edge_list.size() == 2);

    // both directions clearing the bar yields a 2-cycle, deliberately
    EdgeMatrix both(2);
    both.at(0, 1) = 0.6;
    both.at(1, 0) = 0.7;
    const DirectedGraph h = median_probability_graph(both);
    REQUIRE(h.has_edge(0, 1));
    REQUIRE(h.has_edge(1, 0));

    REQUIRE(median_probability_graph(EdgeMatrix(2)).edge_list.empty());
}

TEST_CASE("hamming counts ordered pair disagreements", "[metrics]") {
    const Dag truth = dag_from_edges(3, {{0, 1}, {1, 2}});
    REQUIRE(hamming(DirectedGraph::from_edges(3, {{0, 1}, {1, 2}}), truth) == 0);
    REQUIRE(hamming(DirectedGraph::from_edges(3, {{0, 1}}), truth) == 1);
    REQUIRE(hamming(DirectedGraph::from_edges(3, {{1, 0}, {1, 2}}), truth) == 2);  // reversal
    REQUIRE(hamming(DirectedGraph::from_edges(3, {}), truth) == 2);
    REQUIRE(hamming(DirectedGraph::from_edges(3, {{0, 1}, {1, 2}, {0, 2}}), truth) == 1);
    REQUIRE_THROWS_AS(hamming(DirectedGraph::from_edges(2, {}), truth), DimensionError);
}

TEST_CASE("tpr is the fraction of true edges recovered oriented", "[metrics]") {
    const Dag truth = dag_from_edges(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}});
    REQUIRE(tpr(DirectedGraph::from_edges(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}}), truth) == 1.0);
    REQUIRE(tpr(DirectedGraph::from_edges(4, {}), truth) == 0.0);
    REQUIRE(tpr(DirectedGraph::from_edges(4, {{0, 1}, {1, 2}, {2, 3}}), truth) == 0.75);
    // a reversed edge does not count, extra edges do not hurt
    REQUIRE(tpr(DirectedGraph::from_edges(4, {{1, 0}, {1, 2}, {2, 3}, {0, 3}, {0, 2}}), truth) ==
            0.75);
    REQUIRE_THROWS_AS(tpr(DirectedGraph::from_edges(2, {}), dag_from_edges(2, {})),
                      UndefinedError);
}

TEST_CASE("extra edges spare tpr but not hamming", "[metrics]") {
    const Dag truth = dag_from_edges(4, {{0, 1}, {1, 2}, {2, 3}});
    std::vector<std::pair<NodeId, NodeId>> edges = truth.edges();
    const double base_tpr = tpr(DirectedGraph::from_edges(4, edges), truth);
    const int base_ham = hamming(DirectedGraph::from_edges(4, edges), truth);
    REQUIRE(base_tpr == 1.0);
    REQUIRE(base_ham == 0);
    int added = 0;
    for (auto fp : {std::pair<NodeId, NodeId>{0, 2}, {0, 3}, {3, 1}}) {
        edges.push_back(fp);
        ++added;
        const DirectedGraph est = DirectedGraph::from_edges(4, edges);
        REQUIRE(tpr(est, truth) == base_tpr);
        REQUIRE(hamming(est, truth) == added);
    }
}

TEST_CASE("posterior entropy estimate matches closed forms", "[metrics]") {
    std::map<DagKey, std::int64_t> one;
    one[DagKey{0u, 0u}] = 5;
    REQUIRE(posterior_entropy_estimate(PosteriorSamples::from_counts(2, one, Provenance{})) == 0.0);

    std::map<DagKey, std::int64_t> two;
    two[DagKey{0u, 0u}] = 3;
    two[DagKey{0u, 1u}] = 3;
    REQUIRE_THAT(posterior_entropy_estimate(PosteriorSamples::from_counts(2, two, Provenance{})),
                 WithinAbs(std::log(2.0), 1e-12));

    const InterventionalDataset empty3(3, {2, 2, 2});
    REQUIRE_THAT(posterior_entropy_estimate(exact_posterior(empty3, GraphPrior::uniform())),
                 WithinAbs(std::log(25.0), 1e-12));

    std::map<DagKey, std::int64_t> skew;
    skew[DagKey{0u, 0u}] = 3;
    skew[DagKey{0u, 1u}] = 1;
    const PosteriorSamples ps = PosteriorSamples::from_counts(2, skew, Provenance{});
    REQUIRE_THAT(posterior_entropy_estimate(ps),
                 WithinAbs(std::log(4.0) - 0.75 * std::log(3.0), 1e-12));
    // strictly below the uniform bound ln(#support) when weights are unequal
    REQUIRE(posterior_entropy_estimate(ps) <
            std::log(static_cast<double>(ps.support().size())));
}

TEST_CASE("aggregate reports means and standard errors per experiment", "[metrics]") {
    // two simulations: hamming (2, 4) at experiment 1 gives mean 3, sample sd
    // sqrt(2), se 1
    const std::vector<ExperimentLog> logs = {
        log_with({{2.0, 0.5, 1.0}, {1.0, 0.75, 0.5}}),
        log_with({{4.0, 1.0, 3.0}, {1.0, 0.75, 0.1}}),
    };
    const auto rows = aggregate(logs);
    REQUIRE(rows.size() == 2);
    REQUIRE(rows[0].experiment == 1);
    REQUIRE(rows[0].n == 2);
    REQUIRE_FALSE(rows[0].degenerate);
    REQUIRE_THAT(rows[0].mean_hamming, WithinAbs(3.0, 1e-12));
    REQUIRE_THAT(rows[0].se_hamming, WithinAbs(1.0, 1e-12));
    REQUIRE_THAT(rows[0].mean_tpr, WithinAbs(0.75, 1e-12));
    REQUIRE_THAT(rows[0].se_tpr, WithinAbs(0.25, 1e-12));
    REQUIRE_THAT(rows[0].mean_entropy, WithinAbs(2.0, 1e-12));
    REQUIRE_THAT(rows[1].mean_hamming, WithinAbs(1.0, 1e-12));
    REQUIRE(rows[1].se_hamming == 0.0);  // identical values, zero spread
    REQUIRE_THAT(rows[1].se_entropy, WithinAbs(0.2, 1e-12));

    // single log: all standard errors zero and flagged degenerate
    const auto single = aggregate({log_with({{2.0, 0.5, 1.0}})});
    REQUIRE(single.size() == 1);
    REQUIRE(single[0].degenerate);
    REQUIRE(single[0].se_hamming == 0.0);
    REQUIRE(single[0].mean_hamming == 2.0);

    REQUIRE_THROWS_AS(aggregate({}), ValidationError);
    REQUIRE_THROWS_AS(aggregate({log_with({{1, 1, 1}}), log_with({{1, 1, 1}, {1, 1, 1}})}),
                      DimensionError);
}
