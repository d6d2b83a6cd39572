#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "causal_oed/rng.hpp"
#include "causal_oed/scoring.hpp"

using namespace causal_oed;
using Catch::Matchers::WithinAbs;

namespace {

Dag random_dag(int V, double edge_prob, Rng& rng) {
    std::vector<NodeId> order(static_cast<std::size_t>(V));
    for (NodeId i = 0; i < V; ++i) order[static_cast<std::size_t>(i)] = i;
    for (int i = V - 1; i > 0; --i)
        std::swap(order[static_cast<std::size_t>(i)],
                  order[rng.uniform_int(static_cast<std::uint64_t>(i) + 1)]);
    std::vector<NodeSet> parents(static_cast<std::size_t>(V), 0u);
    for (int a = 0; a < V; ++a)
        for (int b = a + 1; b < V; ++b)
            if (rng.uniform() < edge_prob)
                parents[static_cast<std::size_t>(order[static_cast<std::size_t>(b)])] |=
                    node_bit(order[static_cast<std::size_t>(a)]);
    return Dag(V, std::move(parents));
}

// arbitrary states and arbitrary (possibly multi-node) manipulation sets
InterventionalDataset make_dataset(const std::vector<int>& arities, int n, double manip_prob,
                                  Rng& rng) {
    const int V = static_cast<int>(arities.size());
    InterventionalDataset data(V, arities);
    for (int k = 0; k < n; ++k) {
        DatasetRow row;
        for (int i = 0; i < V; ++i)
            row.states.push_back(static_cast<std::uint8_t>(
                rng.uniform_int(static_cast<std::uint64_t>(arities[static_cast<std::size_t>(i)]))));
        for (int i = 0; i < V; ++i)
            if (rng.uniform() < manip_prob) row.manipulated |= node_bit(i);
        data.append(std::move(row));
    }
    return data;
}

}  // namespace

TEST_CASE("count_table masks rows manipulating the node", "[scoring]") {
    InterventionalDataset data(2, {2, 2});
    const CountTable empty = count_table(data, 0, 0u);
    REQUIRE(empty.q == 1);
    REQUIRE(empty.n_j == std::vector<std::int64_t>{0});

    data.append({{1, 0}, node_bit(0)});
    data.append({{1, 1}, 0u});
    data.append({{0, 1}, node_bit(1)});

    // node 0: the row clamping node 0 is invisible to it
    const CountTable t0 = count_table(data, 0, 0u);
    REQUIRE(t0.n_j == std::vector<std::int64_t>{2});
    REQUIRE(t0.n_jk == std::vector<std::int64_t>{1, 1});

    // node 1 with parent 0: only its own clamp row is dropped, and the two
    // surviving rows both have the parent in state 1
    const CountTable t1 = count_table(data, 1, node_bit(0));
    REQUIRE(t1.n_j == std::vector<std::int64_t>{0, 2});
    REQUIRE(t1.n_jk == std::vector<std::int64_t>{0, 0, 1, 1});

    REQUIRE_THROWS_AS(count_table(data, 0, node_bit(0)), ValidationError);
    REQUIRE_THROWS_AS(count_table(data, 2, 0u), ValidationError);
}

TEST_CASE("family score closed forms", "[scoring]") {
    InterventionalDataset data(1, {2});
    REQUIRE(local_log_score(count_table(data, 0, 0u)) == 0.0);

    data.append({{0}, 0u});
    REQUIRE_THAT(local_log_score(count_table(data, 0, 0u)), WithinAbs(std::log(0.5), 1e-12));

    data.append({{0}, 0u});
    REQUIRE_THAT(local_log_score(count_table(data, 0, 0u)), WithinAbs(std::log(0.375), 1e-12));
}

TEST_CASE("marginal likelihood of an empty dataset is zero", "[scoring]") {
    const InterventionalDataset data(3, {2, 3, 2});
    for (const Dag& g : enumerate_dags(3)) {
        REQUIRE(log_marginal_likelihood(data, g) == 0.0);
        REQUIRE(sequential_predictive_log_prob(data, g) == 0.0);
    }
}

TEST_CASE("closed form agrees with the predictive chain rule", "[scoring]") {
    Rng rng(2024);
    for (int rep = 0; rep < 120; ++rep) {
        const int V = 2 + static_cast<int>(rng.uniform_int(3));
        std::vector<int> arities;
        for (int i = 0; i < V; ++i) arities.push_back(2 + static_cast<int>(rng.uniform_int(2)));
        const auto data = make_dataset(arities, static_cast<int>(rng.uniform_int(41)), 0.3, rng);
        const Dag g = random_dag(V, 0.5, rng);
        const ScoreConfig cfg{rep % 2 == 0};
        const double a = log_marginal_likelihood(data, g, cfg);
        const double b = sequential_predictive_log_prob(data, g, cfg);
        REQUIRE_THAT(a, WithinAbs(b, 1e-9));
    }
}

TEST_CASE("row order does not change the closed-form score", "[scoring]") {
    Rng rng(5);
    const std::vector<int> arities = {2, 3, 2};
    const auto data = make_dataset(arities, 25, 0.25, rng);
    InterventionalDataset reversed(3, arities);
    for (auto it = data.rows().rbegin(); it != data.rows().rend(); ++it) reversed.append(*it);
    const Dag g = dag_from_edges(3, {{0, 1}, {2, 1}});
    REQUIRE(log_marginal_likelihood(data, g) == log_marginal_likelihood(reversed, g));
    REQUIRE_THAT(sequential_predictive_log_prob(data, g),
                 WithinAbs(sequential_predictive_log_prob(reversed, g), 1e-9));
}

TEST_CASE("markov equivalent graphs score observational data equally", "[scoring]") {
    Rng rng(31);
    const auto data = make_dataset({2, 2, 2}, 30, 0.0, rng);
    const Dag chain = dag_from_edges(3, {{0, 1}, {1, 2}});
    const Dag fork = dag_from_edges(3, {{1, 0}, {1, 2}});
    const Dag reversed = dag_from_edges(3, {{2, 1}, {1, 0}});
    REQUIRE_THAT(log_marginal_likelihood(data, chain),
                 WithinAbs(log_marginal_likelihood(data, fork), 1e-9));
    REQUIRE_THAT(log_marginal_likelihood(data, chain),
                 WithinAbs(log_marginal_likelihood(data, reversed), 1e-9));
}

TEST_CASE("graphs equivalent after surgery score pure intervention data equally", "[scoring]") {
    // every row clamps node 0, which is isolated in both graphs; their
    // surgered forms are markov equivalent, so full scores must match
    const Dag g1 = dag_from_edges(3, {{1, 2}});
    const Dag g2 = dag_from_edges(3, {{2, 1}});
    Rng rng(77);
    InterventionalDataset data(3, {2, 2, 2});
    for (int k = 0; k < 9; ++k) {
        DatasetRow row;
        for (int i = 0; i < 3; ++i)
            row.states.push_back(static_cast<std::uint8_t>(rng.uniform_int(2)));
        row.manipulated = node_bit(0);
        data.append(std::move(row));
    }
    const ScoreConfig with_term{true};
    REQUIRE_THAT(log_marginal_likelihood(data, g1, with_term),
                 WithinAbs(log_marginal_likelihood(data, g2, with_term), 1e-9));
}

TEST_CASE("manipulated-value term is graph independent", "[scoring]") {
    Rng rng(13);
    const auto data = make_dataset({2, 3, 2, 2}, 30, 0.4, rng);
    const Dag a = random_dag(4, 0.5, rng);
    const Dag b = random_dag(4, 0.5, rng);
    const double delta_off =
        log_marginal_likelihood(data, a) - log_marginal_likelihood(data, b);
    const double delta_on = log_marginal_likelihood(data, a, ScoreConfig{true}) -
                            log_marginal_likelihood(data, b, ScoreConfig{true});
    REQUIRE_THAT(delta_on, WithinAbs(delta_off, 1e-9));

    // one clamped binary value: the term is exactly ln(1/2)
    InterventionalDataset one(1, {2});
    one.append({{1}, node_bit(0)});
    REQUIRE_THAT(log_marginal_likelihood(one, Dag::empty(1), ScoreConfig{true}),
                 WithinAbs(std::log(0.5), 1e-12));
    REQUIRE(log_marginal_likelihood(one, Dag::empty(1)) == 0.0);
}

TEST_CASE("family score cache is transparent and notices appends", "[scoring]") {
    Rng rng(21);
    const std::vector<int> arities = {2, 2, 3};
    auto data = make_dataset(arities, 20, 0.2, rng);
    FamilyScoreCache cache(data);
    for (const Dag& g : enumerate_dags(3)) {
        REQUIRE(cache.log_marginal_likelihood(g) == log_marginal_likelihood(data, g));
        REQUIRE(cache.log_marginal_likelihood(g) == log_marginal_likelihood(data, g));
    }
    const std::size_t before = cache.size();
    REQUIRE(before > 0);

    data.append({{1, 1, 2}, 0u});
    const Dag chain = dag_from_edges(3, {{0, 1}, {1, 2}});
    REQUIRE(cache.log_marginal_likelihood(chain) == log_marginal_likelihood(data, chain));

    const InterventionalDataset other(2, {2, 2});
    FamilyScoreCache cache2(other);
    REQUIRE_THROWS_AS(cache2.log_marginal_likelihood(chain), DimensionError);
}

TEST_CASE("scoring dimension checks", "[scoring]") {
    const InterventionalDataset data(2, {2, 2});
    REQUIRE_THROWS_AS(log_marginal_likelihood(data, Dag::empty(3)), DimensionError);
    REQUIRE_THROWS_AS(sequential_predictive_log_prob(data, Dag::empty(3)), DimensionError);
}
