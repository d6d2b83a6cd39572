#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "causal_oed/causal_oed.hpp"

namespace co = causal_oed;

namespace {

co::InterventionalDataset load_data(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw co::ParseError("cannot open '" + path + "'");
    return co::read_csv(in);
}

void write_or_print(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream os(out_path, std::ios::binary);
    if (!os) throw co::Error("cannot write '" + out_path + "'");
    os << text;
}

struct McmcOptions {
    std::int64_t iters = 250000;
    std::int64_t burn_in = 150000;
    double global_move_prob = 0.3;
    int parent_cap = 5;
    std::uint64_t seed = 0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--mcmc-iters", iters, "MCMC iterations");
        cmd->add_option("--burn-in", burn_in, "iterations discarded before retaining states");
        cmd->add_option("--global-move-prob", global_move_prob,
                        "probability of an independence proposal per step");
        cmd->add_option("--parent-cap", parent_cap, "parent-set cap for the proposal marginals");
        cmd->add_option("--seed", seed, "random seed");
    }

    co::McmcConfig config() const { return {iters, burn_in, global_move_prob, parent_cap, seed}; }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sequential experimental design for causal structure learning"};
    app.set_version_flag("--version", "causal-oed 0.1.0");
    app.require_subcommand(1);

    // simulate
    auto* simulate = app.add_subcommand("simulate", "run a simulation study from a config file");
    std::string sim_config, sim_out;
    simulate->add_option("--config", sim_config, "study config JSON")->required();
    simulate->add_option("--out", sim_out, "output directory");

    // recommend
    auto* rec = app.add_subcommand("recommend", "rank candidate interventions for a dataset");
    std::string rec_data, rec_policy = "mec", rec_candidates;
    bool rec_allow_repeat = false;
    McmcOptions rec_mcmc;
    rec->add_option("--data", rec_data, "dataset CSV")->required();
    rec->add_option("--policy", rec_policy, "mec|cs|ds|ps|pwc|random|fixed:a,b,...");
    rec->add_option("--candidates", rec_candidates, "comma-separated candidate nodes");
    rec->add_flag("--allow-repeat", rec_allow_repeat, "allow already-manipulated nodes");
    rec_mcmc.attach(rec);

    // score
    auto* score = app.add_subcommand("score", "log marginal likelihood of data given a graph");
    std::string score_data, score_graph;
    bool score_iterm = false;
    score->add_option("--data", score_data, "dataset CSV")->required();
    score->add_option("--graph", score_graph, "graph JSON")->required();
    score->add_flag("--intervention-term", score_iterm,
                    "include the graph-independent manipulated-value term");

    // posterior
    auto* post = app.add_subcommand("posterior", "posterior over graphs for a dataset");
    std::string post_data;
    bool post_exact = false;
    int post_top = 10;
    McmcOptions post_mcmc;
    post->add_option("--data", post_data, "dataset CSV")->required();
    post->add_flag("--exact", post_exact, "enumerate instead of sampling (small graphs only)");
    post->add_option("--top", post_top, "how many highest-weight graphs to print");
    post_mcmc.attach(post);

    // mec
    auto* mec = app.add_subcommand("mec", "Markov equivalence class of a graph");
    std::string mec_graph;
    int mec_intervene = -1;
    mec->add_option("--graph", mec_graph, "graph JSON")->required();
    mec->add_option("--intervene", mec_intervene, "apply surgery for this node first");

    // fixture
    auto* fix = app.add_subcommand("fixture", "emit a named ground-truth network as JSON");
    std::string fix_name, fix_out;
    fix->add_option("--name", fix_name, "asia8|chain8|random10|sachs11|tree8")->required();
    fix->add_option("--out", fix_out, "output file (default stdout)");

    // sample
    auto* sample = app.add_subcommand("sample", "draw a dataset from a network");
    std::string sample_network, sample_out;
    std::int64_t sample_n = 100;
    std::uint64_t sample_seed = 0;
    int sample_target = -1, sample_value = 0;
    sample->add_option("--network", sample_network, "network JSON path or fixture name")
        ->required();
    sample->add_option("--n", sample_n, "number of rows");
    sample->add_option("--seed", sample_seed, "random seed");
    sample->add_option("--target", sample_target, "node to clamp (-1 = observational)");
    sample->add_option("--value", sample_value, "state to clamp the target to");
    sample->add_option("--out", sample_out, "output file (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*simulate) {
            co::StudyConfig cfg = co::load_study(sim_config);
            const co::StudyResult result = co::run_study(cfg, sim_out);
            std::cout << "wrote " << result.metrics_csv_path << '\n'
                      << "wrote " << result.aggregate_csv_path << '\n';
        } else if (*rec) {
            const auto data = load_data(rec_data);
            co::OedConfig cfg;
            cfg.allow_repeat = rec_allow_repeat;
            if (!rec_candidates.empty()) {
                // reuse the fixed-sequence parser for the comma list
                for (co::NodeId node : co::parse_policy("fixed:" + rec_candidates).sequence) {
                    if (node < 0 || node >= data.num_nodes())
                        throw co::ValidationError("candidate node out of range");
                    cfg.candidates |= co::node_bit(node);
                }
            }
            const auto ranked = co::recommend(data, co::parse_policy(rec_policy), cfg,
                                              rec_mcmc.config());
            std::cout << "node,score\n";
            for (const auto& [node, s] : ranked)
                std::cout << node << ',' << co::format_double(s) << '\n';
        } else if (*score) {
            const auto data = load_data(score_data);
            const co::Dag g = co::dag_from_json(co::load_json_file(score_graph));
            const double lml =
                co::log_marginal_likelihood(data, g, co::ScoreConfig{score_iterm});
            std::cout << co::format_double(lml) << '\n';
        } else if (*post) {
            const auto data = load_data(post_data);
            const co::PosteriorSamples samples =
                post_exact ? co::exact_posterior(data, co::GraphPrior::uniform())
                           : co::mcmc_sample(data, co::GraphPrior::uniform(), post_mcmc.config());
            std::cout << "method," << samples.provenance().method << '\n'
                      << "distinct_graphs," << samples.support().size() << '\n'
                      << "entropy_nats," << co::format_double(co::posterior_entropy_estimate(samples))
                      << '\n';
            std::vector<std::size_t> idx(samples.support().size());
            for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = k;
            std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
                return samples.weights()[a] > samples.weights()[b];
            });
            const std::size_t top = std::min<std::size_t>(idx.size(),
                                                          static_cast<std::size_t>(post_top));
            for (std::size_t k = 0; k < top; ++k) {
                const auto& g = samples.support()[idx[k]];
                std::cout << "graph," << co::format_double(samples.weights()[idx[k]]) << ",\"";
                const auto edges = g.edges();
                for (std::size_t e = 0; e < edges.size(); ++e)
                    std::cout << (e ? " " : "") << edges[e].first << "->" << edges[e].second;
                std::cout << "\"\n";
            }
            const co::EdgeMatrix probs = co::edge_probabilities(samples);
            std::cout << "edge,u,v,probability\n";
            for (co::NodeId u = 0; u < probs.num_nodes; ++u)
                for (co::NodeId v = 0; v < probs.num_nodes; ++v)
                    if (u != v && probs.at(u, v) > 0.0)
                        std::cout << "edge," << u << ',' << v << ','
                                  << co::format_double(probs.at(u, v)) << '\n';
        } else if (*mec) {
            co::Dag g = co::dag_from_json(co::load_json_file(mec_graph));
            if (mec_intervene >= 0) g = co::intervention_surgery(g, mec_intervene);
            const co::MecKey key = co::mec_key(g);
            co::json j;
            j["num_nodes"] = key.num_nodes();
            j["skeleton"] = co::json::array();
            for (auto [a, b] : key.skeleton()) j["skeleton"].push_back(co::json::array({a, b}));
            j["v_structures"] = co::json::array();
            for (auto [x, y, z] : key.v_structures())
                j["v_structures"].push_back(co::json::array({x, y, z}));
            std::cout << j.dump(2) << '\n';
        } else if (*fix) {
            write_or_print(co::network_to_json(co::fixture(fix_name)).dump(2) + "\n", fix_out);
        } else if (*sample) {
            const co::CategoricalNetwork net = co::resolve_truth(sample_network);
            const auto spec = sample_target >= 0
                                  ? co::InterventionSpec::fixed_value(sample_target, sample_value)
                                  : co::InterventionSpec::observational();
            const auto data = co::generate_dataset(net, spec, sample_n, sample_seed);
            std::ostringstream ss;
            co::write_csv(data, ss);
            write_or_print(ss.str(), sample_out);
        }
    } catch (const co::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
