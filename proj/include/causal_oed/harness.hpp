#pragma once

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "causal_oed/errors.hpp"
#include "causal_oed/fixtures.hpp"
#include "causal_oed/format.hpp"
#include "causal_oed/json_io.hpp"
#include "causal_oed/metrics.hpp"
#include "causal_oed/oed.hpp"
#include "causal_oed/posterior.hpp"

namespace causal_oed {

/// Candidate restriction mirroring the classic flow-cytometry protocol:
/// only mek, pip2, akt, pka and pkc may be clamped. Default clamp states:
/// pka high, the rest low.
inline const std::map<NodeId, int>& sachs_default_values() {
    static const std::map<NodeId, int> v = {{1, 0}, {3, 0}, {6, 0}, {7, 2}, {8, 0}};
    return v;
}

struct StudyConfig {
    int version = 1;
    std::string name;                  // defaults to the truth id
    std::string truth;                 // fixture name or path to a network json
    std::vector<std::string> policies = {"mec"};
    int n_sim = 50;
    int n_exp = 1;                     // rounds including the observational one
    std::int64_t n_obs = 1000;
    std::int64_t n_intv = 1000;
    std::vector<NodeId> candidates;    // empty = every node
    bool allow_repeat = false;
    double entropy_tolerance = 0.0;    // 0 = never stop on entropy
    std::uint64_t master_seed = 0;
    McmcConfig mcmc;                   // seed field ignored; seeds are derived per fit
    std::map<NodeId, int> intervention_values;
    bool sachs_candidates = false;     // restrict to the classic five targets
    std::string out_dir;               // default output directory, CLI --out wins
};

/// Parses a policy label: mec, cs, ds, ps, pwc, random, or fixed:3,1,2.
inline SelectionPolicy parse_policy(const std::string& label) {
    if (label == "pwc") return SelectionPolicy::pwc();
    if (label == "random") return SelectionPolicy::random();
    if (label.rfind("fixed:", 0) == 0) {
        std::vector<NodeId> seq;
        std::stringstream ss(label.substr(6));
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            try {
                std::size_t pos = 0;
                const int v = std::stoi(tok, &pos);
                if (pos != tok.size()) throw std::invalid_argument(tok);
                seq.push_back(v);
            } catch (const std::exception&) {
                throw ValidationError("policy '" + label + "': bad sequence entry '" + tok + "'");
            }
        }
        if (seq.empty()) throw ValidationError("policy '" + label + "': empty sequence");
        return SelectionPolicy::fixed_sequence(std::move(seq));
    }
    return SelectionPolicy::entropy(scheme_from_name(label));  // throws on unknown labels
}

inline StudyConfig study_from_json(const json& j) {
    const std::string what = "study config";
    if (!j.is_object()) throw ValidationError(what + ": expected a JSON object");
    detail::reject_unknown_keys(
        j,
        {"version", "name", "truth", "policies", "n_sim", "n_exp", "n_obs", "n_intv", "candidates",
         "allow_repeat", "entropy_tolerance", "master_seed", "mcmc", "intervention_values",
         "sachs_candidates", "out_dir"},
        what);
    StudyConfig cfg;
    if (j.contains("version"))
        cfg.version = static_cast<int>(detail::as_int(j["version"], what + ": version"));
    if (cfg.version != 1) throw ValidationError(what + ": unsupported version");

    const json& jt = detail::require_key(j, "truth", what);
    if (!jt.is_string()) throw ValidationError(what + ": 'truth' must be a string");
    cfg.truth = jt.get<std::string>();

    cfg.n_exp = static_cast<int>(detail::as_int(detail::require_key(j, "n_exp", what), "n_exp"));

    if (j.contains("name")) {
        if (!j["name"].is_string()) throw ValidationError(what + ": 'name' must be a string");
        cfg.name = j["name"].get<std::string>();
    }
    if (cfg.name.empty()) cfg.name = std::filesystem::path(cfg.truth).stem().string();

    if (j.contains("policies")) {
        if (!j["policies"].is_array() || j["policies"].empty())
            throw ValidationError(what + ": 'policies' must be a nonempty array");
        cfg.policies.clear();
        for (const auto& p : j["policies"]) {
            if (!p.is_string()) throw ValidationError(what + ": each policy must be a string");
            cfg.policies.push_back(p.get<std::string>());
        }
    }
    for (const auto& p : cfg.policies) parse_policy(p);  // validate labels now

    if (j.contains("n_sim")) cfg.n_sim = static_cast<int>(detail::as_int(j["n_sim"], "n_sim"));
    if (j.contains("n_obs")) cfg.n_obs = detail::as_int(j["n_obs"], "n_obs");
    if (j.contains("n_intv")) cfg.n_intv = detail::as_int(j["n_intv"], "n_intv");
    if (j.contains("candidates")) {
        if (!j["candidates"].is_array())
            throw ValidationError(what + ": 'candidates' must be an array");
        for (const auto& c : j["candidates"])
            cfg.candidates.push_back(static_cast<NodeId>(detail::as_int(c, "candidate")));
    }
    if (j.contains("allow_repeat")) {
        if (!j["allow_repeat"].is_boolean())
            throw ValidationError(what + ": 'allow_repeat' must be a boolean");
        cfg.allow_repeat = j["allow_repeat"].get<bool>();
    }
    if (j.contains("entropy_tolerance"))
        cfg.entropy_tolerance = detail::as_double(j["entropy_tolerance"], "entropy_tolerance");
    if (j.contains("master_seed")) {
        if (!j["master_seed"].is_number_unsigned() && !j["master_seed"].is_number_integer())
            throw ValidationError(what + ": 'master_seed' must be an integer");
        cfg.master_seed = j["master_seed"].get<std::uint64_t>();
    }
    if (j.contains("mcmc")) {
        const json& jm = j["mcmc"];
        if (!jm.is_object()) throw ValidationError(what + ": 'mcmc' must be an object");
        detail::reject_unknown_keys(
            jm, {"n_iterations", "burn_in", "global_move_prob", "parent_cap"}, what + ": mcmc");
        if (jm.contains("n_iterations"))
            cfg.mcmc.n_iterations = detail::as_int(jm["n_iterations"], "mcmc.n_iterations");
        if (jm.contains("burn_in")) cfg.mcmc.burn_in = detail::as_int(jm["burn_in"], "mcmc.burn_in");
        if (jm.contains("global_move_prob"))
            cfg.mcmc.global_move_prob =
                detail::as_double(jm["global_move_prob"], "mcmc.global_move_prob");
        if (jm.contains("parent_cap"))
            cfg.mcmc.parent_cap = static_cast<int>(detail::as_int(jm["parent_cap"], "mcmc.parent_cap"));
    }
    if (j.contains("intervention_values")) {
        const json& jv = j["intervention_values"];
        if (!jv.is_object())
            throw ValidationError(what + ": 'intervention_values' must be an object");
        for (const auto& item : jv.items()) {
            NodeId node;
            try {
                std::size_t pos = 0;
                node = std::stoi(item.key(), &pos);
                if (pos != item.key().size()) throw std::invalid_argument(item.key());
            } catch (const std::exception&) {
                throw ValidationError(what + ": intervention_values key '" + item.key() +
                                      "' is not a node id");
            }
            cfg.intervention_values[node] =
                static_cast<int>(detail::as_int(item.value(), "intervention value"));
        }
    }
    if (j.contains("sachs_candidates")) {
        if (!j["sachs_candidates"].is_boolean())
            throw ValidationError(what + ": 'sachs_candidates' must be a boolean");
        cfg.sachs_candidates = j["sachs_candidates"].get<bool>();
    }
    if (j.contains("out_dir")) {
        if (!j["out_dir"].is_string()) throw ValidationError(what + ": 'out_dir' must be a string");
        cfg.out_dir = j["out_dir"].get<std::string>();
    }

    if (cfg.n_sim < 1) throw ValidationError(what + ": n_sim must be positive");
    if (cfg.n_exp < 1) throw ValidationError(what + ": n_exp must be positive");
    if (cfg.n_obs < 0) throw ValidationError(what + ": n_obs must be nonnegative");
    if (cfg.n_intv < 1) throw ValidationError(what + ": n_intv must be positive");
    if (cfg.entropy_tolerance < 0) throw ValidationError(what + ": entropy_tolerance must be >= 0");
    return cfg;
}

inline StudyConfig load_study(const std::string& path) {
    return study_from_json(load_json_file(path));
}

/// Canonical JSON form with every field explicit; load(save(cfg)) == cfg.
inline json study_to_json(const StudyConfig& cfg) {
    json j;
    j["version"] = cfg.version;
    j["name"] = cfg.name;
    j["truth"] = cfg.truth;
    j["policies"] = cfg.policies;
    j["n_sim"] = cfg.n_sim;
    j["n_exp"] = cfg.n_exp;
    j["n_obs"] = cfg.n_obs;
    j["n_intv"] = cfg.n_intv;
    j["candidates"] = cfg.candidates;
    j["allow_repeat"] = cfg.allow_repeat;
    j["entropy_tolerance"] = cfg.entropy_tolerance;
    j["master_seed"] = cfg.master_seed;
    j["mcmc"] = {{"n_iterations", cfg.mcmc.n_iterations},
                 {"burn_in", cfg.mcmc.burn_in},
                 {"global_move_prob", cfg.mcmc.global_move_prob},
                 {"parent_cap", cfg.mcmc.parent_cap}};
    json vals = json::object();
    for (const auto& [node, value] : cfg.intervention_values)
        vals[std::to_string(node)] = value;
    j["intervention_values"] = std::move(vals);
    j["sachs_candidates"] = cfg.sachs_candidates;
    j["out_dir"] = cfg.out_dir;
    return j;
}

/// Resolves a truth id: a known fixture name wins, otherwise it is read as a
/// network file path.
inline CategoricalNetwork resolve_truth(const std::string& id) {
    for (const auto& n : fixture_names())
        if (n == id) return fixture(id);
    if (std::filesystem::exists(id)) return network_from_json(load_json_file(id));
    throw UnknownFixtureError("'" + id + "' is neither a fixture name nor an existing file");
}

namespace detail {

inline int resolve_thread_count(std::size_t n_tasks) {
    int n = 0;
    if (const char* env = std::getenv("CAUSAL_OED_THREADS")) {
        try {
            n = std::stoi(env);
        } catch (const std::exception&) {
            n = 0;
        }
    }
    if (n < 1) n = static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(n), n_tasks));
}

inline std::string sanitize_label(const std::string& s) {
    std::string out;
    for (char c : s)
        out.push_back((std::isalnum(static_cast<unsigned char>(c)) != 0) ? c : '-');
    return out;
}

}  // namespace detail

struct StudyResult {
    StudyConfig config;
    std::vector<std::vector<ExperimentLog>> logs;  // [policy][sim]
    std::string metrics_csv_path;
    std::string aggregate_csv_path;
};

/// Runs every (policy, simulation) cell of a study and writes metrics.csv,
/// aggregate.csv and one JSON log per cell under out_dir. Simulation seeds
/// depend only on (master_seed, sim index), so policies face identical
/// ground-truth draws and the output is byte-identical at any thread count.
inline StudyResult run_study(const StudyConfig& cfg, const std::string& out_dir_arg = "") {
    const std::string out_dir = out_dir_arg.empty() ? cfg.out_dir : out_dir_arg;
    if (out_dir.empty()) throw ValidationError("run_study: no output directory given");
    const CategoricalNetwork truth = resolve_truth(cfg.truth);
    const int V = truth.num_nodes();
    if (truth.dag().num_edges() == 0)
        throw ValidationError("run_study: the true graph has no edges, tpr would be undefined");

    OedConfig oed;
    oed.max_experiments = cfg.n_exp;
    oed.n_obs = cfg.n_obs;
    oed.n_intv = cfg.n_intv;
    oed.allow_repeat = cfg.allow_repeat;
    oed.entropy_tolerance = cfg.entropy_tolerance;
    oed.intervention_values = cfg.intervention_values;
    for (NodeId c : cfg.candidates) {
        if (c < 0 || c >= V) throw ValidationError("run_study: candidate node out of range");
        oed.candidates |= node_bit(c);
    }
    if (cfg.sachs_candidates) {
        if (V != 11) throw ValidationError("run_study: sachs_candidates needs an 11-node truth");
        oed.candidates = 0;
        for (const auto& [node, value] : sachs_default_values()) {
            oed.candidates |= node_bit(node);
            if (!oed.intervention_values.count(node)) oed.intervention_values[node] = value;
        }
    }
    for (const auto& [node, value] : oed.intervention_values) {
        if (node < 0 || node >= V)
            throw ValidationError("run_study: intervention_values node out of range");
        if (value < 0 || value >= truth.arity(node))
            throw ValidationError("run_study: intervention value exceeds arity of node " +
                                  std::to_string(node));
    }

    std::vector<SelectionPolicy> policies;
    for (const auto& label : cfg.policies) policies.push_back(parse_policy(label));

    struct Task {
        std::size_t policy_idx;
        int sim;
    };
    std::vector<Task> tasks;
    for (std::size_t p = 0; p < policies.size(); ++p)
        for (int s = 0; s < cfg.n_sim; ++s) tasks.push_back({p, s});
    std::vector<ExperimentLog> flat(tasks.size());

    const int n_threads = detail::resolve_thread_count(tasks.size());
    std::atomic<std::size_t> cursor{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= tasks.size()) return;
            try {
                const auto& task = tasks[i];
                const std::uint64_t sim_seed =
                    derive_seed(cfg.master_seed, static_cast<std::uint64_t>(task.sim), "sim");
                flat[i] = run_sequential(truth, policies[task.policy_idx], oed, cfg.mcmc, sim_seed);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int k = 0; k < n_threads; ++k) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    StudyResult result;
    result.config = cfg;
    result.logs.resize(policies.size());
    for (std::size_t i = 0; i < tasks.size(); ++i)
        result.logs[tasks[i].policy_idx].push_back(std::move(flat[i]));

    namespace fs = std::filesystem;
    fs::create_directories(fs::path(out_dir) / "logs");

    const std::string metrics_path = (fs::path(out_dir) / "metrics.csv").string();
    {
        std::ofstream os(metrics_path, std::ios::binary);
        if (!os) throw Error("run_study: cannot write " + metrics_path);
        os << "study,policy,scheme,sim_index,experiment,chosen_node,hamming,tpr,entropy_nats\n";
        for (std::size_t p = 0; p < policies.size(); ++p)
            for (int s = 0; s < cfg.n_sim; ++s)
                for (const auto& rec : result.logs[p][static_cast<std::size_t>(s)].records)
                    os << cfg.name << ',' << cfg.policies[p] << ','
                       << result.logs[p][static_cast<std::size_t>(s)].scheme << ',' << s << ','
                       << rec.experiment << ',' << rec.chosen_node << ',' << rec.hamming << ','
                       << format_double(rec.tpr) << ',' << format_double(rec.entropy_nats) << '\n';
    }

    const std::string agg_path = (fs::path(out_dir) / "aggregate.csv").string();
    {
        std::ofstream os(agg_path, std::ios::binary);
        if (!os) throw Error("run_study: cannot write " + agg_path);
        os << "study,policy,experiment,n,mean_hamming,se_hamming,mean_tpr,se_tpr,"
              "mean_entropy,se_entropy,degenerate\n";
        for (std::size_t p = 0; p < policies.size(); ++p) {
            std::vector<ExperimentLog> logs = result.logs[p];
            // stop rules can truncate individual runs; aggregate what aligns
            std::size_t min_T = logs.front().records.size();
            for (const auto& log : logs) min_T = std::min(min_T, log.records.size());
            bool truncated = false;
            for (auto& log : logs)
                if (log.records.size() > min_T) {
                    log.records.resize(min_T);
                    truncated = true;
                }
            if (truncated)
                std::cerr << "note: policy " << cfg.policies[p]
                          << " has early-stopped runs; aggregating the first " << min_T
                          << " experiments\n";
            for (const auto& row : aggregate(logs))
                os << cfg.name << ',' << cfg.policies[p] << ',' << row.experiment << ',' << row.n
                   << ',' << format_double(row.mean_hamming) << ',' << format_double(row.se_hamming)
                   << ',' << format_double(row.mean_tpr) << ',' << format_double(row.se_tpr) << ','
                   << format_double(row.mean_entropy) << ',' << format_double(row.se_entropy) << ','
                   << (row.degenerate ? 1 : 0) << '\n';
        }
    }

    for (std::size_t p = 0; p < policies.size(); ++p)
        for (int s = 0; s < cfg.n_sim; ++s) {
            const auto name = detail::sanitize_label(cfg.policies[p]) + "_sim" + std::to_string(s) +
                              ".json";
            std::ofstream os((fs::path(out_dir) / "logs" / name).string(), std::ios::binary);
            if (!os) throw Error("run_study: cannot write log " + name);
            os << experiment_log_to_json(result.logs[p][static_cast<std::size_t>(s)]).dump(2)
               << '\n';
        }

    result.metrics_csv_path = metrics_path;
    result.aggregate_csv_path = agg_path;
    return result;
}

}  // namespace causal_oed
