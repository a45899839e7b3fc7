// Command-line laboratory: generate graphs, run seeded experiments, sweep the
// query-complexity bound, compare algorithms on the gadget family, replay and
// certify traces, and solve small instances exactly.
//
// Exit codes: 0 success, 1 certification/verification failure, 2 usage error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lazysp/harness.hpp"

namespace {

using namespace lazysp;

int certify_files(const std::string& graph_path, const std::string& subgraph_path,
                  const std::string& trace_path) {
    Multigraph g = [&]() {
        std::ifstream in(graph_path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open graph file: " + graph_path);
        nlohmann::json j;
        in >> j;
        if (j.contains("arcs")) return gadget_from_json(j).graph;
        return graph_from_json(j);
    }();
    Subgraph sub = load_subgraph(subgraph_path);
    OracleTrace trace = load_trace_csv(trace_path);
    if (sub.edge_count() != g.edge_count()) {
        std::cerr << "certify: subgraph edge count mismatch\n";
        return 1;
    }

    QueryState state(g);
    for (const TraceEntry& entry : trace) {
        if (entry.edge < 0 || entry.edge >= g.edge_count()) {
            std::cerr << "certify: trace references edge " << entry.edge
                      << " outside the graph\n";
            return 1;
        }
        if (state.is_queried(entry.edge)) {
            std::cerr << "certify: edge " << entry.edge << " queried twice\n";
            return 1;
        }
        if (entry.answer != sub.has(entry.edge)) {
            std::cerr << "certify: answer for edge " << entry.edge
                      << " contradicts the subgraph\n";
            return 1;
        }
        state.apply(entry.edge, entry.answer);
    }

    std::optional<Path> candidate = shortest_candidate_path(g, state);
    if (candidate && unverified_count(*candidate, &state) > 0) {
        std::cerr << "certify: trace stops before certifying an outcome\n";
        return 1;
    }
    RunResult result{candidate, trace, state};
    if (!verify_termination(g, result, sub)) {
        std::cerr << "certify: termination certificate rejected\n";
        return 1;
    }
    if (candidate)
        std::cout << "certified: path of length " << candidate->length() << " after "
                  << trace.size() << " queries\n";
    else
        std::cout << "certified: no-path certificate after " << trace.size() << " queries\n";
    return 0;
}

std::string hex_u32(std::uint32_t x) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "0x%08x", x);
    return buf;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"lazy shortest-path search laboratory"};
    app.require_subcommand(1);
    int exit_code = 0;

    // generate ---------------------------------------------------------------
    auto* gen = app.add_subcommand("generate", "write a graph (or gadget) JSON file");
    std::string gen_type, gen_out;
    int gen_n = 16, gen_edge_factor = 2;
    double gen_p = 0.5;
    std::uint64_t gen_seed = 1;
    GadgetParams gen_params{2, 2, 0.01, 0.001, 0, 0};
    gen->add_option("--type", gen_type, "gadget|chain|random")
        ->required()
        ->check(CLI::IsMember({"gadget", "chain", "random"}));
    gen->add_option("--out", gen_out, "output path")->required();
    gen->add_option("--n", gen_n, "vertex count (chain/random)");
    gen->add_option("--p", gen_p, "edge probability the chain is sized for");
    gen->add_option("--edge-factor", gen_edge_factor, "extra edges per vertex (random)");
    gen->add_option("--seed", gen_seed, "generator seed (random)");
    gen->add_option("--kappa", gen_params.kappa, "A-structure string count");
    gen->add_option("--kappa-prime", gen_params.kappa_prime, "B-structure stage width");
    gen->add_option("--epsilon", gen_params.epsilon, "edge absence probability");
    gen->add_option("--delta", gen_params.delta, "failure budget used to derive ell");
    gen->add_option("--ell", gen_params.ell, "A string length (0 = derive)");
    gen->add_option("--ell-prime", gen_params.ell_prime, "B stage count (0 = derive)");
    gen->callback([&]() {
        if (gen_type == "chain")
            save_graph(lower_bound_chain(gen_n, gen_p), gen_out);
        else if (gen_type == "random")
            save_graph(random_multigraph(gen_n, gen_edge_factor, gen_seed), gen_out);
        else
            save_gadget(theorem2_gadget(gen_params), gen_out);
        std::cout << "wrote " << gen_out << "\n";
    });

    // run ---------------------------------------------------------------------
    auto* run = app.add_subcommand("run", "run a seeded experiment");
    std::string run_config, run_graph, run_out, run_format = "json";
    ExperimentConfig flags;
    run->add_option("--config", run_config, "experiment config JSON");
    run->add_option("--graph", run_graph, "graph JSON file (overrides config graph)");
    auto* o_alg = run->add_option("--algorithm", flags.algorithm,
                                  "lazysp|alg_theorem2|omniscient|mdp");
    auto* o_sel = run->add_option("--selector", flags.selector, "forward|backward|bisection");
    auto* o_p = run->add_option("--p", flags.p, "edge presence probability");
    auto* o_trials = run->add_option("--trials", flags.trials, "trial count");
    auto* o_seed = run->add_option("--seed", flags.seed, "base seed");
    auto* o_verify = run->add_option("--verify-fraction", flags.verify_fraction,
                                     "fraction of trials certified against the realization");
    auto* o_workers = run->add_option("--workers", flags.workers, "worker threads");
    auto* o_witness = run->add_option("--witness-dir", flags.witness_dir,
                                      "dump per-trial subgraph + trace here");
    auto* o_thresholds =
        run->add_option("--threshold", flags.thresholds, "report Pr[cost <= t]");
    run->add_option("--out", run_out, "report path");
    run->add_option("--format", run_format)->check(CLI::IsMember({"json", "csv"}));
    run->callback([&]() {
        ExperimentConfig cfg;
        if (!run_config.empty()) cfg = load_experiment_config(run_config);
        if (!run_graph.empty()) cfg.graph = nlohmann::json{{"file", run_graph}};
        if (*o_alg) cfg.algorithm = flags.algorithm;
        if (*o_sel) cfg.selector = flags.selector;
        if (*o_p) cfg.p = flags.p;
        if (*o_trials) cfg.trials = flags.trials;
        if (*o_seed) cfg.seed = flags.seed;
        if (*o_verify) cfg.verify_fraction = flags.verify_fraction;
        if (*o_workers) cfg.workers = flags.workers;
        if (*o_witness) cfg.witness_dir = flags.witness_dir;
        if (*o_thresholds) cfg.thresholds = flags.thresholds;
        if (cfg.graph.is_null())
            throw CLI::ValidationError("run", "need --graph or a config with a graph spec");
        if (!cfg.witness_dir.empty())
            std::filesystem::create_directories(cfg.witness_dir);
        ExperimentReport report = run_experiment(cfg);
        std::cout << cfg.algorithm << " (" << cfg.selector << "): trials=" << report.summary.trials
                  << " mean_cost=" << report.summary.mean << " q90=" << report.summary.q90
                  << " verify_failures=" << report.summary.verify_failures << "\n";
        for (auto& [t, prob] : report.summary.threshold_probs)
            std::cout << "  Pr[cost <= " << t << "] = " << prob << "\n";
        if (!run_out.empty())
            emit_report(report_to_json(report), report_to_csv(report), run_format, run_out);
        if (report.summary.verify_failures > 0) exit_code = 1;
    });

    // sweep ---------------------------------------------------------------
    auto* sweep = app.add_subcommand("sweep", "query-complexity sweep over n, p, family");
    SweepConfig sweep_cfg;
    std::string sweep_out, sweep_format = "json";
    sweep->add_option("--n", sweep_cfg.ns, "vertex counts");
    sweep->add_option("--p", sweep_cfg.ps, "edge probabilities");
    sweep->add_option("--family", sweep_cfg.families, "random|chain");
    sweep->add_option("--delta", sweep_cfg.delta, "failure budget");
    sweep->add_option("--trials", sweep_cfg.trials, "trials per cell");
    sweep->add_option("--seed", sweep_cfg.seed, "base seed");
    sweep->add_option("--edge-factor", sweep_cfg.edge_factor);
    sweep->add_option("--selector", sweep_cfg.selector)
        ->check(CLI::IsMember({"forward", "backward", "bisection"}));
    sweep->add_option("--workers", sweep_cfg.workers);
    sweep->add_option("--verify-fraction", sweep_cfg.verify_fraction);
    sweep->add_option("--out", sweep_out, "report path");
    sweep->add_option("--format", sweep_format)->check(CLI::IsMember({"json", "csv"}));
    sweep->callback([&]() {
        SweepReport report = theorem3_sweep(sweep_cfg);
        int flagged = 0, verify_failures = 0;
        for (const SweepRow& row : report.rows) {
            if (row.flagged) ++flagged;
            verify_failures += row.verify_failures + row.connective_violations +
                               row.yes_bound_violations;
            std::cout << row.family << " n=" << row.n << " p=" << row.p
                      << " threshold=" << row.threshold << " exceed=" << row.exceed_count << "/"
                      << row.trials << (row.flagged ? " FLAGGED" : "") << "\n";
        }
        if (!sweep_out.empty())
            emit_report(sweep_to_json(report), sweep_to_csv(report), sweep_format, sweep_out);
        if (flagged > 0 || verify_failures > 0) exit_code = 1;
    });

    // gadget ---------------------------------------------------------------
    auto* gadget = app.add_subcommand("gadget", "gadget comparison or accounting ledger");
    std::string gadget_mode = "accounting", gadget_out, gadget_format = "json";
    GadgetParams gadget_params = GadgetParams::full_scale();
    int gadget_trials = 200, gadget_workers = 1;
    std::uint64_t gadget_seed = 1;
    gadget->add_option("--mode", gadget_mode)->check(CLI::IsMember({"montecarlo", "accounting"}));
    gadget->add_option("--kappa", gadget_params.kappa);
    gadget->add_option("--kappa-prime", gadget_params.kappa_prime);
    gadget->add_option("--epsilon", gadget_params.epsilon);
    gadget->add_option("--delta", gadget_params.delta);
    auto* g_ell = gadget->add_option("--ell", gadget_params.ell, "A string length (0 = derive)");
    auto* g_ellp = gadget->add_option("--ell-prime", gadget_params.ell_prime);
    gadget->add_option("--trials", gadget_trials);
    gadget->add_option("--seed", gadget_seed);
    gadget->add_option("--workers", gadget_workers);
    gadget->add_option("--out", gadget_out, "report path");
    gadget->add_option("--format", gadget_format)->check(CLI::IsMember({"json", "csv"}));
    gadget->callback([&]() {
        if (!*g_ell) gadget_params.ell = 0;
        if (!*g_ellp) gadget_params.ell_prime = 0;
        GadgetMode mode =
            gadget_mode == "accounting" ? GadgetMode::accounting : GadgetMode::montecarlo;
        GadgetReport report =
            gadget_comparison(gadget_params, mode, gadget_trials, gadget_seed, gadget_workers);
        if (mode == GadgetMode::accounting) {
            const AccountingLedger& l = report.ledger;
            std::cout << "ell=" << l.params.ell << " ell_prime=" << l.params.ell_prime << "\n"
                      << "B verification: " << l.b_verification_queries
                      << " (bound " << l.b_verification_bound << ")\n"
                      << "case 1 expectation: " << l.case1_expected_queries << " (bound "
                      << l.case1_bound << ")\n"
                      << "case 2 probability: " << l.case2_probability << " (>= "
                      << l.case2_probability_bound << ")\n"
                      << "case 2 savings: " << l.case2_savings << " (>= "
                      << l.case2_savings_bound << ")\n"
                      << "net bound: " << l.net_bound << ", net exact: " << l.net_exact << "\n"
                      << (l.checks_pass ? "all checks pass" : "CHECKS FAILED") << "\n";
            if (!l.checks_pass) exit_code = 1;
        } else {
            int verify_failures = 0;
            for (const auto& a : report.algos) {
                verify_failures += a.summary.verify_failures;
                std::cout << a.name << ": mean_cost=" << a.summary.mean
                          << " q90=" << a.summary.q90 << "\n";
            }
            std::cout << "case frequencies:";
            for (int c = 0; c < 3; ++c)
                std::cout << " case" << c + 1 << "=" << report.case_freqs[c];
            std::cout << "\n";
            if (verify_failures > 0) exit_code = 1;
        }
        if (!gadget_out.empty())
            emit_report(gadget_report_to_json(report), "", gadget_format, gadget_out);
    });

    // chain ---------------------------------------------------------------
    auto* chain = app.add_subcommand("chain", "parallel-chain lower-bound experiment");
    int chain_n = 16, chain_trials = 1000, chain_workers = 1;
    double chain_p = 0.5, chain_verify = 1.0;
    std::uint64_t chain_seed = 1;
    std::string chain_out, chain_format = "json";
    chain->add_option("--n", chain_n);
    chain->add_option("--p", chain_p);
    chain->add_option("--trials", chain_trials);
    chain->add_option("--seed", chain_seed);
    chain->add_option("--workers", chain_workers);
    chain->add_option("--verify-fraction", chain_verify);
    chain->add_option("--out", chain_out, "report path");
    chain->add_option("--format", chain_format)->check(CLI::IsMember({"json", "csv"}));
    chain->callback([&]() {
        ChainReport report = chain_experiment(chain_n, chain_p, chain_trials, chain_seed,
                                              chain_workers, chain_verify);
        std::cout << "m=" << report.m_threshold << " chernoff_bound=" << report.chernoff_bound
                  << "\n";
        int bad = 0;
        for (const auto& row : report.rows) {
            bad += row.verify_failures + (row.flagged ? 1 : 0);
            std::cout << row.selector << ": Pr[cost <= m]=" << row.prob_le_m
                      << " mean_cost=" << row.mean_cost << (row.flagged ? " FLAGGED" : "")
                      << "\n";
        }
        if (!chain_out.empty())
            emit_report(chain_report_to_json(report), chain_report_to_csv(report), chain_format,
                        chain_out);
        if (bad > 0) exit_code = 1;
    });

    // certify ---------------------------------------------------------------
    auto* certify = app.add_subcommand("certify", "replay a trace and certify the outcome");
    std::string cert_graph, cert_subgraph, cert_trace;
    certify->add_option("--graph", cert_graph)->required();
    certify->add_option("--subgraph", cert_subgraph)->required();
    certify->add_option("--trace", cert_trace)->required();
    certify->callback([&]() { exit_code = certify_files(cert_graph, cert_subgraph, cert_trace); });

    // mdp ---------------------------------------------------------------
    auto* mdp = app.add_subcommand("mdp", "exact expected-cost optimum for a small graph");
    std::string mdp_graph, mdp_out;
    double mdp_p = 0.5;
    bool mdp_no_prune = false;
    int mdp_edge_cap = 15;
    mdp->add_option("--graph", mdp_graph)->required();
    mdp->add_option("--p", mdp_p);
    mdp->add_flag("--no-prune", mdp_no_prune, "consider off-path queries too");
    mdp->add_option("--edge-cap", mdp_edge_cap);
    mdp->add_option("--out", mdp_out, "policy JSON path");
    mdp->callback([&]() {
        Multigraph g = load_graph(mdp_graph);
        MdpOptions opt;
        opt.prune = !mdp_no_prune;
        opt.edge_cap = mdp_edge_cap;
        MdpResult result =
            mdp_optimal(g, std::vector<double>(g.edge_count(), mdp_p), opt);
        std::cout << "expected_cost=" << fmt_double(result.expected_cost)
                  << " states=" << result.policy.size() << "\n";
        if (!mdp_out.empty()) {
            std::vector<std::pair<std::uint64_t, int>> entries(result.policy.begin(),
                                                               result.policy.end());
            std::sort(entries.begin(), entries.end());
            nlohmann::json j;
            j["expected_cost"] = result.expected_cost;
            j["edge_count"] = result.edge_count;
            j["p"] = mdp_p;
            auto policy = nlohmann::json::array();
            for (auto& [key, edge] : entries)
                policy.push_back({{"yes", hex_u32(static_cast<std::uint32_t>(key))},
                                  {"no", hex_u32(static_cast<std::uint32_t>(key >> 32))},
                                  {"edge", edge}});
            j["policy"] = std::move(policy);
            write_text_file(mdp_out, j.dump(2) + "\n");
        }
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return exit_code;
}
