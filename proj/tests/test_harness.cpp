#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <lazysp/constructions.hpp>
#include <lazysp/harness.hpp>
#include <lazysp/multigraph.hpp>
#include <lazysp/oracle.hpp>
#include <lazysp/rng.hpp>

#include "fig1.hpp"

using namespace lazysp;

namespace {

std::filesystem::path scratch_dir() {
    auto dir = std::filesystem::temp_directory_path() / "lazysp_harness_test";
    std::filesystem::create_directories(dir);
    return dir;
}

bool fragment_has_path(const Multigraph& frag, const Subgraph& sub) {
    return bfs_reachable(frag, [&](int e) { return sub.has(e); });
}

TrialRecord record(int trial, int cost, int yes, int path_length, bool checked, bool ok) {
    TrialRecord r;
    r.trial = trial;
    r.cost = cost;
    r.yes = yes;
    r.path_length = path_length;
    r.verify_checked = checked;
    r.verify_ok = ok;
    return r;
}

} // namespace

TEST_CASE("closed forms match their definitions") {
    SECTION("staged parallel structure path probability") {
        // ell_prime stages must all have a present edge.
        CHECK(b_path_probability(0.25, 2, 3) == Catch::Approx(0.823974609375).margin(1e-15));
        CHECK(b_path_probability(0.3, 1, 1) == Catch::Approx(0.7).margin(1e-15));
        CHECK(b_path_probability(0.25, 2, 0) == 1.0);
        // More stages can only hurt.
        CHECK(b_path_probability(0.1, 2, 8) < b_path_probability(0.1, 2, 4));
        // Reference constants: about 0.6165, the near-balanced coin the
        // common-case analysis leans on.
        double q = b_path_probability(0.01, 2, 4836);
        CHECK(q > 0.6165);
        CHECK(q < 0.6166);
        CHECK_THROWS_AS(b_path_probability(-0.1, 2, 3), std::invalid_argument);
        CHECK_THROWS_AS(b_path_probability(0.5, 0, 3), std::invalid_argument);
    }

    SECTION("string bundle no-path probability") {
        APathProbability tiny = a_no_path_probability_bound(0.25, 2, 3);
        CHECK(tiny.exact == Catch::Approx(0.665771484375).margin(1e-15));
        CHECK(tiny.union_bound == Catch::Approx(2.0 * 0.421875).margin(1e-15));
        CHECK(tiny.exact <= tiny.union_bound);

        // Reference constants: some string survives with probability under
        // one in a thousand.
        APathProbability ref = a_no_path_probability_bound(0.01, 10000, 1612);
        CHECK(ref.union_bound <= 1e-3);
        CHECK(ref.union_bound > 9.0e-4);
        CHECK(ref.union_bound < 9.4e-4);
        CHECK(ref.exact <= ref.union_bound);
        CHECK(ref.exact > 0.0);
        CHECK_THROWS_AS(a_no_path_probability_bound(0.01, 0, 5), std::invalid_argument);
        CHECK_THROWS_AS(a_no_path_probability_bound(0.01, 5, 0), std::invalid_argument);
    }

    SECTION("expected scan cost of an invalidated string") {
        // One edge: the scan pays exactly the falsifying query.
        CHECK(string_invalidation_expectation(0.25, 1) == Catch::Approx(0.25).margin(1e-15));
        // Independent route: sum the truncated geometric directly.
        for (double eps : {0.5, 0.25, 0.03}) {
            for (int ell : {1, 2, 4, 9, 40}) {
                double direct = 0.0;
                for (int k = 1; k <= ell; ++k)
                    direct += k * std::pow(1.0 - eps, k - 1) * eps;
                CHECK(string_invalidation_expectation(eps, ell) ==
                      Catch::Approx(direct).margin(1e-12));
            }
        }
        // Reference constants: within 2e-4 of the 1/eps ceiling.
        double ref = string_invalidation_expectation(0.01, 1612);
        CHECK(ref >= 99.9998);
        CHECK(ref < 100.0);
        CHECK_THROWS_AS(string_invalidation_expectation(0.0, 5), std::invalid_argument);
        CHECK_THROWS_AS(string_invalidation_expectation(0.5, 0), std::invalid_argument);
    }
}

TEST_CASE("closed forms agree with fragment monte carlo") {
    const double eps = 0.25;
    const double present = 1.0 - eps;
    const int trials = 4000;

    SECTION("staged parallel fragment") {
        Multigraph frag = structure_b_fragment(2, 3);
        double want = b_path_probability(eps, 2, 3);
        int hits = 0;
        for (int t = 0; t < trials; ++t) {
            Subgraph sub = BernoulliOracle(frag.edge_count(), present,
                                           prf_u64(0xabc1, t)).realize();
            if (fragment_has_path(frag, sub)) ++hits;
        }
        double got = static_cast<double>(hits) / trials;
        CHECK(got == Catch::Approx(want).margin(4.0 * std::sqrt(want * (1 - want) / trials)));
    }

    SECTION("string bundle fragment") {
        Multigraph frag = structure_a_fragment(2, 3);
        double want = a_no_path_probability_bound(eps, 2, 3).exact;
        int hits = 0;
        for (int t = 0; t < trials; ++t) {
            Subgraph sub = BernoulliOracle(frag.edge_count(), present,
                                           prf_u64(0xabc2, t)).realize();
            if (fragment_has_path(frag, sub)) ++hits;
        }
        double got = static_cast<double>(hits) / trials;
        CHECK(got == Catch::Approx(want).margin(4.0 * std::sqrt(want * (1 - want) / trials)));
    }

    SECTION("forward string scan") {
        const int ell = 4;
        double want = string_invalidation_expectation(eps, ell);
        CHECK(want == Catch::Approx(1.46875).margin(1e-15));
        Rng rng(0xabc3);
        double sum = 0.0;
        const int scans = 20000;
        for (int t = 0; t < scans; ++t) {
            for (int k = 1; k <= ell; ++k) {
                bool present_edge = rng.next_bernoulli(present);
                if (!present_edge) {
                    sum += k; // scan stopped by the absent edge
                    break;
                }
            }
            // A fully present string contributes nothing to this expectation.
        }
        double got = sum / scans;
        CHECK(got == Catch::Approx(want).margin(0.05));
    }
}

TEST_CASE("accounting ledger reproduces the frozen reference numbers") {
    AccountingLedger l = theorem2_accounting();

    CHECK(l.params.ell == 1612);
    CHECK(l.params.ell_prime == 4836);
    CHECK(l.b_verification_queries == 19344.0);
    CHECK(l.case1_expected_queries == Catch::Approx(145080.0).margin(1e-9));
    CHECK(l.b_path_prob == Catch::Approx(0.61655).margin(5e-5));
    CHECK(l.case2_probability >= 0.4714);
    CHECK(l.case2_probability <= 0.4715);
    CHECK(l.per_string_bound == Catch::Approx(99.9998).margin(1e-12));
    CHECK(l.per_structure_bound == Catch::Approx(999998.0).margin(1e-6));
    CHECK(l.case2_savings == Catch::Approx(0.5 * 0.471 * 999998.0).margin(1e-6));
    CHECK(l.case2_savings >= l.case2_savings_bound);
    CHECK(l.net_bound == Catch::Approx(-69000.0).margin(1e-9));
    CHECK(l.net_exact > -71290.0);
    CHECK(l.net_exact < -71280.0);
    CHECK(l.checks_pass);

    // A smaller bundle count weakens the common case below its bound.
    AccountingLedger weak = theorem2_accounting(GadgetParams{100, 2, 0.01, 0.001, 0, 0});
    CHECK(weak.case2_probability < weak.case2_probability_bound);
    CHECK_FALSE(weak.checks_pass);
}

TEST_CASE("parallel trial loops hit every index exactly once") {
    for (int count : {0, 1, 7, 16}) {
        for (int workers : {1, 2, 5, 32}) {
            std::vector<int> hits(count, 0);
            parallel_for(count, workers, [&](int i) { ++hits[i]; });
            for (int i = 0; i < count; ++i) REQUIRE(hits[i] == 1);
        }
    }
}

TEST_CASE("summaries report exact order statistics") {
    std::vector<TrialRecord> records;
    records.push_back(record(0, 5, 1, 2, true, true));
    records.push_back(record(1, 3, 2, -1, true, false));
    records.push_back(record(2, 9, 3, 4, false, true));
    records.push_back(record(3, 3, 4, -1, true, true));
    records.push_back(record(4, 7, 5, 3, false, true));

    CostSummary s = summarize(records, {4.0, 7.0});
    CHECK(s.trials == 5);
    CHECK(s.mean == Catch::Approx(5.4).margin(1e-12));
    CHECK(s.stddev == Catch::Approx(std::sqrt(6.8)).margin(1e-12));
    CHECK(s.min == 3);
    CHECK(s.max == 9);
    CHECK(s.q50 == 5);
    CHECK(s.q90 == 9);
    CHECK(s.q99 == 9);
    CHECK(s.yes_mean == Catch::Approx(3.0).margin(1e-12));
    CHECK(s.no_path_count == 2);
    REQUIRE(s.threshold_probs.size() == 2);
    CHECK(s.threshold_probs[0].first == 4.0);
    CHECK(s.threshold_probs[0].second == Catch::Approx(0.4).margin(1e-12));
    CHECK(s.threshold_probs[1].second == Catch::Approx(0.8).margin(1e-12));
    CHECK(s.verify_checked == 3);
    CHECK(s.verify_failures == 1);
    CHECK(s.cost_histogram == (std::map<int, int>{{3, 2}, {5, 1}, {7, 1}, {9, 1}}));

    CostSummary single = summarize({record(0, 6, 0, 1, false, true)}, {});
    CHECK(single.q50 == 6);
    CHECK(single.q99 == 6);
    CHECK(single.stddev == 0.0);

    CHECK(summarize({}, {}).trials == 0);
}

TEST_CASE("experiment configs round trip through json") {
    nlohmann::json j = {
        {"name", "demo"},
        {"graph", {{"generator", "chain"}, {"n", 8}, {"p", 0.5}}},
        {"algorithm", "lazysp"},
        {"selector", "bisection"},
        {"p", 0.7},
        {"edge_probs", {0.5, 0.25}},
        {"trials", 42},
        {"seed", 99},
        {"thresholds", {10.0, 20.0}},
        {"verify_fraction", 0.25},
        {"workers", 3},
        {"per_trial_graph", true},
        {"witness_dir", "/tmp/w"},
        {"witness_limit", 2},
    };
    ExperimentConfig cfg = experiment_config_from_json(j);
    CHECK(cfg.name == "demo");
    CHECK(cfg.graph.at("generator") == "chain");
    CHECK(cfg.selector == "bisection");
    CHECK(cfg.p == 0.7);
    CHECK(cfg.edge_probs == (std::vector<double>{0.5, 0.25}));
    CHECK(cfg.trials == 42);
    CHECK(cfg.seed == 99);
    CHECK(cfg.thresholds == (std::vector<double>{10.0, 20.0}));
    CHECK(cfg.verify_fraction == 0.25);
    CHECK(cfg.workers == 3);
    CHECK(cfg.per_trial_graph);
    CHECK(cfg.witness_dir == "/tmp/w");
    CHECK(cfg.witness_limit == 2);

    ExperimentConfig defaults = experiment_config_from_json(nlohmann::json::object());
    CHECK(defaults.name == "experiment");
    CHECK(defaults.algorithm == "lazysp");
    CHECK(defaults.selector == "forward");
    CHECK(defaults.p == 0.5);
    CHECK(defaults.trials == 100);
    CHECK(defaults.seed == 1);
    CHECK(defaults.verify_fraction == 1.0);
    CHECK(defaults.workers == 1);
    CHECK_FALSE(defaults.per_trial_graph);

    auto path = (scratch_dir() / "config.json").string();
    write_text_file(path, j.dump());
    CHECK(load_experiment_config(path).name == "demo");
    CHECK_THROWS_AS(load_experiment_config((scratch_dir() / "missing.json").string()),
                    std::runtime_error);
}

TEST_CASE("graph specs resolve to files and generators") {
    auto dir = scratch_dir();

    SECTION("plain graph file") {
        Multigraph g = fixture::fig1_graph();
        auto path = (dir / "fig1.graph.json").string();
        save_graph(g, path);
        ResolvedInstance inst = resolve_graph_spec({{"file", path}});
        REQUIRE(inst.graph);
        CHECK_FALSE(inst.gadget);
        CHECK(inst.graph->edge_count() == g.edge_count());
        CHECK(inst.graph->vertex_count() == g.vertex_count());
    }

    SECTION("annotated gadget file") {
        AnnotatedGadget gadget = theorem2_gadget(GadgetParams{1, 2, 0.25, 0.5, 1, 3});
        auto path = (dir / "mini.gadget.json").string();
        save_gadget(gadget, path);
        ResolvedInstance inst = resolve_graph_spec({{"file", path}});
        REQUIRE(inst.gadget);
        CHECK(inst.graph.get() == &inst.gadget->graph);
        CHECK(inst.graph->edge_count() == gadget.graph.edge_count());
        CHECK(inst.gadget->params.ell == 1);
    }

    SECTION("generators") {
        ResolvedInstance chain = resolve_graph_spec({{"generator", "chain"}, {"n", 6}, {"p", 0.5}});
        CHECK(chain.graph->edge_count() == lower_bound_chain(6, 0.5).edge_count());

        ResolvedInstance random = resolve_graph_spec(
            {{"generator", "random"}, {"n", 9}, {"edge_factor", 1}, {"seed", 5}});
        CHECK(random.graph->edge_count() == random_multigraph(9, 1, 5).edge_count());

        ResolvedInstance gadget = resolve_graph_spec(
            {{"generator", "gadget"}, {"kappa", 1}, {"kappa_prime", 2},
             {"epsilon", 0.25}, {"delta", 0.5}, {"ell", 1}, {"ell_prime", 3}});
        REQUIRE(gadget.gadget);
        CHECK(gadget.graph->edge_count() == 15);
    }

    SECTION("errors") {
        CHECK_THROWS_AS(resolve_graph_spec(nlohmann::json::array()), std::invalid_argument);
        CHECK_THROWS_AS(resolve_graph_spec({{"generator", "bogus"}}), std::invalid_argument);
        CHECK_THROWS_AS(resolve_graph_spec({{"file", (dir / "nope.json").string()}}),
                        std::runtime_error);
    }
}

TEST_CASE("experiments run every algorithm and capture witnesses") {
    ExperimentConfig base;
    base.graph = {{"generator", "chain"}, {"n", 8}, {"p", 0.5}};
    base.p = 0.5;
    base.trials = 60;
    base.seed = 21;
    base.thresholds = {30.0};
    base.verify_fraction = 1.0;

    SECTION("lazy loop against the omniscient floor") {
        // Small chain: the omniscient baseline enumerates every simple path
        // when a realization disconnects, which grows as width^stages.
        ExperimentConfig small = base;
        small.graph = {{"generator", "chain"}, {"n", 6}, {"p", 0.5}};
        ExperimentReport lazy = run_experiment(small);
        CHECK(lazy.summary.trials == 60);
        CHECK(lazy.summary.verify_checked == 60);
        CHECK(lazy.summary.verify_failures == 0);
        CHECK(lazy.summary.mean >= 1.0);
        REQUIRE(lazy.summary.threshold_probs.size() == 1);

        ExperimentConfig omn = small;
        omn.algorithm = "omniscient";
        ExperimentReport floor = run_experiment(omn);
        CHECK(floor.summary.verify_failures == 0);
        // Same seed, same realizations: the omniscient schedule is a paired
        // per-trial lower bound.
        CHECK(floor.summary.mean <= lazy.summary.mean);
    }

    SECTION("solved policy on a stored graph") {
        auto path = (scratch_dir() / "parallel2.graph.json").string();
        save_graph(build_graph(2, {{0, 1}, {0, 1}}, 0, 1), path);
        ExperimentConfig cfg = base;
        cfg.graph = {{"file", path}};
        cfg.algorithm = "mdp";
        cfg.trials = 200;
        ExperimentReport report = run_experiment(cfg);
        CHECK(report.summary.verify_failures == 0);
        // Optimal expectation is 1.5; allow generous sampling noise.
        CHECK(report.summary.mean > 1.3);
        CHECK(report.summary.mean < 1.7);
    }

    SECTION("staged algorithm needs a gadget") {
        ExperimentConfig cfg = base;
        cfg.graph = {{"generator", "gadget"}, {"kappa", 1}, {"kappa_prime", 2},
                     {"epsilon", 0.25}, {"delta", 0.5}, {"ell", 1}, {"ell_prime", 3}};
        cfg.algorithm = "alg_theorem2";
        cfg.p = 0.75;
        ExperimentReport report = run_experiment(cfg);
        CHECK(report.summary.verify_failures == 0);
        // The staged opening always pays for every parallel-stage edge.
        CHECK(report.summary.min >= 12);

        ExperimentConfig bad = base;
        bad.algorithm = "alg_theorem2";
        CHECK_THROWS_AS(run_experiment(bad), std::invalid_argument);
    }

    SECTION("witness capture") {
        auto dir = scratch_dir() / "witness";
        std::filesystem::create_directories(dir);
        ExperimentConfig cfg = base;
        cfg.trials = 5;
        cfg.witness_dir = dir.string();
        cfg.witness_limit = 3;
        run_experiment(cfg);
        for (int t = 0; t < 3; ++t) {
            auto stem = dir / ("trial" + std::to_string(t));
            REQUIRE(std::filesystem::exists(stem.string() + ".subgraph.json"));
            REQUIRE(std::filesystem::exists(stem.string() + ".trace.csv"));
        }
        CHECK_FALSE(std::filesystem::exists((dir / "trial3.subgraph.json")));

        // Witness pair is internally consistent: answers match the subgraph.
        Subgraph sub = load_subgraph((dir / "trial0.subgraph.json").string());
        OracleTrace trace = load_trace_csv((dir / "trial0.trace.csv").string());
        CHECK(!trace.empty());
        for (const TraceEntry& entry : trace) CHECK(entry.answer == sub.has(entry.edge));
    }

    SECTION("per trial graphs") {
        ExperimentConfig cfg = base;
        cfg.graph = {{"generator", "random"}, {"n", 7}, {"edge_factor", 1}};
        cfg.per_trial_graph = true;
        cfg.trials = 40;
        ExperimentReport report = run_experiment(cfg);
        CHECK(report.summary.trials == 40);
        CHECK(report.summary.verify_failures == 0);

        ExperimentConfig bad = base;
        bad.per_trial_graph = true; // chain generator cannot vary per trial
        CHECK_THROWS_AS(run_experiment(bad), std::invalid_argument);
    }

    SECTION("input validation") {
        ExperimentConfig bad = base;
        bad.algorithm = "unknown";
        CHECK_THROWS_AS(run_experiment(bad), std::invalid_argument);

        bad = base;
        bad.trials = 0;
        CHECK_THROWS_AS(run_experiment(bad), std::invalid_argument);

        bad = base;
        bad.edge_probs = {0.5, 0.5, 0.5}; // wrong length for the chain
        CHECK_THROWS_AS(run_experiment(bad), std::invalid_argument);
    }
}

TEST_CASE("experiment reports are identical across worker counts") {
    ExperimentConfig cfg;
    cfg.graph = {{"generator", "chain"}, {"n", 8}, {"p", 0.5}};
    cfg.p = 0.5;
    cfg.trials = 60;
    cfg.seed = 33;
    cfg.thresholds = {25.0};
    cfg.verify_fraction = 0.5;

    cfg.workers = 1;
    ExperimentReport serial = run_experiment(cfg);
    cfg.workers = 4;
    ExperimentReport threaded = run_experiment(cfg);
    CHECK(report_to_json(serial).dump() == report_to_json(threaded).dump());
    CHECK(report_to_csv(serial) == report_to_csv(threaded));

    GadgetParams mini{1, 2, 0.25, 0.5, 1, 3};
    GadgetReport g1 = gadget_comparison(mini, GadgetMode::montecarlo, 60, 17, 1);
    GadgetReport g3 = gadget_comparison(mini, GadgetMode::montecarlo, 60, 17, 3);
    CHECK(gadget_report_to_json(g1).dump() == gadget_report_to_json(g3).dump());

    SweepConfig sweep;
    sweep.ns = {6};
    sweep.ps = {0.5};
    sweep.trials = 40;
    sweep.seed = 5;
    sweep.families = {"random"};
    sweep.workers = 1;
    SweepReport s1 = theorem3_sweep(sweep);
    sweep.workers = 4;
    SweepReport s4 = theorem3_sweep(sweep);
    CHECK(sweep_to_json(s1).dump() == sweep_to_json(s4).dump());
    CHECK(sweep_to_csv(s1) == sweep_to_csv(s4));
}

TEST_CASE("query sweep stays within the termination bound") {
    // Both branches of the threshold formula.
    CHECK(theorem3_threshold(16, 0.5, 0.05) == 64.0);
    CHECK(theorem3_threshold(8, 0.5, 0.05) == Catch::Approx(47.9317163).margin(1e-5));

    SweepConfig cfg;
    cfg.ns = {8, 16};
    cfg.ps = {0.5};
    cfg.trials = 150;
    cfg.seed = 7;
    cfg.families = {"random", "chain"};
    cfg.selector = "forward";
    SweepReport report = theorem3_sweep(cfg);

    REQUIRE(report.rows.size() == 4);
    for (const SweepRow& row : report.rows) {
        CHECK(row.trials == 150);
        CHECK(row.threshold == theorem3_threshold(row.n, row.p, cfg.delta));
        CHECK(row.connective_violations == 0);
        CHECK(row.yes_bound_violations == 0);
        CHECK(row.verify_failures == 0);
        CHECK_FALSE(row.flagged);
        CHECK(row.exceed_rate <= cfg.delta + 3.0 * row.sigma);
        CHECK(row.mean_cost > 0.0);
        CHECK(row.ratio_q50 <= row.ratio_q90);
    }
}

TEST_CASE("gadget comparison pairs algorithms on shared realizations") {
    GadgetParams mini{1, 2, 0.25, 0.5, 1, 3};
    GadgetReport report = gadget_comparison(mini, GadgetMode::montecarlo, 300, 29);

    CHECK(report.mode == "montecarlo");
    CHECK(report.trials == 300);
    REQUIRE(report.algos.size() == 4);
    CHECK(report.algos[0].name == "alg_theorem2");
    CHECK(report.algos[1].name == "lazysp_forward");
    CHECK(report.algos[2].name == "lazysp_backward");
    CHECK(report.algos[3].name == "lazysp_bisection");
    for (const GadgetAlgoSummary& a : report.algos) {
        CHECK(a.summary.trials == 300);
        CHECK(a.summary.verify_checked == 300);
        CHECK(a.summary.verify_failures == 0);
    }
    // The staged opening pays for all twelve parallel-stage edges up front.
    CHECK(report.algos[0].summary.min >= 12);

    CHECK(report.case_counts[0] + report.case_counts[1] + report.case_counts[2] == 300);
    CHECK(report.case_freqs[0] + report.case_freqs[1] + report.case_freqs[2] ==
          Catch::Approx(1.0).margin(1e-12));
    // With one short string per bundle, some bundle is almost always alive.
    CHECK(report.case_counts[0] > 250);

    GadgetReport ledger = gadget_comparison(GadgetParams::full_scale(), GadgetMode::accounting, 0, 0);
    CHECK(ledger.mode == "accounting");
    CHECK(ledger.algos.empty());
    CHECK(ledger.ledger.checks_pass);
}

TEST_CASE("case classification matches arc reachability") {
    AnnotatedGadget gadget = theorem2_gadget(GadgetParams{1, 2, 0.25, 0.5, 1, 3});
    double p = gadget.edge_probability;
    int seen[3] = {0, 0, 0};
    for (int t = 0; t < 400; ++t) {
        Subgraph sub = BernoulliOracle(gadget.graph.edge_count(), p, prf_u64(0xcafe, t)).realize();
        bool sa = arc_has_path(gadget.arcs.at("sa"), sub);
        bool ab = arc_has_path(gadget.arcs.at("ab"), sub);
        bool bt = arc_has_path(gadget.arcs.at("bt"), sub);
        bool sb = arc_has_path(gadget.arcs.at("sb"), sub);
        bool at = arc_has_path(gadget.arcs.at("at"), sub);
        int want = (sa || ab || bt) ? 1 : (sb != at ? 2 : 3);
        int got = classify_gadget_case(gadget, sub);
        REQUIRE(got == want);
        ++seen[got - 1];
    }
    CHECK(seen[0] > 0);
}

TEST_CASE("parallel chain experiment separates the selectors") {
    ChainReport report = chain_experiment(40, 0.5, 400, 11);

    CHECK(report.n == 40);
    CHECK(report.m_threshold == 39);
    CHECK(report.trials == 400);
    CHECK(report.chernoff_bound == Catch::Approx(0.00150344).margin(1e-6));
    REQUIRE(report.rows.size() == 3);
    CHECK(report.rows[0].selector == "forward");
    CHECK(report.rows[1].selector == "backward");
    CHECK(report.rows[2].selector == "bisection");
    for (const ChainReport::Row& row : report.rows) {
        CHECK(row.verify_failures == 0);
        CHECK_FALSE(row.flagged);
        CHECK(row.prob_le_m <= 0.05);
        CHECK(row.mean_cost > static_cast<double>(report.m_threshold));
    }
}

TEST_CASE("reports serialize deterministically") {
    CHECK(fmt_double(0.5) == "0.5");
    CHECK(fmt_double(1000000.0) == "1000000");
    for (double x : {0.1 + 0.2, 1.0 / 3.0, 9.20324e-4, -71283.7}) {
        CHECK(std::stod(fmt_double(x)) == x);
    }

    ExperimentConfig cfg;
    cfg.name = "serialize";
    cfg.graph = {{"generator", "chain"}, {"n", 6}, {"p", 0.5}};
    cfg.trials = 20;
    cfg.seed = 3;
    cfg.thresholds = {15.0};
    ExperimentReport report = run_experiment(cfg);

    nlohmann::json j = report_to_json(report);
    CHECK(j.at("name") == "serialize");
    CHECK(j.at("summary").contains("cost_histogram"));
    CHECK(j.at("summary").at("trials") == 20);

    std::string csv = report_to_csv(report);
    CHECK(csv.rfind("name,algorithm,selector,", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
    CHECK(csv.find("serialize") != std::string::npos);

    AccountingLedger ledger = theorem2_accounting();
    nlohmann::json lj = ledger_to_json(ledger);
    CHECK(lj.at("checks_pass") == true);
    CHECK(lj.at("net_bound") == -69000.0);

    ChainReport chain = chain_experiment(6, 0.5, 30, 2);
    std::string chain_csv = chain_report_to_csv(chain);
    CHECK(std::count(chain_csv.begin(), chain_csv.end(), '\n') == 4);
    CHECK(chain_report_to_json(chain).at("rows").size() == 3);

    auto dir = scratch_dir();
    auto json_path = (dir / "report.json").string();
    auto csv_path = (dir / "report.csv").string();
    emit_report(report_to_json(report), report_to_csv(report), "json", json_path);
    emit_report(report_to_json(report), report_to_csv(report), "csv", csv_path);
    CHECK(nlohmann::json::parse(std::ifstream(json_path)).at("name") == "serialize");
    std::ifstream csv_in(csv_path);
    std::string first_line;
    std::getline(csv_in, first_line);
    CHECK(first_line.rfind("name,algorithm", 0) == 0);
    // Reports without a tabular form fall back to json bytes.
    auto fallback_path = (dir / "fallback.csv").string();
    emit_report(report_to_json(report), "", "csv", fallback_path);
    CHECK(nlohmann::json::parse(std::ifstream(fallback_path)).at("name") == "serialize");
    CHECK_THROWS_AS(emit_report(report_to_json(report), "", "yaml", json_path),
                    std::invalid_argument);
}
