#pragma once

// Optimal baselines: the minimum query cover behind the omniscient schedule,
// the omniscient run itself (a per-instance lower-bound schedule that reads
// the realization directly, so it is not a query-model algorithm), the exact
// expectimax MDP over query states, and exhaustive expected-cost evaluation.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "multigraph.hpp"
#include "oracle.hpp"
#include "search.hpp"

namespace lazysp {

// ---------------------------------------------------------------------------
// Minimum cover: the smallest set of absent edges hitting every given path;
// among minimum covers, the lexicographically smallest edge-id set. Exact
// branch and bound (greedy upper bound, disjoint-set packing lower bound)
// plus a lex-minimization pass that reuses the bound solver.

struct CoverProblem {
    std::vector<Path> paths;          // paths that must each be hit
    std::vector<std::uint8_t> absent; // absent flag per edge id
};

namespace detail {

class CoverSolver {
public:
    CoverSolver(const CoverProblem& problem) {
        for (std::size_t e = 0; e < problem.absent.size(); ++e)
            if (problem.absent[e]) elem_ids_.push_back(static_cast<int>(e));
        if (elem_ids_.size() > 63)
            throw std::runtime_error("minimum cover: more than 63 absent edges");
        std::vector<int> pos(problem.absent.size(), -1);
        for (std::size_t i = 0; i < elem_ids_.size(); ++i) pos[elem_ids_[i]] = static_cast<int>(i);
        for (const Path& p : problem.paths) {
            std::uint64_t mask = 0;
            for (int e : p.edges)
                if (e >= 0 && e < static_cast<int>(pos.size()) && pos[e] >= 0)
                    mask |= 1ULL << pos[e];
            if (mask == 0)
                throw std::invalid_argument(
                    "minimum cover: a path has no absent edge; no finite cover exists");
            sets_.push_back(mask);
        }
        drop_supersets();
    }

    std::vector<int> solve() const {
        if (sets_.empty()) return {};
        std::uint64_t all = elem_ids_.size() == 64 ? ~0ULL : (1ULL << elem_ids_.size()) - 1;
        int k = min_size(sets_, all);
        // Build the lexicographically smallest cover of size k, one element
        // at a time; feasibility of each tentative prefix is an exact solve
        // over the still-allowed (strictly larger) elements.
        std::vector<int> chosen;
        std::vector<std::uint64_t> remaining = sets_;
        std::uint64_t allowed = all;
        for (int slot = 0; slot < k; ++slot) {
            bool placed = false;
            for (std::uint64_t bits = allowed; bits; bits &= bits - 1) {
                int b = std::countr_zero(bits);
                std::uint64_t gt = allowed & ~((2ULL << b) - 1); // elements > b
                std::vector<std::uint64_t> filtered = filter(remaining, 1ULL << b);
                int need = filtered.empty() ? 0 : min_size(filtered, gt);
                if (need <= k - slot - 1) {
                    chosen.push_back(b);
                    remaining = std::move(filtered);
                    allowed = gt;
                    placed = true;
                    break;
                }
            }
            if (!placed) throw std::logic_error("minimum cover: lex pass lost feasibility");
        }
        std::vector<int> out;
        for (int b : chosen) out.push_back(elem_ids_[b]);
        return out;
    }

private:
    // Hitting a subset hits every superset, so keep only the minimal sets
    // (first copy wins among duplicates).
    void drop_supersets() {
        std::vector<std::uint64_t> kept;
        for (std::size_t i = 0; i < sets_.size(); ++i) {
            bool redundant = false;
            for (std::size_t j = 0; j < sets_.size() && !redundant; ++j) {
                if (i == j) continue;
                if ((sets_[j] & sets_[i]) == sets_[j] &&
                    (sets_[j] != sets_[i] || j < i))
                    redundant = true;
            }
            if (!redundant) kept.push_back(sets_[i]);
        }
        sets_ = std::move(kept);
    }

    static std::vector<std::uint64_t> filter(const std::vector<std::uint64_t>& sets,
                                             std::uint64_t hit_by) {
        std::vector<std::uint64_t> out;
        for (std::uint64_t s : sets)
            if (!(s & hit_by)) out.push_back(s);
        return out;
    }

    // Greedy cover size: most-hits-first, ties to the smallest element.
    static int greedy_size(std::vector<std::uint64_t> sets, std::uint64_t allowed) {
        int size = 0;
        while (!sets.empty()) {
            int best_elem = -1, best_hits = 0;
            for (std::uint64_t bits = allowed; bits; bits &= bits - 1) {
                int b = std::countr_zero(bits);
                int hits = 0;
                for (std::uint64_t s : sets)
                    if (s & (1ULL << b)) ++hits;
                if (hits > best_hits) {
                    best_hits = hits;
                    best_elem = b;
                }
            }
            if (best_elem < 0) return std::numeric_limits<int>::max(); // infeasible
            sets = filter(sets, 1ULL << best_elem);
            ++size;
        }
        return size;
    }

    // Lower bound: greedily packed pairwise-disjoint sets each need their own
    // cover element.
    static int packing_bound(const std::vector<std::uint64_t>& sets) {
        std::uint64_t used = 0;
        int count = 0;
        for (std::uint64_t s : sets)
            if (!(s & used)) {
                used |= s;
                ++count;
            }
        return count;
    }

    static int min_size(const std::vector<std::uint64_t>& sets, std::uint64_t allowed) {
        for (std::uint64_t s : sets)
            if (!(s & allowed)) return std::numeric_limits<int>::max();
        int best = greedy_size(sets, allowed);
        branch(sets, allowed, 0, best);
        return best;
    }

    static void branch(const std::vector<std::uint64_t>& sets, std::uint64_t allowed,
                       int chosen, int& best) {
        if (sets.empty()) {
            best = std::min(best, chosen);
            return;
        }
        if (chosen + packing_bound(sets) >= best) return;
        // Branch on the most constrained set.
        std::uint64_t pick = 0;
        int fewest = std::numeric_limits<int>::max();
        for (std::uint64_t s : sets) {
            int c = std::popcount(s & allowed);
            if (c == 0) return; // infeasible under this restriction
            if (c < fewest) {
                fewest = c;
                pick = s & allowed;
            }
        }
        for (std::uint64_t bits = pick; bits; bits &= bits - 1) {
            std::uint64_t elem = bits & (~bits + 1);
            branch(filter(sets, elem), allowed, chosen + 1, best);
        }
    }

    std::vector<int> elem_ids_; // absent edge ids, ascending; bit i <-> elem_ids_[i]
    std::vector<std::uint64_t> sets_;
};

} // namespace detail

inline std::vector<int> minimum_cover(const CoverProblem& problem) {
    return detail::CoverSolver(problem).solve();
}

// ---------------------------------------------------------------------------
// Omniscient schedule: with the realization in hand, take a shortest present
// path P*, cover every strictly shorter path of the full graph with a minimum
// set of absent edges, query one cover edge per still-alive short path (in
// path order, smallest cover edge id first), then verify P* edge by edge.
// Cost is |P*| + |cover|; when no present path exists the cover alone
// certifies disconnection.

struct OmniscientRun {
    RunResult run;
    std::optional<Path> p_star;
    std::vector<int> cover;
    int short_path_count = 0;
};

inline OmniscientRun omniscient_run(const Multigraph& g, const Subgraph& sub,
                                    std::size_t path_cap = 1000000) {
    if (sub.edge_count() != g.edge_count())
        throw std::invalid_argument("omniscient: subgraph size mismatch");

    QueryState known(g);
    for (int e = 0; e < g.edge_count(); ++e) sub.has(e) ? known.mark_yes(e) : known.mark_no(e);
    std::optional<Path> p_star = shortest_candidate_path(g, known);

    std::optional<int> bound = p_star ? std::optional<int>(p_star->length()) : std::nullopt;
    std::vector<Path> shorter = enumerate_paths_shorter_than(g, bound, path_cap);

    CoverProblem problem;
    problem.paths = shorter;
    problem.absent.resize(g.edge_count());
    for (int e = 0; e < g.edge_count(); ++e) problem.absent[e] = sub.has(e) ? 0 : 1;
    std::vector<int> cover = minimum_cover(problem);

    std::vector<char> in_cover(g.edge_count(), 0);
    for (int e : cover) in_cover[e] = 1;

    DeterministicOracle oracle(sub);
    QueryState state(g);
    for (const Path& p : shorter) {
        bool alive = true;
        for (int e : p.edges)
            if (state.is_no(e)) {
                alive = false;
                break;
            }
        if (!alive) continue;
        int pick = -1;
        for (int e : p.edges)
            if (in_cover[e] && !state.is_queried(e) && (pick < 0 || e < pick)) pick = e;
        if (pick < 0) {
            // Alive path with its cover edges all queried cannot happen: the
            // queried cover edges are absent, which would have killed it.
            throw std::logic_error("omniscient: alive short path without a cover edge");
        }
        state.apply(pick, oracle.query(pick));
    }
    for (int e : cover)
        if (!state.is_queried(e))
            throw std::logic_error("omniscient: minimum cover left an unqueried edge");

    if (p_star)
        for (int e : p_star->edges) state.apply(e, oracle.query(e));

    int expected = (p_star ? p_star->length() : 0) + static_cast<int>(cover.size());
    if (oracle.query_count() != expected)
        throw std::logic_error("omniscient: schedule cost mismatch");

    OmniscientRun out{RunResult{p_star, oracle.trace(), std::move(state)}, p_star, cover,
                      static_cast<int>(shorter.size())};
    return out;
}

// ---------------------------------------------------------------------------
// Exact optimal expected query count: memoized expectimax over states
// (q_yes, q_no) encoded as bit masks. A state is terminal when either some
// fully verified path is at most as short as every surviving path, or q_no
// disconnects s from t (no surviving path). Actions are restricted to edges
// on some surviving s-t path; edges off every surviving path change neither
// the terminal test nor future options, so the restriction is dominance-safe
// (prune=false enumerates all unqueried edges for audit).

struct MdpOptions {
    bool prune = true;
    // 3^m (yes/no/unqueried) states bound the memo; 15 edges ~ 14M entries.
    int edge_cap = 15;
    std::size_t path_cap = 1000000;
};

struct MdpResult {
    double expected_cost = 0.0;
    // Reachable non-terminal states under optimal play -> chosen edge.
    std::unordered_map<std::uint64_t, int> policy;
    int edge_count = 0;

    static std::uint64_t key(std::uint32_t yes, std::uint32_t no) {
        return static_cast<std::uint64_t>(yes) | (static_cast<std::uint64_t>(no) << 32);
    }
};

namespace detail {

struct MdpSolver {
    struct Entry {
        double value;
        int action; // -1 terminal
    };

    const std::vector<double>& probs;
    std::vector<std::uint32_t> path_masks; // ascending length
    std::vector<int> path_lens;
    std::uint32_t all_mask;
    bool prune;
    std::unordered_map<std::uint64_t, Entry> memo;

    MdpSolver(const Multigraph& g, const std::vector<double>& probs_, const MdpOptions& opt)
        : probs(probs_) {
        int m = g.edge_count();
        all_mask = m == 32 ? 0xffffffffu : ((1u << m) - 1);
        std::vector<Path> paths = enumerate_paths_shorter_than(g, std::nullopt, opt.path_cap);
        for (const Path& p : paths) {
            std::uint32_t mask = 0;
            for (int e : p.edges) mask |= 1u << e;
            path_masks.push_back(mask);
            path_lens.push_back(p.length());
        }
        prune = opt.prune;
        memo.reserve(1 << 16);
    }

    // Terminal iff no surviving path, or a surviving path of minimum
    // surviving length is fully inside q_yes.
    bool terminal(std::uint32_t yes, std::uint32_t no, std::uint32_t& relevant) const {
        relevant = 0;
        int min_len = -1;
        bool done = false;
        for (std::size_t i = 0; i < path_masks.size(); ++i) {
            if (path_masks[i] & no) continue;
            if (min_len < 0) min_len = path_lens[i];
            if (path_lens[i] == min_len && (path_masks[i] & ~yes) == 0) done = true;
            relevant |= path_masks[i];
        }
        if (min_len < 0) return true; // disconnected by q_no
        return done;
    }

    double solve(std::uint32_t yes, std::uint32_t no) {
        std::uint64_t key = MdpResult::key(yes, no);
        auto it = memo.find(key);
        if (it != memo.end()) return it->second.value;

        std::uint32_t relevant = 0;
        if (terminal(yes, no, relevant)) {
            memo.emplace(key, Entry{0.0, -1});
            return 0.0;
        }
        std::uint32_t actions = (prune ? relevant : all_mask) & ~(yes | no);
        double best = std::numeric_limits<double>::infinity();
        int best_edge = -1;
        for (std::uint32_t bits = actions; bits; bits &= bits - 1) {
            int e = std::countr_zero(bits);
            double v = 1.0 + probs[e] * solve(yes | (1u << e), no) +
                       (1.0 - probs[e]) * solve(yes, no | (1u << e));
            if (v < best) {
                best = v;
                best_edge = e;
            }
        }
        if (best_edge < 0)
            throw std::logic_error("mdp: non-terminal state with no action");
        memo.emplace(key, Entry{best, best_edge});
        return best;
    }

    std::unordered_map<std::uint64_t, int> extract_policy() const {
        std::unordered_map<std::uint64_t, int> policy;
        std::vector<std::uint64_t> stack{MdpResult::key(0, 0)};
        std::unordered_map<std::uint64_t, char> seen;
        while (!stack.empty()) {
            std::uint64_t key = stack.back();
            stack.pop_back();
            if (seen.count(key)) continue;
            seen[key] = 1;
            auto it = memo.find(key);
            if (it == memo.end() || it->second.action < 0) continue;
            policy[key] = it->second.action;
            std::uint32_t yes = static_cast<std::uint32_t>(key);
            std::uint32_t no = static_cast<std::uint32_t>(key >> 32);
            std::uint32_t bit = 1u << it->second.action;
            stack.push_back(MdpResult::key(yes | bit, no));
            stack.push_back(MdpResult::key(yes, no | bit));
        }
        return policy;
    }
};

} // namespace detail

inline MdpResult mdp_optimal(const Multigraph& g, const std::vector<double>& probs,
                             const MdpOptions& opt = {}) {
    int m = g.edge_count();
    if (m > opt.edge_cap || m > 31)
        throw std::invalid_argument("mdp: edge count exceeds cap");
    if (static_cast<int>(probs.size()) != m)
        throw std::invalid_argument("mdp: probability vector size mismatch");
    for (double p : probs)
        if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("mdp: probability outside [0,1]");
    detail::MdpSolver solver(g, probs, opt);
    MdpResult out;
    out.expected_cost = solver.solve(0, 0);
    out.policy = solver.extract_policy();
    out.edge_count = m;
    return out;
}

// ---------------------------------------------------------------------------
// Algorithms as callables for expectation sweeps and the harness.

using Algorithm = std::function<RunResult(const Multigraph&, Oracle&)>;

inline Algorithm lazysp_algorithm(const EdgeSelector& selector) {
    return [selector](const Multigraph& g, Oracle& oracle) {
        return lazysp(g, oracle, selector);
    };
}

inline Algorithm alg_theorem2_algorithm(std::shared_ptr<const AnnotatedGadget> gadget,
                                        const EdgeSelector& delegate = forward_selector()) {
    return [gadget, delegate](const Multigraph& g, Oracle& oracle) {
        if (g.edge_count() != gadget->graph.edge_count())
            throw std::invalid_argument("alg_theorem2 algorithm: graph mismatch");
        return alg_theorem2(*gadget, oracle, delegate);
    };
}

// Executes a solved policy as a legal query algorithm; lookup miss = terminal.
inline Algorithm mdp_policy_algorithm(std::shared_ptr<const MdpResult> solved) {
    return [solved](const Multigraph& g, Oracle& oracle) {
        if (g.edge_count() != solved->edge_count)
            throw std::invalid_argument("mdp policy: graph mismatch");
        QueryState state(g);
        std::uint32_t yes = 0, no = 0;
        for (;;) {
            auto it = solved->policy.find(MdpResult::key(yes, no));
            if (it == solved->policy.end()) break;
            int e = it->second;
            bool ans = oracle.query(e);
            state.apply(e, ans);
            (ans ? yes : no) |= 1u << e;
        }
        std::optional<Path> cand = shortest_candidate_path(g, state);
        if (!cand) return RunResult{std::nullopt, oracle.trace(), std::move(state)};
        for (int e : cand->edges)
            if (!state.is_yes(e))
                throw std::logic_error("mdp policy: stopped before certification");
        return RunResult{std::move(cand), oracle.trace(), std::move(state)};
    };
}

// Exact expectation of an algorithm's query count over all 2^|E| realizations.
inline double exact_expected_cost(const Multigraph& g, const std::vector<double>& probs,
                                  const Algorithm& algorithm, int edge_cap = 20) {
    int m = g.edge_count();
    if (m > edge_cap || m > 62)
        throw std::invalid_argument("exact expected cost: edge count exceeds cap");
    if (static_cast<int>(probs.size()) != m)
        throw std::invalid_argument("exact expected cost: probability vector size mismatch");
    double total = 0.0;
    for (std::uint64_t mask = 0; mask < (1ULL << m); ++mask) {
        double pr = 1.0;
        for (int e = 0; e < m; ++e) pr *= (mask >> e) & 1 ? probs[e] : 1.0 - probs[e];
        if (pr == 0.0) continue;
        DeterministicOracle oracle(subgraph_from_mask(m, mask));
        RunResult r = algorithm(g, oracle);
        total += pr * r.cost();
    }
    return total;
}

} // namespace lazysp
