#pragma once

// Undirected multigraphs with distinguished terminals s and t, edge-query
// bookkeeping, and the tie-broken shortest-path machinery used by the lazy
// search loop. Parallel edges are allowed and are distinguished by edge id
// (the index into the edge list); self loops are rejected.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace lazysp {

struct Edge {
    int u = 0;
    int v = 0;
};

inline bool operator==(const Edge& a, const Edge& b) { return a.u == b.u && a.v == b.v; }

class Multigraph {
public:
    Multigraph(int vertex_count, std::vector<Edge> edges, int s, int t)
        : n_(vertex_count), s_(s), t_(t), edges_(std::move(edges)) {
        if (n_ < 2)
            throw std::invalid_argument("multigraph: need at least two vertices");
        if (s_ < 0 || s_ >= n_ || t_ < 0 || t_ >= n_)
            throw std::invalid_argument("multigraph: terminal out of range");
        if (s_ == t_)
            throw std::invalid_argument("multigraph: s and t must differ");
        adj_.resize(n_);
        for (std::size_t i = 0; i < edges_.size(); ++i) {
            const Edge& e = edges_[i];
            if (e.u < 0 || e.u >= n_ || e.v < 0 || e.v >= n_)
                throw std::invalid_argument("multigraph: edge endpoint out of range");
            if (e.u == e.v)
                throw std::invalid_argument("multigraph: self loops are not allowed");
            adj_[e.u].push_back({static_cast<int>(i), e.v});
            adj_[e.v].push_back({static_cast<int>(i), e.u});
        }
    }

    int vertex_count() const { return n_; }
    int edge_count() const { return static_cast<int>(edges_.size()); }
    int s() const { return s_; }
    int t() const { return t_; }

    const Edge& edge(int id) const {
        check_edge(id);
        return edges_[id];
    }
    const std::vector<Edge>& edges() const { return edges_; }

    // Incident (edge_id, other_endpoint) pairs in ascending edge-id order.
    const std::vector<std::pair<int, int>>& incident(int v) const { return adj_[v]; }

    void check_edge(int id) const {
        if (id < 0 || id >= edge_count())
            throw std::out_of_range("multigraph: edge id out of range");
    }

    bool operator==(const Multigraph& o) const {
        return n_ == o.n_ && s_ == o.s_ && t_ == o.t_ && edges_ == o.edges_;
    }

private:
    int n_;
    int s_;
    int t_;
    std::vector<Edge> edges_;
    std::vector<std::vector<std::pair<int, int>>> adj_;
};

inline Multigraph build_graph(int vertex_count, const std::vector<std::pair<int, int>>& edges,
                              int s, int t) {
    std::vector<Edge> es;
    es.reserve(edges.size());
    for (auto& [u, v] : edges) es.push_back({u, v});
    return Multigraph(vertex_count, std::move(es), s, t);
}

// ---------------------------------------------------------------------------
// JSON round trip. The writer emits a canonical form (alphabetical keys, no
// whitespace), so write(load(write(g))) == write(g) byte for byte.

inline nlohmann::json graph_to_json(const Multigraph& g) {
    nlohmann::json j;
    j["n"] = g.vertex_count();
    j["s"] = g.s();
    j["t"] = g.t();
    auto edges = nlohmann::json::array();
    for (const Edge& e : g.edges()) edges.push_back({e.u, e.v});
    j["edges"] = std::move(edges);
    return j;
}

inline std::string graph_to_json_string(const Multigraph& g) { return graph_to_json(g).dump(); }

inline Multigraph graph_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("n") || !j.contains("s") || !j.contains("t") ||
        !j.contains("edges"))
        throw std::invalid_argument("graph json: expected object with n, s, t, edges");
    std::vector<Edge> edges;
    for (const auto& item : j.at("edges")) {
        if (!item.is_array() || item.size() != 2)
            throw std::invalid_argument("graph json: each edge must be a [u, v] pair");
        edges.push_back({item[0].get<int>(), item[1].get<int>()});
    }
    return Multigraph(j.at("n").get<int>(), std::move(edges), j.at("s").get<int>(),
                      j.at("t").get<int>());
}

inline Multigraph graph_from_json_string(const std::string& text) {
    return graph_from_json(nlohmann::json::parse(text));
}

inline void save_graph(const Multigraph& g, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << graph_to_json_string(g) << '\n';
}

inline Multigraph load_graph(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open graph file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return graph_from_json_string(buf.str());
}

// ---------------------------------------------------------------------------
// Union-find with canonical labels (smallest vertex id in the component), so
// partitions compare equal regardless of merge order.

class UnionFind {
public:
    explicit UnionFind(int n) : parent_(n), size_(n, 1), label_(n), count_(n) {
        for (int i = 0; i < n; ++i) parent_[i] = label_[i] = i;
    }

    int find(int v) const {
        while (parent_[v] != v) {
            parent_[v] = parent_[parent_[v]];
            v = parent_[v];
        }
        return v;
    }

    int label(int v) const { return label_[find(v)]; }

    bool merge(int a, int b) {
        int ra = find(a), rb = find(b);
        if (ra == rb) return false;
        if (size_[ra] < size_[rb]) std::swap(ra, rb);
        parent_[rb] = ra;
        size_[ra] += size_[rb];
        label_[ra] = std::min(label_[ra], label_[rb]);
        --count_;
        return true;
    }

    int count() const { return count_; }

private:
    mutable std::vector<int> parent_;
    std::vector<int> size_;
    std::vector<int> label_;
    int count_;
};

// ---------------------------------------------------------------------------
// Query bookkeeping: which edges answered Yes (present) or No (absent), plus
// the component structure of (V, q_yes) maintained incrementally.

enum class Mark : std::uint8_t { Unqueried = 0, Yes = 1, No = 2 };

class QueryState {
public:
    explicit QueryState(const Multigraph& g)
        : g_(&g), marks_(g.edge_count(), Mark::Unqueried), components_(g.vertex_count()) {}

    const Multigraph& graph() const { return *g_; }

    Mark mark(int edge) const {
        g_->check_edge(edge);
        return marks_[edge];
    }
    bool is_yes(int edge) const { return mark(edge) == Mark::Yes; }
    bool is_no(int edge) const { return mark(edge) == Mark::No; }
    bool is_queried(int edge) const { return mark(edge) != Mark::Unqueried; }

    void mark_yes(int edge) {
        claim(edge, Mark::Yes);
        yes_.push_back(edge);
        components_.merge(g_->edge(edge).u, g_->edge(edge).v);
    }

    void mark_no(int edge) {
        claim(edge, Mark::No);
        no_.push_back(edge);
    }

    void apply(int edge, bool present) { present ? mark_yes(edge) : mark_no(edge); }

    const std::vector<int>& yes_edges() const { return yes_; }
    const std::vector<int>& no_edges() const { return no_; }
    int yes_count() const { return static_cast<int>(yes_.size()); }
    int no_count() const { return static_cast<int>(no_.size()); }

    // Component structure of (V, q_yes).
    int component_of(int v) const { return components_.label(v); }
    int component_count() const { return components_.count(); }

    std::vector<int> partition() const {
        std::vector<int> out(g_->vertex_count());
        for (int v = 0; v < g_->vertex_count(); ++v) out[v] = components_.label(v);
        return out;
    }

    // Partition after hypothetically marking one more edge Yes.
    std::vector<int> partition_after(int edge) const {
        g_->check_edge(edge);
        std::vector<int> out = partition();
        int a = out[g_->edge(edge).u], b = out[g_->edge(edge).v];
        if (a == b) return out;
        int lo = std::min(a, b), hi = std::max(a, b);
        for (int& x : out)
            if (x == hi) x = lo;
        return out;
    }

private:
    void claim(int edge, Mark m) {
        g_->check_edge(edge);
        if (marks_[edge] != Mark::Unqueried)
            throw std::logic_error("query state: edge already marked");
        marks_[edge] = m;
    }

    const Multigraph* g_;
    std::vector<Mark> marks_;
    std::vector<int> yes_;
    std::vector<int> no_;
    UnionFind components_;
};

// Reference recomputation used by property tests.
inline std::vector<int> partition_from_scratch(const Multigraph& g, const std::vector<int>& yes) {
    UnionFind uf(g.vertex_count());
    for (int e : yes) uf.merge(g.edge(e).u, g.edge(e).v);
    std::vector<int> out(g.vertex_count());
    for (int v = 0; v < g.vertex_count(); ++v) out[v] = uf.label(v);
    return out;
}

inline std::vector<int> components_after(const QueryState& state, int edge) {
    return state.partition_after(edge);
}

// ---------------------------------------------------------------------------
// Plain BFS over a caller-chosen edge subset; deliberately independent of the
// Dijkstra engine below so certification does not share code with the search.

template <class EdgeFilter>
int bfs_distance(const Multigraph& g, EdgeFilter&& usable) {
    std::vector<int> dist(g.vertex_count(), -1);
    std::queue<int> q;
    dist[g.s()] = 0;
    q.push(g.s());
    while (!q.empty()) {
        int v = q.front();
        q.pop();
        if (v == g.t()) return dist[v];
        for (auto& [eid, other] : g.incident(v)) {
            if (dist[other] >= 0 || !usable(eid)) continue;
            dist[other] = dist[v] + 1;
            q.push(other);
        }
    }
    return -1; // unreachable
}

template <class EdgeFilter>
bool bfs_reachable(const Multigraph& g, EdgeFilter&& usable) {
    return bfs_distance(g, usable) >= 0;
}

// ---------------------------------------------------------------------------
// Paths and the candidate-path total preorder: shorter first, then more
// verified edges (fewer edges outside q_yes), then lexicographically smallest
// edge-id sequence.

struct Path {
    std::vector<int> edges;
    std::vector<int> vertices; // edges.size() + 1 entries, from s to t

    int length() const { return static_cast<int>(edges.size()); }
};

inline bool operator==(const Path& a, const Path& b) {
    return a.edges == b.edges && a.vertices == b.vertices;
}

inline int unverified_count(const Path& p, const QueryState* state) {
    if (!state) return p.length();
    int c = 0;
    for (int e : p.edges)
        if (!state->is_yes(e)) ++c;
    return c;
}

// <0, 0, >0 like a three-way compare. Null state treats every edge as
// unverified (the ordering used when ranking raw path lists).
inline int compare_paths(const Path& a, const Path& b, const QueryState* state = nullptr) {
    if (a.length() != b.length()) return a.length() < b.length() ? -1 : 1;
    int ua = unverified_count(a, state), ub = unverified_count(b, state);
    if (ua != ub) return ua < ub ? -1 : 1;
    if (a.edges < b.edges) return -1;
    if (b.edges < a.edges) return 1;
    return 0;
}

// Structural validity: a simple s-t path whose edges exist and chain up.
inline bool is_valid_path(const Multigraph& g, const Path& p) {
    if (p.edges.empty() || p.vertices.size() != p.edges.size() + 1) return false;
    if (p.vertices.front() != g.s() || p.vertices.back() != g.t()) return false;
    std::vector<char> seen(g.vertex_count(), 0);
    for (std::size_t i = 0; i < p.vertices.size(); ++i) {
        int v = p.vertices[i];
        if (v < 0 || v >= g.vertex_count() || seen[v]) return false;
        seen[v] = 1;
    }
    for (std::size_t i = 0; i < p.edges.size(); ++i) {
        int id = p.edges[i];
        if (id < 0 || id >= g.edge_count()) return false;
        const Edge& e = g.edge(id);
        int x = p.vertices[i], y = p.vertices[i + 1];
        if (!((e.u == x && e.v == y) || (e.u == y && e.v == x))) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Incremental engine behind shortest_candidate_path. Parallel edges between
// the same vertex pair are collapsed into a group for the distance pass; the
// exact edge is picked during the greedy walk, so the tie-break is unchanged.
//
// Costs are lexicographic (length, unverified) pairs packed into one word:
// a verified edge costs (1, 0), an unqueried edge (1, 1); q_no edges drop out.
// Distances are computed from t, and the path is rebuilt from s by always
// taking the smallest tight edge id, which yields the unique minimum of the
// preorder above.

class CandidateSearch {
public:
    explicit CandidateSearch(const Multigraph& g) : g_(&g) { build(); }

    CandidateSearch(const Multigraph& g, const QueryState& state) : g_(&g) {
        build();
        for (int e : state.yes_edges()) apply(e, true);
        for (int e : state.no_edges()) apply(e, false);
    }

    // Mirror of QueryState::apply for the edge just answered.
    void apply(int edge, bool present) {
        g_->check_edge(edge);
        if (marks_[edge] != Mark::Unqueried)
            throw std::logic_error("candidate search: edge already applied");
        marks_[edge] = present ? Mark::Yes : Mark::No;
        if (present) {
            Group& grp = groups_[group_of_[edge]];
            grp.min_yes = std::min(grp.min_yes, edge);
        }
    }

    void reset() {
        std::fill(marks_.begin(), marks_.end(), Mark::Unqueried);
        for (Group& grp : groups_) {
            grp.first_live = 0;
            grp.min_yes = kNone;
        }
    }

    std::optional<Path> current_shortest() {
        run_dijkstra();
        if (dist_[g_->s()] == kInf) return std::nullopt;
        Path p;
        int v = g_->s();
        p.vertices.push_back(v);
        while (v != g_->t()) {
            int best_edge = kNone, best_other = -1;
            for (int gi : vertex_groups_[v]) {
                Group& grp = groups_[gi];
                int other = grp.u == v ? grp.v : grp.u;
                if (dist_[other] == kInf) continue;
                if (grp.min_yes != kNone && dist_[v] == dist_[other] + kCostYes) {
                    if (grp.min_yes < best_edge) best_edge = grp.min_yes, best_other = other;
                } else if (dist_[v] == dist_[other] + kCostNew) {
                    int id = first_unqueried(grp);
                    if (id != kNone && id < best_edge) best_edge = id, best_other = other;
                }
            }
            if (best_edge == kNone)
                throw std::logic_error("candidate search: broken tight-edge walk");
            p.edges.push_back(best_edge);
            p.vertices.push_back(best_other);
            v = best_other;
        }
        return p;
    }

private:
    static constexpr int kNone = std::numeric_limits<int>::max();
    static constexpr std::uint64_t kInf = std::numeric_limits<std::uint64_t>::max();
    static constexpr std::uint64_t kCostYes = (1ULL << 32);
    static constexpr std::uint64_t kCostNew = (1ULL << 32) | 1ULL;

    struct Group {
        int u, v;
        std::vector<int> ids;  // ascending
        int first_live = 0;    // skip pointer for the smallest unqueried id
        int min_yes = kNone;
    };

    void build() {
        group_of_.assign(g_->edge_count(), -1);
        vertex_groups_.assign(g_->vertex_count(), {});
        marks_.assign(g_->edge_count(), Mark::Unqueried);
        std::vector<std::vector<int>> pair_group(g_->vertex_count());
        for (int id = 0; id < g_->edge_count(); ++id) {
            const Edge& e = g_->edge(id);
            int a = std::min(e.u, e.v), b = std::max(e.u, e.v);
            int gi = -1;
            for (int cand : pair_group[a])
                if (groups_[cand].v == b) {
                    gi = cand;
                    break;
                }
            if (gi < 0) {
                gi = static_cast<int>(groups_.size());
                groups_.push_back({a, b, {}, 0, kNone});
                pair_group[a].push_back(gi);
                vertex_groups_[a].push_back(gi);
                vertex_groups_[b].push_back(gi);
            }
            groups_[gi].ids.push_back(id);
            group_of_[id] = gi;
        }
        dist_.assign(g_->vertex_count(), kInf);
    }

    int first_unqueried(Group& grp) {
        while (grp.first_live < static_cast<int>(grp.ids.size()) &&
               marks_[grp.ids[grp.first_live]] != Mark::Unqueried)
            ++grp.first_live;
        return grp.first_live < static_cast<int>(grp.ids.size()) ? grp.ids[grp.first_live]
                                                                 : kNone;
    }

    void run_dijkstra() {
        std::fill(dist_.begin(), dist_.end(), kInf);
        heap_.clear();
        dist_[g_->t()] = 0;
        heap_.push_back({0, g_->t()});
        auto cmp = [](const HeapItem& a, const HeapItem& b) { return a.d > b.d; };
        while (!heap_.empty()) {
            std::pop_heap(heap_.begin(), heap_.end(), cmp);
            HeapItem top = heap_.back();
            heap_.pop_back();
            if (top.d != dist_[top.v]) continue;
            for (int gi : vertex_groups_[top.v]) {
                Group& grp = groups_[gi];
                std::uint64_t cost;
                if (grp.min_yes != kNone)
                    cost = kCostYes;
                else if (first_unqueried(grp) != kNone)
                    cost = kCostNew;
                else
                    continue;
                int other = grp.u == top.v ? grp.v : grp.u;
                std::uint64_t nd = top.d + cost;
                if (nd < dist_[other]) {
                    dist_[other] = nd;
                    heap_.push_back({nd, other});
                    std::push_heap(heap_.begin(), heap_.end(), cmp);
                }
            }
        }
    }

    struct HeapItem {
        std::uint64_t d;
        int v;
    };

    const Multigraph* g_;
    std::vector<Group> groups_;
    std::vector<int> group_of_;
    std::vector<std::vector<int>> vertex_groups_;
    std::vector<Mark> marks_;
    std::vector<std::uint64_t> dist_;
    std::vector<HeapItem> heap_;
};

// The unique minimum of the candidate preorder over simple s-t paths avoiding
// q_no, or nullopt when s and t are disconnected in (V, E \ q_no).
inline std::optional<Path> shortest_candidate_path(const Multigraph& g, const QueryState& state) {
    CandidateSearch cs(g, state);
    return cs.current_shortest();
}

// ---------------------------------------------------------------------------
// Exhaustive simple-path enumeration, ordered by the preorder with empty
// q_yes. bound = nullopt means no length bound. Throws when the number of
// paths exceeds cap.

inline std::vector<Path> enumerate_paths_shorter_than(const Multigraph& g,
                                                      std::optional<int> bound,
                                                      std::size_t cap = 1000000) {
    int max_edges = bound ? *bound - 1 : g.vertex_count() - 1;
    std::vector<Path> out;
    if (max_edges < 1) return out;
    std::vector<char> visited(g.vertex_count(), 0);
    Path cur;
    cur.vertices.push_back(g.s());
    visited[g.s()] = 1;

    auto dfs = [&](auto&& self, int v) -> void {
        if (v == g.t()) {
            if (out.size() >= cap)
                throw std::runtime_error("path enumeration: cap exceeded");
            out.push_back(cur);
            return;
        }
        if (cur.length() == max_edges) return;
        for (auto& [eid, other] : g.incident(v)) {
            if (visited[other]) continue;
            visited[other] = 1;
            cur.edges.push_back(eid);
            cur.vertices.push_back(other);
            self(self, other);
            cur.edges.pop_back();
            cur.vertices.pop_back();
            visited[other] = 0;
        }
    };
    dfs(dfs, g.s());
    std::sort(out.begin(), out.end(),
              [](const Path& a, const Path& b) { return compare_paths(a, b) < 0; });
    return out;
}

} // namespace lazysp
