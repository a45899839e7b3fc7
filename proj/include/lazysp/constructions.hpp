#pragma once

// Instance generators: the two-terminal string structure A (kappa disjoint
// strings of ell edges), the series-parallel structure B (ell_prime stages of
// kappa_prime parallel edges), the four-junction gadget that composes them,
// the parallel-chain lower-bound family, and seeded random multigraphs.

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "multigraph.hpp"
#include "oracle.hpp"
#include "rng.hpp"

namespace lazysp {

struct GadgetParams {
    int kappa = 0;        // strings per A structure
    int kappa_prime = 0;  // parallel edges per B stage
    double epsilon = 0.0; // edge absence probability (edges present w.p. 1 - epsilon)
    double delta = 0.0;   // target failure probability
    int ell = 0;          // edges per A string; 0 means derive from epsilon/delta
    int ell_prime = 0;    // stages per B structure; 0 means 3 * ell

    static GadgetParams full_scale() {
        GadgetParams p;
        p.kappa = 10000;
        p.kappa_prime = 2;
        p.epsilon = 0.01;
        p.delta = 0.001;
        return p.resolved();
    }

    GadgetParams resolved() const {
        GadgetParams p = *this;
        if (p.kappa < 1 || p.kappa_prime < 1)
            throw std::invalid_argument("gadget params: kappa and kappa_prime must be >= 1");
        if (p.ell == 0) {
            if (!(p.epsilon > 0.0 && p.epsilon < 1.0) || !(p.delta > 0.0 && p.delta < 1.0))
                throw std::invalid_argument("gadget params: need epsilon, delta in (0,1)");
            p.ell = static_cast<int>(
                std::ceil(std::log(static_cast<double>(p.kappa) / p.delta) / p.epsilon));
        }
        if (p.ell_prime == 0) p.ell_prime = 3 * p.ell;
        if (p.ell < 1 || p.ell_prime < 1)
            throw std::invalid_argument("gadget params: ell and ell_prime must be >= 1");
        return p;
    }

    double edge_probability() const { return 1.0 - epsilon; }

    long long a_edges() const { return 1LL * kappa * ell; }
    long long b_edges() const { return 1LL * kappa_prime * ell_prime; }
    long long total_edges() const { return 3 * a_edges() + 2 * b_edges(); }
};

struct ArcInfo {
    char kind = 'A';   // 'A' strings or 'B' stages
    int from = 0;      // junction vertices
    int to = 0;
    // For A: parts[k] is the edge-id sequence of string k, ordered from
    // `from` to `to`. For B: parts[j] is the parallel edge group of stage j.
    std::vector<std::vector<int>> parts;

    std::vector<int> all_edges() const {
        std::vector<int> out;
        for (const auto& part : parts) out.insert(out.end(), part.begin(), part.end());
        return out;
    }
};

struct AnnotatedGadget {
    Multigraph graph;
    GadgetParams params;
    std::map<std::string, ArcInfo> arcs; // keys: sa, ab, bt, sb, at
    double edge_probability = 0.0;
};

namespace detail {

struct GraphBuilder {
    int n = 0;
    std::vector<Edge> edges;

    int add_vertex() { return n++; }
    int add_edge(int u, int v) {
        edges.push_back({u, v});
        return static_cast<int>(edges.size()) - 1;
    }
};

// kappa internally disjoint strings of ell edges from c to d.
inline ArcInfo append_structure_a(GraphBuilder& b, int c, int d, int kappa, int ell) {
    ArcInfo arc;
    arc.kind = 'A';
    arc.from = c;
    arc.to = d;
    for (int k = 0; k < kappa; ++k) {
        std::vector<int> string_edges;
        int prev = c;
        for (int j = 0; j < ell; ++j) {
            int next = (j == ell - 1) ? d : b.add_vertex();
            string_edges.push_back(b.add_edge(prev, next));
            prev = next;
        }
        arc.parts.push_back(std::move(string_edges));
    }
    return arc;
}

// ell_prime stages in series, each of kappa_prime parallel edges, c to d.
inline ArcInfo append_structure_b(GraphBuilder& b, int c, int d, int kappa_prime,
                                  int ell_prime) {
    ArcInfo arc;
    arc.kind = 'B';
    arc.from = c;
    arc.to = d;
    int prev = c;
    for (int j = 0; j < ell_prime; ++j) {
        int next = (j == ell_prime - 1) ? d : b.add_vertex();
        std::vector<int> stage;
        for (int i = 0; i < kappa_prime; ++i) stage.push_back(b.add_edge(prev, next));
        arc.parts.push_back(std::move(stage));
        prev = next;
    }
    return arc;
}

} // namespace detail

// Standalone fragments with terminals c = 0 (also s) and d = 1 (also t).
inline Multigraph structure_a_fragment(int kappa, int ell) {
    if (kappa < 1 || ell < 1)
        throw std::invalid_argument("structure A: kappa and ell must be >= 1");
    detail::GraphBuilder b;
    b.add_vertex();
    b.add_vertex();
    detail::append_structure_a(b, 0, 1, kappa, ell);
    return Multigraph(b.n, std::move(b.edges), 0, 1);
}

inline Multigraph structure_b_fragment(int kappa_prime, int ell_prime) {
    if (kappa_prime < 1 || ell_prime < 1)
        throw std::invalid_argument("structure B: kappa_prime and ell_prime must be >= 1");
    detail::GraphBuilder b;
    b.add_vertex();
    b.add_vertex();
    detail::append_structure_b(b, 0, 1, kappa_prime, ell_prime);
    return Multigraph(b.n, std::move(b.edges), 0, 1);
}

// Junctions s=0, a=1, b=2, t=3. A structures on arcs sa, ab, bt; B structures
// on sb and at. Every s-t route is A+A+A (length 3*ell), A+B or B+A (length
// ell + ell_prime); with the default ell_prime = 3*ell the all-A route is
// strictly shortest.
inline AnnotatedGadget theorem2_gadget(const GadgetParams& raw) {
    GadgetParams p = raw.resolved();
    detail::GraphBuilder b;
    int s = b.add_vertex(), a = b.add_vertex(), mid = b.add_vertex(), t = b.add_vertex();
    std::map<std::string, ArcInfo> arcs;
    arcs["sa"] = detail::append_structure_a(b, s, a, p.kappa, p.ell);
    arcs["ab"] = detail::append_structure_a(b, a, mid, p.kappa, p.ell);
    arcs["bt"] = detail::append_structure_a(b, mid, t, p.kappa, p.ell);
    arcs["sb"] = detail::append_structure_b(b, s, mid, p.kappa_prime, p.ell_prime);
    arcs["at"] = detail::append_structure_b(b, a, t, p.kappa_prime, p.ell_prime);
    return AnnotatedGadget{Multigraph(b.n, std::move(b.edges), s, t), p, std::move(arcs),
                           p.edge_probability()};
}

// Does the arc admit a from->to path under the given edge subset?
inline bool arc_has_path(const ArcInfo& arc, const Subgraph& sub) {
    if (arc.kind == 'A') {
        for (const auto& str : arc.parts) {
            bool whole = true;
            for (int e : str)
                if (!sub.has(e)) {
                    whole = false;
                    break;
                }
            if (whole) return true;
        }
        return false;
    }
    for (const auto& stage : arc.parts) {
        bool alive = false;
        for (int e : stage)
            if (sub.has(e)) {
                alive = true;
                break;
            }
        if (!alive) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Parallel-chain lower-bound family: vertices v_0..v_{n-1}, with
// m + 1 = floor((n-1) / (2p)) + 1 parallel edges per consecutive hop.

inline int chain_parallel_count(int n, double p) {
    if (n < 2) throw std::invalid_argument("chain: need n >= 2");
    if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("chain: need p in (0, 1]");
    int m = static_cast<int>(std::floor((n - 1) / (2.0 * p)));
    return m + 1;
}

inline Multigraph lower_bound_chain(int n, double p) {
    int width = chain_parallel_count(n, p);
    detail::GraphBuilder b;
    for (int i = 0; i < n; ++i) b.add_vertex();
    for (int hop = 0; hop + 1 < n; ++hop)
        for (int i = 0; i < width; ++i) b.add_edge(hop, hop + 1);
    return Multigraph(b.n, std::move(b.edges), 0, n - 1);
}

// ---------------------------------------------------------------------------
// Seeded random multigraph: a random attachment spanning tree (so an s-t path
// always exists in the full graph) plus edge_factor * n uniformly random
// extra edges; parallel edges allowed, self loops rejected.

inline Multigraph random_multigraph(int n, int edge_factor, std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("random multigraph: need n >= 2");
    if (edge_factor < 0) throw std::invalid_argument("random multigraph: negative edge factor");
    Rng rng(seed);
    detail::GraphBuilder b;
    for (int i = 0; i < n; ++i) b.add_vertex();
    for (int v = 1; v < n; ++v)
        b.add_edge(static_cast<int>(rng.next_below(v)), v);
    for (int i = 0; i < edge_factor * n; ++i) {
        int u = static_cast<int>(rng.next_below(n));
        int v = static_cast<int>(rng.next_below(n - 1));
        if (v >= u) ++v;
        b.add_edge(u, v);
    }
    return Multigraph(b.n, std::move(b.edges), 0, n - 1);
}

// ---------------------------------------------------------------------------
// Gadget JSON carries the graph plus arc annotations so gadget-aware
// algorithms can run on files.

inline nlohmann::json gadget_to_json(const AnnotatedGadget& g) {
    nlohmann::json j = graph_to_json(g.graph);
    nlohmann::json arcs;
    for (const auto& [name, arc] : g.arcs) {
        nlohmann::json a;
        a["kind"] = std::string(1, arc.kind);
        a["from"] = arc.from;
        a["to"] = arc.to;
        a["parts"] = arc.parts;
        arcs[name] = std::move(a);
    }
    j["arcs"] = std::move(arcs);
    j["edge_probability"] = g.edge_probability;
    nlohmann::json params;
    params["kappa"] = g.params.kappa;
    params["kappa_prime"] = g.params.kappa_prime;
    params["epsilon"] = g.params.epsilon;
    params["delta"] = g.params.delta;
    params["ell"] = g.params.ell;
    params["ell_prime"] = g.params.ell_prime;
    j["params"] = std::move(params);
    return j;
}

inline AnnotatedGadget gadget_from_json(const nlohmann::json& j) {
    if (!j.contains("arcs") || !j.contains("params"))
        throw std::invalid_argument("gadget json: missing arcs or params");
    GadgetParams p;
    const auto& pj = j.at("params");
    p.kappa = pj.at("kappa").get<int>();
    p.kappa_prime = pj.at("kappa_prime").get<int>();
    p.epsilon = pj.at("epsilon").get<double>();
    p.delta = pj.at("delta").get<double>();
    p.ell = pj.at("ell").get<int>();
    p.ell_prime = pj.at("ell_prime").get<int>();
    std::map<std::string, ArcInfo> arcs;
    for (auto it = j.at("arcs").begin(); it != j.at("arcs").end(); ++it) {
        ArcInfo a;
        a.kind = it.value().at("kind").get<std::string>().at(0);
        a.from = it.value().at("from").get<int>();
        a.to = it.value().at("to").get<int>();
        a.parts = it.value().at("parts").get<std::vector<std::vector<int>>>();
        arcs[it.key()] = std::move(a);
    }
    return AnnotatedGadget{graph_from_json(j), p, std::move(arcs),
                           j.at("edge_probability").get<double>()};
}

inline void save_gadget(const AnnotatedGadget& g, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << gadget_to_json(g).dump() << '\n';
}

inline AnnotatedGadget load_gadget(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open gadget file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return gadget_from_json(nlohmann::json::parse(buf.str()));
}

} // namespace lazysp
