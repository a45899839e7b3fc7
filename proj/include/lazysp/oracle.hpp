#pragma once

// Edge-evaluation oracles. Every oracle enforces the query protocol (each
// edge asked at most once, ids in range) and records an ordered trace. The
// Bernoulli oracle answers as a pure function of (seed, edge id), so answers
// do not depend on query order and a full realization can be extracted up
// front. The replay oracle answers from a pre-committed coin sequence by
// query position, which is the coupling used by the adversarial analyses.

#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "multigraph.hpp"
#include "rng.hpp"

namespace lazysp {

struct Subgraph {
    std::vector<std::uint8_t> present;

    int edge_count() const { return static_cast<int>(present.size()); }
    bool has(int e) const { return present.at(e) != 0; }
    int present_count() const {
        int c = 0;
        for (auto b : present) c += b ? 1 : 0;
        return c;
    }
};

inline bool operator==(const Subgraph& a, const Subgraph& b) { return a.present == b.present; }

inline Subgraph subgraph_from_mask(int edge_count, std::uint64_t mask) {
    Subgraph s;
    s.present.resize(edge_count);
    for (int e = 0; e < edge_count; ++e) s.present[e] = (mask >> e) & 1 ? 1 : 0;
    return s;
}

inline nlohmann::json subgraph_to_json(const Subgraph& s) {
    nlohmann::json j;
    auto arr = nlohmann::json::array();
    for (auto b : s.present) arr.push_back(b ? 1 : 0);
    j["present"] = std::move(arr);
    return j;
}

inline Subgraph subgraph_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("present"))
        throw std::invalid_argument("subgraph json: expected object with present array");
    Subgraph s;
    for (const auto& item : j.at("present")) {
        int v = item.get<int>();
        if (v != 0 && v != 1)
            throw std::invalid_argument("subgraph json: entries must be 0 or 1");
        s.present.push_back(static_cast<std::uint8_t>(v));
    }
    return s;
}

inline void save_subgraph(const Subgraph& s, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << subgraph_to_json(s).dump() << '\n';
}

inline Subgraph load_subgraph(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open subgraph file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return subgraph_from_json(nlohmann::json::parse(buf.str()));
}

struct TraceEntry {
    int edge;
    bool answer;
};

inline bool operator==(const TraceEntry& a, const TraceEntry& b) {
    return a.edge == b.edge && a.answer == b.answer;
}

using OracleTrace = std::vector<TraceEntry>;

inline int yes_count(const OracleTrace& t) {
    int c = 0;
    for (const auto& e : t) c += e.answer ? 1 : 0;
    return c;
}

class Oracle {
public:
    virtual ~Oracle() = default;

    bool query(int edge) {
        if (edge < 0 || edge >= m_) throw std::out_of_range("oracle: edge id out of range");
        if (asked_[edge]) throw std::logic_error("oracle: duplicate query");
        asked_[edge] = 1;
        bool ans = answer(edge);
        trace_.push_back({edge, ans});
        return ans;
    }

    bool queried(int edge) const {
        if (edge < 0 || edge >= m_) throw std::out_of_range("oracle: edge id out of range");
        return asked_[edge] != 0;
    }

    const OracleTrace& trace() const { return trace_; }
    int query_count() const { return static_cast<int>(trace_.size()); }
    int edge_count() const { return m_; }

protected:
    explicit Oracle(int edge_count) : m_(edge_count), asked_(edge_count, 0) {
        if (edge_count < 0) throw std::invalid_argument("oracle: negative edge count");
    }

    virtual bool answer(int edge) = 0;

private:
    int m_;
    std::vector<std::uint8_t> asked_;
    OracleTrace trace_;
};

class DeterministicOracle : public Oracle {
public:
    explicit DeterministicOracle(Subgraph sub)
        : Oracle(sub.edge_count()), sub_(std::move(sub)) {}

    const Subgraph& subgraph() const { return sub_; }

protected:
    bool answer(int edge) override { return sub_.has(edge); }

private:
    Subgraph sub_;
};

class BernoulliOracle : public Oracle {
public:
    BernoulliOracle(int edge_count, double p, std::uint64_t seed)
        : Oracle(edge_count), uniform_p_(p), seed_(seed) {
        check_prob(p);
    }

    BernoulliOracle(std::vector<double> probs, std::uint64_t seed)
        : Oracle(static_cast<int>(probs.size())), probs_(std::move(probs)), seed_(seed) {
        for (double p : probs_) check_prob(p);
    }

    double probability(int edge) const {
        return probs_.empty() ? uniform_p_ : probs_.at(edge);
    }

    // Pure function of (seed, edge): query order cannot change the answer.
    bool present(int edge) const { return prf_unit(seed_, edge) < probability(edge); }

    Subgraph realize() const {
        Subgraph s;
        s.present.resize(edge_count());
        for (int e = 0; e < edge_count(); ++e) s.present[e] = present(e) ? 1 : 0;
        return s;
    }

    std::uint64_t seed() const { return seed_; }

protected:
    bool answer(int edge) override { return present(edge); }

private:
    static void check_prob(double p) {
        if (!(p >= 0.0 && p <= 1.0))
            throw std::invalid_argument("bernoulli oracle: probability outside [0, 1]");
    }

    std::vector<double> probs_;
    double uniform_p_ = 0.0;
    std::uint64_t seed_;
};

// Answers the i-th query with coins[i] regardless of which edge is asked.
class ReplayOracle : public Oracle {
public:
    ReplayOracle(int edge_count, std::vector<std::uint8_t> coins)
        : Oracle(edge_count), coins_(std::move(coins)) {}

    int consumed() const { return next_; }
    int remaining() const { return static_cast<int>(coins_.size()) - next_; }

protected:
    bool answer(int) override {
        if (next_ >= static_cast<int>(coins_.size()))
            throw std::runtime_error("replay oracle: coin sequence exhausted");
        return coins_[next_++] != 0;
    }

private:
    std::vector<std::uint8_t> coins_;
    int next_ = 0;
};

inline std::vector<std::uint8_t> bernoulli_coins(std::uint64_t seed, int count, double p) {
    std::vector<std::uint8_t> out(count);
    for (int i = 0; i < count; ++i) out[i] = prf_unit(seed, i) < p ? 1 : 0;
    return out;
}

// Subgraph consistent with a trace; unqueried edges take default_present.
// A deterministic algorithm rerun against this subgraph asks the same edges
// in the same order, so the defaults are never consulted.
inline Subgraph induced_subgraph(const OracleTrace& trace, int edge_count,
                                 bool default_present = false) {
    Subgraph s;
    s.present.assign(edge_count, default_present ? 1 : 0);
    for (const auto& entry : trace) s.present.at(entry.edge) = entry.answer ? 1 : 0;
    return s;
}

// ---------------------------------------------------------------------------
// Trace CSV: header step,edge_id,answer with answer in {yes,no}. Readers
// ignore extra columns so the extended run traces stay loadable.

inline void write_trace_csv(std::ostream& out, const OracleTrace& trace) {
    out << "step,edge_id,answer\n";
    for (std::size_t i = 0; i < trace.size(); ++i)
        out << i << ',' << trace[i].edge << ',' << (trace[i].answer ? "yes" : "no") << '\n';
}

inline void save_trace_csv(const OracleTrace& trace, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    write_trace_csv(out, trace);
}

inline OracleTrace read_trace_csv(std::istream& in) {
    OracleTrace trace;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line.rfind("step", 0) == 0) continue; // header
        }
        std::stringstream ss(line);
        std::string step, edge, answer;
        if (!std::getline(ss, step, ',') || !std::getline(ss, edge, ',') ||
            !std::getline(ss, answer, ','))
            throw std::runtime_error("trace csv: malformed line: " + line);
        bool ans;
        if (answer == "yes" || answer == "1")
            ans = true;
        else if (answer == "no" || answer == "0")
            ans = false;
        else
            throw std::runtime_error("trace csv: bad answer field: " + answer);
        trace.push_back({std::stoi(edge), ans});
    }
    return trace;
}

inline OracleTrace load_trace_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open trace file: " + path);
    return read_trace_csv(in);
}

} // namespace lazysp
