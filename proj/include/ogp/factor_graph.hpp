#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "ogp/ksat.hpp"

namespace ogp {

struct FgEdge {
    uint32_t var = 0, clause = 0, slot = 0;
    bool pos = true;
    uint64_t word = 0;
};

// Vertices 0..n-1 are variables, n..n+m-1 clauses. Clause degree need not be uniform
// (balls cut out of a larger graph keep partial clauses).
class FactorGraph {
public:
    uint32_t n = 0, m = 0, k = 0;
    std::vector<uint64_t> vword;
    std::vector<FgEdge> edges;

    FactorGraph() = default;
    FactorGraph(uint32_t n_, uint32_t m_, uint32_t k_) : n(n_), m(m_), k(k_), vword(size_t(n_) + m_, 0) {}

    uint32_t num_vertices() const { return n + m; }
    bool is_clause(uint32_t v) const { return v >= n; }
    uint32_t clause_vertex(uint32_t i) const { return n + i; }
    uint32_t vertex_of(uint32_t e, bool clause_side) const {
        return clause_side ? n + edges[e].clause : edges[e].var;
    }
    uint32_t other(uint32_t e, uint32_t v) const {
        return v >= n ? edges[e].var : n + edges[e].clause;
    }
    const uint32_t* adj_begin(uint32_t v) const { return adj_edge.data() + adj_start[v]; }
    const uint32_t* adj_end(uint32_t v) const { return adj_edge.data() + adj_start[v + 1]; }
    uint32_t degree(uint32_t v) const { return adj_start[v + 1] - adj_start[v]; }

    void finalize();  // builds adjacency; edge ids keep insertion order

private:
    std::vector<uint32_t> adj_start, adj_edge;
};

// edge id = i*k + j (formula slot order)
FactorGraph build_factor_graph(const Formula& f, uint64_t seed);
FactorGraph build_factor_graph(const Formula& f, const std::vector<uint64_t>& vwords,
                               const std::vector<uint64_t>& ewords);
void decoration_words(uint32_t n, uint32_t m, uint32_t k, uint64_t seed, std::vector<uint64_t>& vwords,
                      std::vector<uint64_t>& ewords);

void dump_graph(std::ostream& os, const FactorGraph& g);

// BFS distances from root, capped at maxd (UINT32_MAX beyond)
std::vector<uint32_t> bfs_dist(const FactorGraph& g, uint32_t root, uint32_t maxd);

using EdgeFilter = std::function<bool(uint32_t edge)>;

// Rooted r-ball with canonical vertex order: local index = canonical rank, 0 = root.
struct RootedNeighborhood {
    struct Edge {
        uint32_t var, clause;  // local indices
        bool pos;
        uint64_t word;
        uint32_t gedge;  // global edge id (diagnostic, not part of the class)
        uint32_t slot;
    };
    uint32_t radius = 0;
    std::vector<uint8_t> clause;
    std::vector<uint32_t> depth;
    std::vector<uint64_t> word;
    std::vector<uint32_t> gid;
    std::vector<Edge> edges;
    std::vector<std::vector<uint32_t>> adj;
    std::vector<uint64_t> cert;
    uint64_t cert_hash = 0;

    uint32_t size() const { return uint32_t(clause.size()); }
    uint32_t other(uint32_t e, uint32_t v) const { return clause[v] ? edges[e].var : edges[e].clause; }
    bool is_tree() const { return edges.size() + 1 == clause.size(); }
};

RootedNeighborhood neighborhood(const FactorGraph& g, uint32_t root, uint32_t r, const EdgeFilter& alive = {});

// canonicalizes a neighborhood built by hand (vertex 0 must be the root)
void canonicalize(RootedNeighborhood& nb, uint64_t leaf_budget = 1u << 20);

struct BallStats {
    uint32_t vertices = 0, edges = 0;
    bool tree() const { return edges + 1 == vertices; }
};
BallStats ball_stats(const FactorGraph& g, uint32_t root, uint32_t r);

bool is_r_locally_small(const FactorGraph& g, uint32_t r);

struct GWTree {
    double d1 = 0;
    uint32_t d2 = 0, depth = 0;
    std::vector<uint32_t> parent, layer;
    std::vector<uint8_t> pos;  // polarity of the edge to the parent
    std::vector<uint64_t> vword, eword;
    std::vector<uint32_t> children;
    size_t size() const { return parent.size(); }
    size_t layer_size(uint32_t l) const;
};

GWTree sample_dgw(double d1, uint32_t d2, uint32_t depth, uint64_t seed);
FactorGraph gw_to_graph(const GWTree& t);  // root becomes variable 0

struct TailRow {
    double lambda = 0, dfg = 0, dgw = 0;
};

// empirical P[|N_2r| > lambda (d1 d2)^r]
std::vector<double> dgw_tail(double d1, uint32_t d2, uint32_t r, const std::vector<double>& lambdas,
                             uint32_t samples, uint64_t seed);
std::vector<double> dfg_tail(uint32_t n, uint32_t m, uint32_t k, uint32_t r, const std::vector<double>& lambdas,
                             uint32_t graphs, uint32_t roots_per_graph, uint64_t seed);

using LocalStatistic = std::function<double(const FactorGraph&, uint32_t root)>;

struct StatComparison {
    double dfg_mean = 0, dfg_se = 0, dgw_mean = 0, dgw_se = 0;
    double diff() const { return dfg_mean - dgw_mean; }
};

StatComparison compare_local_statistic(uint32_t n, uint32_t m, uint32_t k, uint32_t radius, const LocalStatistic& stat,
                                       uint32_t graphs, uint32_t roots_per_graph, uint32_t trees, uint64_t seed);

}  // namespace ogp
