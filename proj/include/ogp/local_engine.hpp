#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ogp/factor_graph.hpp"

namespace ogp {

struct LocalRule {
    std::string name;
    uint32_t radius = 0;
    // exactly one of these is set: decide for {T,F} rules, prob for [0,1] rules
    std::function<Sym(const RootedNeighborhood&)> decide;
    std::function<double(const RootedNeighborhood&)> prob;
};

Assignment run_local(const LocalRule& rule, const FactorGraph& g);
Assignment run_local_serial(const LocalRule& rule, const FactorGraph& g);

// processing order of the memory engine: ascending (vertex word, vertex id)
inline bool psi_less(const FactorGraph& g, uint32_t a, uint32_t b) {
    return g.vword[a] != g.vword[b] ? g.vword[a] < g.vword[b] : a < b;
}
std::vector<uint32_t> psi_order(const FactorGraph& g);

class DistanceProbe {
public:
    explicit DistanceProbe(uint32_t vertices = 0);
    void resize(uint32_t vertices);
    // true iff dist(s,t) <= r, via bounded bidirectional BFS
    bool within(const FactorGraph& g, uint32_t s, uint32_t t, uint32_t r);

private:
    std::vector<uint32_t> stamp_a, stamp_b;
    uint32_t epoch = 0;
    std::vector<uint32_t> fa, fb, next;
};

class MemoryContext {
public:
    MemoryContext(const FactorGraph& g, std::vector<uint64_t>& mu, uint32_t self, uint32_t radius,
                  DistanceProbe& probe, bool check_reads);

    uint32_t self() const { return self_; }
    uint32_t radius() const { return radius_; }
    const FactorGraph& graph() const { return g_; }

    uint64_t get(uint32_t v);
    void set(uint32_t v, uint64_t value);
    // incident edge ids of v; v must be strictly inside the ball when reads are checked
    std::pair<const uint32_t*, const uint32_t*> edges_of(uint32_t v);

private:
    const FactorGraph& g_;
    std::vector<uint64_t>& mu_;
    uint32_t self_, radius_;
    DistanceProbe& probe_;
    bool check_reads_;
    void require(uint32_t v, uint32_t r, const char* what);
};

struct MemoryRule {
    std::string name;
    uint32_t radius = 0;
    std::function<void(MemoryContext&)> step;
    std::function<Sym(uint64_t)> finalize;
};

struct MemoryRunOptions {
    bool check_reads = false;
};

struct MemoryRun {
    Assignment x;
    std::vector<uint64_t> mu;
};

MemoryRun run_local_memory(const MemoryRule& rule, const FactorGraph& g, const MemoryRunOptions& opt = {});

// coin of the sequential algorithm, derived from the variable's decoration word
double sequential_coin(uint64_t vword);

// direct implementation: rebuilds the simplified graph before every decision
Assignment run_sequential_local(const LocalRule& rule, const FactorGraph& g);
// the same algorithm expressed as a memory rule of radius max(r, 2)
MemoryRule sequential_as_memory(const LocalRule& rule);

// ball N_R(v) as a stand-alone graph; vertex 0 of the result is v when v is a variable
struct BallGraph {
    FactorGraph g;
    uint32_t root = 0;
};
BallGraph ball_graph(const FactorGraph& g, uint32_t v, uint32_t R);
FactorGraph graph_from_neighborhood(const RootedNeighborhood& nb, uint32_t k);

Sym simulate_at(const MemoryRule& rule, const FactorGraph& g, uint32_t v, uint32_t R);
Assignment run_r_local_simulation(const MemoryRule& rule, const FactorGraph& g, uint32_t R);
// R-local rule that replays the memory algorithm on the canonical R-ball
LocalRule r_local_simulation(const MemoryRule& rule, uint32_t R, uint32_t k);

struct InsulationReport {
    std::vector<uint8_t> insulated;          // sound variant (first hop unconstrained)
    std::vector<uint8_t> insulated_literal;  // chains decreasing from the root itself
    std::vector<uint32_t> chain_states;      // dependence states explored (sound variant)
};

// generic graph form: adjacency lists, priority keys (ties by index), hop length and outer radius
InsulationReport insulation_report(const std::vector<std::vector<uint32_t>>& adj, const std::vector<uint64_t>& psi,
                                   uint32_t hop, uint32_t R, const std::vector<uint32_t>& roots = {});
// factor graph form: hop = 2r, ψ from vertex words, roots = variables
InsulationReport insulation_report(const FactorGraph& g, uint32_t r, uint32_t R);
std::vector<std::vector<uint32_t>> adjacency_lists(const FactorGraph& g);

}  // namespace ogp
