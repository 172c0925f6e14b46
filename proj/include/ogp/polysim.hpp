#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "ogp/local_engine.hpp"
#include "ogp/overlap.hpp"

namespace ogp {

// err unless the r-ball is a tree with at most D edges
LocalRule d_truncate(const LocalRule& g, uint32_t D);
bool truncation_applies(const RootedNeighborhood& nb, uint32_t D);

int64_t unround(Sym s);  // T -> +1, F -> -1

class PolySim {
public:
    PolySim(LocalRule g, uint32_t D);
    ~PolySim();
    PolySim(const PolySim&) = delete;
    PolySim& operator=(const PolySim&) = delete;

    const LocalRule& rule() const { return g_; }
    uint32_t degree() const { return D_; }

    // sum of h(S) over every rooted subtree S of v with depth <= r and |S| <= D
    int64_t value_at(const FactorGraph& g, uint32_t v);
    std::vector<double> evaluate(const FactorGraph& g);

    // h(S) for a rooted subtree given by global edge ids
    int64_t coefficient(const FactorGraph& g, uint32_t v, const std::vector<uint32_t>& edges);
    // unround(g) on the tree S alone
    int64_t base_value(const FactorGraph& g, uint32_t v, const std::vector<uint32_t>& edges);

    // rooted subtrees of v (edge id lists), depth <= r and size <= D
    std::vector<std::vector<uint32_t>> monomials(const FactorGraph& g, uint32_t v) const;

    size_t cache_size() const;

private:
    LocalRule g_;
    uint32_t D_;
    struct Cache;
    std::unique_ptr<Cache> cache_;
};

// neighborhood of v formed by the given edges only (must form a tree through v)
RootedNeighborhood tree_neighborhood(const FactorGraph& g, uint32_t v, const std::vector<uint32_t>& edges,
                                     uint32_t radius);

// Monte Carlo E|f|^2 / n over Phi_k(n, m) with fresh decorations
MonteCarloEstimate second_moment(PolySim& sim, uint32_t n, uint32_t m, uint32_t k, uint32_t samples, uint64_t seed);

}  // namespace ogp
