#pragma once

#include <algorithm>
#include <numeric>

#include "ogp/factor_graph.hpp"

namespace testutil {

using namespace ogp;

struct Relabeled {
    FactorGraph g;
    std::vector<uint32_t> vmap;  // old vertex -> new vertex
};

// permutes variables, clauses and slots inside each clause, carrying every decoration along
inline Relabeled relabel(const Formula& f, const FactorGraph& g, uint64_t seed) {
    Rng rng(seed);
    std::vector<uint32_t> pv(f.n), pc(f.m);
    std::iota(pv.begin(), pv.end(), 0);
    std::iota(pc.begin(), pc.end(), 0);
    std::shuffle(pv.begin(), pv.end(), rng);
    std::shuffle(pc.begin(), pc.end(), rng);
    Formula h(f.n, f.m, f.k);
    std::vector<uint64_t> vw(f.n + f.m), ew(f.slots());
    for (uint32_t v = 0; v < f.n; ++v) vw[pv[v]] = g.vword[v];
    for (uint32_t i = 0; i < f.m; ++i) {
        vw[f.n + pc[i]] = g.vword[f.n + i];
        std::vector<uint32_t> ps(f.k);
        std::iota(ps.begin(), ps.end(), 0);
        std::shuffle(ps.begin(), ps.end(), rng);
        for (uint32_t j = 0; j < f.k; ++j) {
            Literal l = f.at(i, j);
            h.set(pc[i], ps[j], {pv[l.var], l.pos});
            ew[size_t(pc[i]) * f.k + ps[j]] = g.edges[size_t(i) * f.k + j].word;
        }
    }
    Relabeled r{build_factor_graph(h, vw, ew), {}};
    r.vmap.resize(f.n + f.m);
    for (uint32_t v = 0; v < f.n; ++v) r.vmap[v] = pv[v];
    for (uint32_t i = 0; i < f.m; ++i) r.vmap[f.n + i] = f.n + pc[i];
    return r;
}

}  // namespace testutil
