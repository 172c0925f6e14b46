#include "ogp/polysim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <stdexcept>
#include <unordered_map>

namespace ogp {

bool truncation_applies(const RootedNeighborhood& nb, uint32_t D) { return nb.is_tree() && nb.edges.size() <= D; }

LocalRule d_truncate(const LocalRule& g, uint32_t D) {
    if (D < 1) throw std::invalid_argument("degree cap must be at least 1");
    if (!g.decide) throw std::invalid_argument("truncation needs a {T,F} rule");
    LocalRule t;
    t.name = g.name + "<=" + std::to_string(D);
    t.radius = g.radius;
    auto decide = g.decide;
    t.decide = [decide, D](const RootedNeighborhood& nb) { return truncation_applies(nb, D) ? decide(nb) : Sym::Err; };
    return t;
}

int64_t unround(Sym s) {
    if (s == Sym::T) return 1;
    if (s == Sym::F) return -1;
    throw std::invalid_argument("rule produced err inside the polynomial simulation");
}

RootedNeighborhood tree_neighborhood(const FactorGraph& g, uint32_t v, const std::vector<uint32_t>& edges,
                                     uint32_t radius) {
    RootedNeighborhood nb;
    nb.radius = radius;
    std::vector<uint32_t> order{v};
    nb.depth.push_back(0);
    std::vector<uint8_t> used(edges.size(), 0);
    auto local = [&](uint32_t u) -> int64_t {
        for (size_t i = 0; i < order.size(); ++i)
            if (order[i] == u) return int64_t(i);
        return -1;
    };
    for (size_t h = 0; h < order.size(); ++h) {
        uint32_t u = order[h];
        for (size_t i = 0; i < edges.size(); ++i) {
            if (used[i]) continue;
            const FgEdge& e = g.edges[edges[i]];
            uint32_t a = e.var, c = g.clause_vertex(e.clause);
            if (a != u && c != u) continue;
            uint32_t w = a == u ? c : a;
            if (local(w) >= 0) throw std::invalid_argument("edge set is not a tree");
            used[i] = 1;
            order.push_back(w);
            nb.depth.push_back(nb.depth[h] + 1);
        }
    }
    if (order.size() != edges.size() + 1) throw std::invalid_argument("edge set is not connected to the root");
    uint32_t V = uint32_t(order.size());
    nb.clause.resize(V);
    nb.word.resize(V);
    nb.gid = order;
    nb.adj.assign(V, {});
    for (uint32_t i = 0; i < V; ++i) {
        nb.clause[i] = g.is_clause(order[i]);
        nb.word[i] = g.vword[order[i]];
    }
    for (uint32_t id : edges) {
        const FgEdge& e = g.edges[id];
        uint32_t a = uint32_t(local(e.var)), c = uint32_t(local(g.clause_vertex(e.clause)));
        uint32_t le = uint32_t(nb.edges.size());
        nb.edges.push_back({a, c, e.pos, e.word, id, e.slot});
        nb.adj[a].push_back(le);
        nb.adj[c].push_back(le);
    }
    canonicalize(nb);
    return nb;
}

struct CertHash {
    size_t operator()(const std::vector<uint64_t>& c) const { return fnv1a(c.data(), c.size() * sizeof(uint64_t)); }
};

struct PolySim::Cache {
    std::shared_mutex mu;
    std::unordered_map<std::vector<uint64_t>, int64_t, CertHash> base;
};

PolySim::PolySim(LocalRule g, uint32_t D) : g_(std::move(g)), D_(D), cache_(std::make_unique<Cache>()) {
    if (D_ < 1) throw std::invalid_argument("degree cap must be at least 1");
    if (!g_.decide) throw std::invalid_argument("polynomial simulation needs a {T,F} rule");
}

PolySim::~PolySim() = default;

size_t PolySim::cache_size() const {
    std::shared_lock lk(cache_->mu);
    return cache_->base.size();
}

int64_t PolySim::base_value(const FactorGraph& g, uint32_t v, const std::vector<uint32_t>& edges) {
    RootedNeighborhood nb = tree_neighborhood(g, v, edges, g_.radius);
    {
        std::shared_lock lk(cache_->mu);
        auto it = cache_->base.find(nb.cert);
        if (it != cache_->base.end()) return it->second;
    }
    int64_t val = unround(g_.decide(nb));
    std::unique_lock lk(cache_->mu);
    cache_->base.emplace(std::move(nb.cert), val);
    return val;
}

namespace {

// edges of S whose far endpoint is a leaf
std::vector<uint32_t> leaf_edges(const FactorGraph& g, uint32_t v, const std::vector<uint32_t>& edges) {
    std::map<uint32_t, uint32_t> deg;
    for (uint32_t id : edges) {
        deg[g.edges[id].var]++;
        deg[g.clause_vertex(g.edges[id].clause)]++;
    }
    std::vector<uint32_t> out;
    for (uint32_t id : edges) {
        uint32_t a = g.edges[id].var, c = g.clause_vertex(g.edges[id].clause);
        if ((a != v && deg[a] == 1) || (c != v && deg[c] == 1)) out.push_back(id);
    }
    return out;
}

}  // namespace

int64_t PolySim::coefficient(const FactorGraph& g, uint32_t v, const std::vector<uint32_t>& edges) {
    std::vector<uint32_t> leaves = leaf_edges(g, v, edges);
    if (leaves.size() > 30) throw BudgetExceeded("too many leaves for inclusion-exclusion");
    int64_t h = 0;
    for (uint64_t a = 0; a < (uint64_t(1) << leaves.size()); ++a) {
        std::vector<uint32_t> sub;
        for (uint32_t id : edges) {
            auto it = std::find(leaves.begin(), leaves.end(), id);
            if (it != leaves.end() && ((a >> (it - leaves.begin())) & 1u)) continue;
            sub.push_back(id);
        }
        int64_t val = base_value(g, v, sub);
        h += (std::popcount(a) % 2 ? -val : val);
    }
    return h;
}

std::vector<std::vector<uint32_t>> PolySim::monomials(const FactorGraph& g, uint32_t v) const {
    std::vector<std::vector<uint32_t>> out;
    const uint32_t r = g_.radius, D = D_;
    std::vector<uint32_t> tree, verts{v}, depth{0};
    auto in_tree = [&](uint32_t u) { return std::find(verts.begin(), verts.end(), u) != verts.end(); };
    auto grow = [&](auto&& self, std::vector<uint32_t> cands) -> void {
        out.push_back(tree);
        if (tree.size() == D) return;
        for (size_t i = 0; i < cands.size(); ++i) {
            uint32_t id = cands[i];
            uint32_t a = g.edges[id].var, c = g.clause_vertex(g.edges[id].clause);
            bool a_in = in_tree(a), c_in = in_tree(c);
            if (a_in == c_in) continue;
            uint32_t u = a_in ? a : c, w = a_in ? c : a;
            uint32_t du = depth[std::find(verts.begin(), verts.end(), u) - verts.begin()];
            std::vector<uint32_t> next(cands.begin() + i + 1, cands.end());
            tree.push_back(id);
            verts.push_back(w);
            depth.push_back(du + 1);
            if (du + 1 < r)
                for (auto* p = g.adj_begin(w); p != g.adj_end(w); ++p)
                    if (!in_tree(g.other(*p, w))) next.push_back(*p);
            self(self, next);
            tree.pop_back();
            verts.pop_back();
            depth.pop_back();
        }
    };
    std::vector<uint32_t> start;
    if (r >= 1) start.assign(g.adj_begin(v), g.adj_end(v));
    grow(grow, start);
    return out;
}

int64_t PolySim::value_at(const FactorGraph& g, uint32_t v) {
    // leaf deletions of a monomial are monomials, so each base value is computed once
    std::vector<std::vector<uint32_t>> mons = monomials(g, v);
    std::map<std::vector<uint32_t>, int64_t> base;
    for (auto s : mons) {
        std::vector<uint32_t> key = s;
        std::sort(key.begin(), key.end());
        base.emplace(std::move(key), base_value(g, v, s));
    }
    int64_t f = 0;
    for (auto& s : mons) {
        std::vector<uint32_t> leaves = leaf_edges(g, v, s);
        if (leaves.size() > 30) throw BudgetExceeded("too many leaves for inclusion-exclusion");
        for (uint64_t a = 0; a < (uint64_t(1) << leaves.size()); ++a) {
            std::vector<uint32_t> sub;
            for (uint32_t id : s) {
                auto it = std::find(leaves.begin(), leaves.end(), id);
                if (it != leaves.end() && ((a >> (it - leaves.begin())) & 1u)) continue;
                sub.push_back(id);
            }
            std::sort(sub.begin(), sub.end());
            int64_t val = base.at(sub);
            f += std::popcount(a) % 2 ? -val : val;
        }
    }
    return f;
}

std::vector<double> PolySim::evaluate(const FactorGraph& g) {
    std::vector<double> out(g.n);
    std::exception_ptr err;
    std::mutex mu;
#pragma omp parallel for schedule(dynamic, 4)
    for (int64_t v = 0; v < int64_t(g.n); ++v) {
        try {
            out[v] = double(value_at(g, uint32_t(v)));
        } catch (...) {
            std::lock_guard<std::mutex> lk(mu);
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
    return out;
}

MonteCarloEstimate second_moment(PolySim& sim, uint32_t n, uint32_t m, uint32_t k, uint32_t samples, uint64_t seed) {
    std::vector<double> vals(samples);
    for (uint32_t s = 0; s < samples; ++s) {
        uint64_t sd = derive_seed(seed, s);
        FactorGraph g = build_factor_graph(sample_formula(n, m, k, sd), derive_seed(sd, 2));
        double sq = 0;
        for (double x : sim.evaluate(g)) sq += x * x;
        vals[s] = sq / n;
    }
    MonteCarloEstimate est;
    est.samples = samples;
    if (samples == 0) return est;
    double sum = 0, sum2 = 0;
    for (double x : vals) {
        sum += x;
        sum2 += x * x;
    }
    est.mean = sum / samples;
    if (samples > 1)
        est.se = std::sqrt(std::max(0.0, (sum2 - samples * est.mean * est.mean) / (samples - 1)) / samples);
    return est;
}

}  // namespace ogp
