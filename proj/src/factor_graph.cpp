#include "ogp/factor_graph.hpp"

#include <algorithm>
#include <array>
#include <tuple>
#include <unordered_map>
#include <cmath>
#include <deque>
#include <numeric>
#include <ostream>

namespace ogp {

void FactorGraph::finalize() {
    uint32_t V = num_vertices();
    adj_start.assign(V + 1, 0);
    for (auto& e : edges) {
        adj_start[e.var + 1]++;
        adj_start[n + e.clause + 1]++;
    }
    for (uint32_t v = 0; v < V; ++v) adj_start[v + 1] += adj_start[v];
    adj_edge.assign(adj_start[V], 0);
    std::vector<uint32_t> fill(adj_start.begin(), adj_start.end() - 1);
    for (uint32_t id = 0; id < edges.size(); ++id) {
        adj_edge[fill[edges[id].var]++] = id;
        adj_edge[fill[n + edges[id].clause]++] = id;
    }
}

void decoration_words(uint32_t n, uint32_t m, uint32_t k, uint64_t seed, std::vector<uint64_t>& vwords,
                      std::vector<uint64_t>& ewords) {
    Rng rv = make_rng(seed, 0xD1), re = make_rng(seed, 0xD2);
    vwords.resize(size_t(n) + m);
    for (auto& w : vwords) w = rv();
    ewords.resize(size_t(m) * k);
    for (auto& w : ewords) w = re();
}

FactorGraph build_factor_graph(const Formula& f, const std::vector<uint64_t>& vwords,
                               const std::vector<uint64_t>& ewords) {
    if (vwords.size() != size_t(f.n) + f.m || ewords.size() != f.slots())
        throw std::invalid_argument("decoration sizes do not match formula");
    FactorGraph g(f.n, f.m, f.k);
    g.vword = vwords;
    g.edges.resize(f.slots());
    for (uint32_t i = 0; i < f.m; ++i)
        for (uint32_t j = 0; j < f.k; ++j) {
            size_t e = size_t(i) * f.k + j;
            Literal l = f.at(i, j);
            g.edges[e] = {l.var, i, j, l.pos, ewords[e]};
        }
    g.finalize();
    return g;
}

FactorGraph build_factor_graph(const Formula& f, uint64_t seed) {
    std::vector<uint64_t> vw, ew;
    decoration_words(f.n, f.m, f.k, seed, vw, ew);
    return build_factor_graph(f, vw, ew);
}

void dump_graph(std::ostream& os, const FactorGraph& g) {
    for (uint32_t v = 0; v < g.n; ++v) os << "V " << v << ' ' << g.vword[v] << '\n';
    for (uint32_t c = 0; c < g.m; ++c) os << "C " << c << ' ' << g.vword[g.n + c] << '\n';
    for (auto& e : g.edges)
        os << "E " << e.var << ' ' << e.clause << ' ' << e.slot << ' ' << (e.pos ? 'T' : 'F') << ' ' << e.word
           << '\n';
}

std::vector<uint32_t> bfs_dist(const FactorGraph& g, uint32_t root, uint32_t maxd) {
    std::vector<uint32_t> d(g.num_vertices(), UINT32_MAX);
    std::vector<uint32_t> q{root};
    d[root] = 0;
    for (size_t h = 0; h < q.size(); ++h) {
        uint32_t v = q[h];
        if (d[v] == maxd) continue;
        for (auto* p = g.adj_begin(v); p != g.adj_end(v); ++p) {
            uint32_t w = g.other(*p, v);
            if (d[w] == UINT32_MAX) {
                d[w] = d[v] + 1;
                q.push_back(w);
            }
        }
    }
    return d;
}

namespace {

using Sig = std::vector<uint64_t>;

// assigns dense ranks to signatures; returns class count
uint32_t rank_by(const std::vector<Sig>& sig, std::vector<uint32_t>& color) {
    uint32_t V = uint32_t(sig.size());
    std::vector<uint32_t> ord(V);
    std::iota(ord.begin(), ord.end(), 0);
    std::sort(ord.begin(), ord.end(), [&](uint32_t a, uint32_t b) { return sig[a] < sig[b]; });
    color.assign(V, 0);
    uint32_t c = 0;
    for (uint32_t i = 0; i < V; ++i) {
        if (i > 0 && sig[ord[i]] != sig[ord[i - 1]]) ++c;
        color[ord[i]] = c;
    }
    return V ? c + 1 : 0;
}

struct Refiner {
    const RootedNeighborhood& nb;

    uint32_t refine(std::vector<uint32_t>& color) const {
        uint32_t V = nb.size();
        uint32_t classes = 0;
        {
            std::vector<uint32_t> tmp = color;
            classes = rank_by(to_sig(tmp), color);
        }
        std::vector<Sig> sig(V);
        while (true) {
            for (uint32_t v = 0; v < V; ++v) {
                Sig& s = sig[v];
                s.clear();
                s.push_back(color[v]);
                std::vector<std::array<uint64_t, 3>> nbr;
                nbr.reserve(nb.adj[v].size());
                for (uint32_t e : nb.adj[v])
                    nbr.push_back({uint64_t(nb.edges[e].pos), nb.edges[e].word, color[nb.other(e, v)]});
                std::sort(nbr.begin(), nbr.end());
                for (auto& t : nbr) s.insert(s.end(), t.begin(), t.end());
            }
            std::vector<uint32_t> next;
            uint32_t c = rank_by(sig, next);
            color.swap(next);
            if (c == classes) return c;
            classes = c;
        }
    }

    static std::vector<Sig> to_sig(const std::vector<uint32_t>& color) {
        std::vector<Sig> s(color.size());
        for (size_t i = 0; i < color.size(); ++i) s[i] = {color[i]};
        return s;
    }

    Sig certificate(const std::vector<uint32_t>& rank) const {
        uint32_t V = nb.size();
        std::vector<uint32_t> inv(V);
        for (uint32_t v = 0; v < V; ++v) inv[rank[v]] = v;
        Sig c;
        c.reserve(3 + 3 * V + 4 * nb.edges.size());
        c.push_back(V);
        c.push_back(nb.edges.size());
        for (uint32_t i = 0; i < V; ++i) {
            uint32_t v = inv[i];
            c.push_back(uint64_t(nb.clause[v]) << 32 | nb.depth[v]);
            c.push_back(nb.word[v]);
        }
        std::vector<std::array<uint64_t, 4>> es;
        es.reserve(nb.edges.size());
        for (auto& e : nb.edges) es.push_back({rank[e.var], rank[e.clause], uint64_t(e.pos), e.word});
        std::sort(es.begin(), es.end());
        for (auto& t : es) c.insert(c.end(), t.begin(), t.end());
        return c;
    }
};

struct Search {
    const Refiner& R;
    bool tree;
    uint64_t budget;
    uint64_t leaves = 0;
    Sig best;
    std::vector<uint32_t> best_rank;

    void run(std::vector<uint32_t> color, uint32_t classes) {
        uint32_t V = uint32_t(color.size());
        if (classes == V) {
            if (++leaves > budget) throw BudgetExceeded("canonical form search exceeded leaf budget");
            Sig c = R.certificate(color);
            if (best_rank.empty() || c < best) {
                best = std::move(c);
                best_rank = color;
            }
            return;
        }
        // first non-singleton cell by color value
        std::vector<uint32_t> count(classes, 0);
        for (uint32_t c : color) count[c]++;
        uint32_t target = 0;
        while (count[target] < 2) ++target;
        for (uint32_t v = 0; v < V; ++v) {
            if (color[v] != target) continue;
            std::vector<uint32_t> c2(V);
            for (uint32_t u = 0; u < V; ++u) c2[u] = 2 * color[u] + (color[u] == target && u != v ? 1 : 0);
            uint32_t k = R.refine(c2);
            run(std::move(c2), k);
            // color refinement yields orbits on trees, so one branch suffices there
            if (tree) break;
        }
    }
};

}  // namespace

void canonicalize(RootedNeighborhood& nb, uint64_t leaf_budget) {
    uint32_t V = nb.size();
    if (V == 0) return;
    Refiner R{nb};
    std::vector<Sig> init(V);
    for (uint32_t v = 0; v < V; ++v)
        init[v] = {nb.depth[v], nb.clause[v], uint64_t(nb.adj[v].size()), nb.word[v]};
    std::vector<uint32_t> color;
    rank_by(init, color);
    uint32_t classes = R.refine(color);
    Search S{R, nb.is_tree(), leaf_budget, 0, {}, {}};
    S.run(color, classes);
    const std::vector<uint32_t>& rank = S.best_rank;

    RootedNeighborhood out;
    out.radius = nb.radius;
    out.clause.resize(V);
    out.depth.resize(V);
    out.word.resize(V);
    out.gid.resize(V);
    for (uint32_t v = 0; v < V; ++v) {
        uint32_t r = rank[v];
        out.clause[r] = nb.clause[v];
        out.depth[r] = nb.depth[v];
        out.word[r] = nb.word[v];
        out.gid[r] = nb.gid[v];
    }
    out.edges.reserve(nb.edges.size());
    for (auto e : nb.edges) {
        e.var = rank[e.var];
        e.clause = rank[e.clause];
        out.edges.push_back(e);
    }
    std::sort(out.edges.begin(), out.edges.end(), [](const auto& a, const auto& b) {
        return std::tie(a.var, a.clause, a.pos, a.word) < std::tie(b.var, b.clause, b.pos, b.word);
    });
    out.adj.assign(V, {});
    for (uint32_t e = 0; e < out.edges.size(); ++e) {
        out.adj[out.edges[e].var].push_back(e);
        out.adj[out.edges[e].clause].push_back(e);
    }
    out.cert = std::move(S.best);
    out.cert_hash = fnv1a(out.cert.data(), out.cert.size() * sizeof(uint64_t));
    nb = std::move(out);
}

RootedNeighborhood neighborhood(const FactorGraph& g, uint32_t root, uint32_t r, const EdgeFilter& alive) {
    RootedNeighborhood nb;
    nb.radius = r;
    std::vector<uint32_t> order{root};
    std::unordered_map<uint32_t, uint32_t> idx;
    idx[root] = 0;
    nb.depth.push_back(0);
    for (size_t h = 0; h < order.size(); ++h) {
        uint32_t v = order[h];
        uint32_t d = nb.depth[h];
        if (d == r) continue;
        for (auto* p = g.adj_begin(v); p != g.adj_end(v); ++p) {
            if (alive && !alive(*p)) continue;
            uint32_t w = g.other(*p, v);
            if (idx.emplace(w, uint32_t(order.size())).second) {
                order.push_back(w);
                nb.depth.push_back(d + 1);
            }
        }
    }
    uint32_t V = uint32_t(order.size());
    nb.clause.resize(V);
    nb.word.resize(V);
    nb.gid = order;
    nb.adj.assign(V, {});
    for (uint32_t i = 0; i < V; ++i) {
        nb.clause[i] = g.is_clause(order[i]);
        nb.word[i] = g.vword[order[i]];
    }
    // induced edges: each edge once, seen from its variable endpoint
    for (uint32_t i = 0; i < V; ++i) {
        if (nb.clause[i]) continue;
        uint32_t v = order[i];
        for (auto* p = g.adj_begin(v); p != g.adj_end(v); ++p) {
            if (alive && !alive(*p)) continue;
            auto it = idx.find(g.other(*p, v));
            if (it == idx.end()) continue;
            const FgEdge& e = g.edges[*p];
            uint32_t id = uint32_t(nb.edges.size());
            nb.edges.push_back({i, it->second, e.pos, e.word, *p, e.slot});
            nb.adj[i].push_back(id);
            nb.adj[it->second].push_back(id);
        }
    }
    canonicalize(nb);
    return nb;
}

BallStats ball_stats(const FactorGraph& g, uint32_t root, uint32_t r) {
    std::unordered_map<uint32_t, uint32_t> d;
    std::vector<uint32_t> q{root};
    d[root] = 0;
    BallStats s;
    for (size_t h = 0; h < q.size(); ++h) {
        uint32_t v = q[h];
        uint32_t dv = d[v];
        for (auto* p = g.adj_begin(v); p != g.adj_end(v); ++p) {
            uint32_t w = g.other(*p, v);
            auto it = d.find(w);
            if (it == d.end()) {
                if (dv == r) continue;
                d[w] = dv + 1;
                q.push_back(w);
                if (!g.is_clause(v)) ++s.edges;
            } else if (!g.is_clause(v)) {
                ++s.edges;
            }
        }
    }
    s.vertices = uint32_t(q.size());
    return s;
}

bool is_r_locally_small(const FactorGraph& g, uint32_t r) {
    double cap = std::cbrt(double(g.n));
    for (uint32_t v = 0; v < g.n; ++v) {
        std::unordered_map<uint32_t, uint32_t> d;
        std::vector<uint32_t> q{v};
        d[v] = 0;
        for (size_t h = 0; h < q.size(); ++h) {
            uint32_t u = q[h];
            if (d[u] == r) continue;
            for (auto* p = g.adj_begin(u); p != g.adj_end(u); ++p) {
                uint32_t w = g.other(*p, u);
                if (d.emplace(w, d[u] + 1).second) q.push_back(w);
            }
            if (double(q.size()) > cap) return false;
        }
        if (double(q.size()) > cap) return false;
    }
    return true;
}

size_t GWTree::layer_size(uint32_t l) const { return size_t(std::count(layer.begin(), layer.end(), l)); }

GWTree sample_dgw(double d1, uint32_t d2, uint32_t depth, uint64_t seed) {
    if (!(d1 > 0) || d2 < 1) throw std::invalid_argument("sample_dgw: need d1 > 0, d2 >= 1");
    GWTree t;
    t.d1 = d1;
    t.d2 = d2;
    t.depth = depth;
    Rng rng = make_rng(seed, 0x6A);
    std::poisson_distribution<uint32_t> pois(d1);
    std::bernoulli_distribution coin(0.5);
    auto add = [&](uint32_t parent, uint32_t layer) {
        t.parent.push_back(parent);
        t.layer.push_back(layer);
        t.pos.push_back(parent == UINT32_MAX ? 0 : coin(rng));
        t.vword.push_back(rng());
        t.eword.push_back(parent == UINT32_MAX ? 0 : rng());
        t.children.push_back(0);
    };
    add(UINT32_MAX, 0);
    size_t begin = 0;
    for (uint32_t l = 0; l < depth; ++l) {
        size_t end = t.size();
        for (size_t v = begin; v < end; ++v) {
            uint32_t c = (l % 2 == 0) ? pois(rng) : d2;
            t.children[v] = c;
            for (uint32_t i = 0; i < c; ++i) add(uint32_t(v), l + 1);
        }
        begin = end;
    }
    return t;
}

FactorGraph gw_to_graph(const GWTree& t) {
    std::vector<uint32_t> local(t.size());
    uint32_t nv = 0, nc = 0;
    for (size_t v = 0; v < t.size(); ++v) local[v] = (t.layer[v] % 2 == 0) ? nv++ : nc++;
    FactorGraph g(nv, nc, t.d2 + 1);
    std::vector<uint32_t> slot(nc, 0);
    for (size_t v = 0; v < t.size(); ++v) {
        bool cl = t.layer[v] % 2 == 1;
        g.vword[cl ? nv + local[v] : local[v]] = t.vword[v];
        if (t.parent[v] == UINT32_MAX) continue;
        uint32_t p = t.parent[v];
        uint32_t var = cl ? local[p] : local[v];
        uint32_t cla = cl ? local[v] : local[p];
        g.edges.push_back({var, cla, slot[cla]++, bool(t.pos[v]), t.eword[v]});
    }
    g.finalize();
    return g;
}

std::vector<double> dgw_tail(double d1, uint32_t d2, uint32_t r, const std::vector<double>& lambdas,
                             uint32_t samples, uint64_t seed) {
    std::vector<double> out(lambdas.size(), 0.0);
    double scale = std::pow(d1 * d2, double(r));
    for (uint32_t s = 0; s < samples; ++s) {
        GWTree t = sample_dgw(d1, d2, 2 * r, derive_seed(seed, s));
        for (size_t i = 0; i < lambdas.size(); ++i) out[i] += double(t.size()) > lambdas[i] * scale;
    }
    for (auto& v : out) v /= samples;
    return out;
}

std::vector<double> dfg_tail(uint32_t n, uint32_t m, uint32_t k, uint32_t r, const std::vector<double>& lambdas,
                             uint32_t graphs, uint32_t roots_per_graph, uint64_t seed) {
    std::vector<double> out(lambdas.size(), 0.0);
    double d1 = double(k) * m / n, d2 = k - 1.0;
    double scale = std::pow(d1 * d2, double(r));
    uint64_t total = 0;
    for (uint32_t s = 0; s < graphs; ++s) {
        Formula f = sample_formula(n, m, k, derive_seed(seed, s));
        FactorGraph g = build_factor_graph(f, derive_seed(seed, 1000000 + s));
        for (uint32_t v = 0; v < std::min(n, roots_per_graph); ++v) {
            BallStats b = ball_stats(g, v, 2 * r);
            for (size_t i = 0; i < lambdas.size(); ++i) out[i] += double(b.vertices) > lambdas[i] * scale;
            ++total;
        }
    }
    for (auto& v : out) v /= double(total);
    return out;
}

StatComparison compare_local_statistic(uint32_t n, uint32_t m, uint32_t k, uint32_t radius, const LocalStatistic& stat,
                                       uint32_t graphs, uint32_t roots_per_graph, uint32_t trees, uint64_t seed) {
    auto mean_se = [](const std::vector<double>& xs, double& mean, double& se) {
        double s = 0, s2 = 0;
        for (double x : xs) {
            s += x;
            s2 += x * x;
        }
        double N = double(xs.size());
        mean = s / N;
        double var = std::max(0.0, s2 / N - mean * mean);
        se = std::sqrt(var / N);
    };
    StatComparison out;
    // DFG side: mean over graphs of per-graph root averages (roots within a graph are correlated)
    std::vector<double> per_graph;
    std::vector<double> all_roots;
    for (uint32_t s = 0; s < graphs; ++s) {
        Formula f = sample_formula(n, m, k, derive_seed(seed, 2 * s));
        FactorGraph g = build_factor_graph(f, derive_seed(seed, 2 * s + 1));
        double acc = 0;
        uint32_t R = std::min(n, roots_per_graph);
        for (uint32_t v = 0; v < R; ++v) {
            double x = stat(g, v);
            acc += x;
            all_roots.push_back(x);
        }
        per_graph.push_back(acc / R);
    }
    mean_se(all_roots, out.dfg_mean, out.dfg_se);
    if (per_graph.size() > 1) {
        double gm, gse;
        mean_se(per_graph, gm, gse);
        out.dfg_se = std::max(out.dfg_se, gse * std::sqrt(double(per_graph.size()) / (per_graph.size() - 1)));
    }
    std::vector<double> tv;
    double d1 = double(k) * m / n;
    for (uint32_t s = 0; s < trees; ++s) {
        GWTree t = sample_dgw(d1, k - 1, radius, derive_seed(seed ^ 0x7777, s));
        FactorGraph g = gw_to_graph(t);
        tv.push_back(stat(g, 0));
    }
    mean_se(tv, out.dgw_mean, out.dgw_se);
    return out;
}

}  // namespace ogp
