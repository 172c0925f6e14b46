#include "ogp/local_engine.hpp"

#include <algorithm>
#include <exception>
#include <mutex>
#include <numeric>
#include <unordered_map>

namespace ogp {

namespace {

Sym eval_decide(const LocalRule& rule, const FactorGraph& g, uint32_t v) {
    try {
        RootedNeighborhood nb = neighborhood(g, v, rule.radius);
        return rule.decide(nb);
    } catch (const std::exception& e) {
        throw std::runtime_error("rule '" + rule.name + "' failed at vertex " + std::to_string(v) + ": " + e.what());
    }
}

void require_decide(const LocalRule& rule) {
    if (!rule.decide) throw std::invalid_argument("rule '" + rule.name + "' has no {T,F} codomain");
}

}  // namespace

Assignment run_local_serial(const LocalRule& rule, const FactorGraph& g) {
    require_decide(rule);
    Assignment x(g.n);
    for (uint32_t v = 0; v < g.n; ++v) x[v] = eval_decide(rule, g, v);
    return x;
}

Assignment run_local(const LocalRule& rule, const FactorGraph& g) {
    require_decide(rule);
    Assignment x(g.n);
    std::exception_ptr err;
    std::mutex mu;
#pragma omp parallel for schedule(dynamic, 16)
    for (int64_t v = 0; v < int64_t(g.n); ++v) {
        try {
            x[v] = eval_decide(rule, g, uint32_t(v));
        } catch (...) {
            std::lock_guard<std::mutex> lk(mu);
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
    return x;
}

std::vector<uint32_t> psi_order(const FactorGraph& g) {
    std::vector<uint32_t> ord(g.num_vertices());
    std::iota(ord.begin(), ord.end(), 0);
    std::sort(ord.begin(), ord.end(), [&](uint32_t a, uint32_t b) { return psi_less(g, a, b); });
    return ord;
}

DistanceProbe::DistanceProbe(uint32_t vertices) { resize(vertices); }

void DistanceProbe::resize(uint32_t vertices) {
    stamp_a.assign(vertices, 0);
    stamp_b.assign(vertices, 0);
    epoch = 0;
}

bool DistanceProbe::within(const FactorGraph& g, uint32_t s, uint32_t t, uint32_t r) {
    if (s == t) return true;
    if (r == 0) return false;
    if (++epoch == 0) {
        std::fill(stamp_a.begin(), stamp_a.end(), 0);
        std::fill(stamp_b.begin(), stamp_b.end(), 0);
        epoch = 1;
    }
    fa.assign(1, s);
    fb.assign(1, t);
    stamp_a[s] = epoch;
    stamp_b[t] = epoch;
    uint32_t da = 0, db = 0;
    while (da + db < r) {
        bool from_a = fa.size() <= fb.size();
        auto& front = from_a ? fa : fb;
        auto& mine = from_a ? stamp_a : stamp_b;
        auto& theirs = from_a ? stamp_b : stamp_a;
        if (front.empty()) return false;
        next.clear();
        for (uint32_t u : front)
            for (auto* p = g.adj_begin(u); p != g.adj_end(u); ++p) {
                uint32_t w = g.other(*p, u);
                if (theirs[w] == epoch) return true;
                if (mine[w] != epoch) {
                    mine[w] = epoch;
                    next.push_back(w);
                }
            }
        front.swap(next);
        (from_a ? da : db)++;
    }
    return false;
}

MemoryContext::MemoryContext(const FactorGraph& g, std::vector<uint64_t>& mu, uint32_t self, uint32_t radius,
                             DistanceProbe& probe, bool check_reads)
    : g_(g), mu_(mu), self_(self), radius_(radius), probe_(probe), check_reads_(check_reads) {}

void MemoryContext::require(uint32_t v, uint32_t r, const char* what) {
    if (v >= g_.num_vertices() || !probe_.within(g_, self_, v, r))
        throw ContractViolation(std::string("memory rule ") + what + " outside its ball: vertex " + std::to_string(v) +
                                " from " + std::to_string(self_));
}

uint64_t MemoryContext::get(uint32_t v) {
    if (check_reads_) require(v, radius_, "read");
    return mu_[v];
}

void MemoryContext::set(uint32_t v, uint64_t value) {
    require(v, radius_, "write");
    mu_[v] = value;
}

std::pair<const uint32_t*, const uint32_t*> MemoryContext::edges_of(uint32_t v) {
    if (check_reads_ && radius_ > 0) require(v, radius_ - 1, "adjacency read");
    if (check_reads_ && radius_ == 0) throw ContractViolation("radius-0 memory rule cannot read adjacency");
    return {g_.adj_begin(v), g_.adj_end(v)};
}

MemoryRun run_local_memory(const MemoryRule& rule, const FactorGraph& g, const MemoryRunOptions& opt) {
    MemoryRun run;
    run.mu.assign(g.num_vertices(), 0);
    DistanceProbe probe(g.num_vertices());
    for (uint32_t v : psi_order(g)) {
        MemoryContext ctx(g, run.mu, v, rule.radius, probe, opt.check_reads);
        rule.step(ctx);
    }
    run.x.resize(g.n);
    for (uint32_t v = 0; v < g.n; ++v) run.x[v] = rule.finalize(run.mu[v]);
    return run;
}

double sequential_coin(uint64_t vword) { return word_to_unit(splitmix64(vword ^ 0x5eb1c0a7d00dULL)); }

Assignment run_sequential_local(const LocalRule& rule, const FactorGraph& g) {
    if (!rule.prob) throw std::invalid_argument("sequential rule needs a probability codomain");
    std::vector<uint8_t> edge_alive(g.edges.size(), 1), clause_alive(g.m, 1);
    Assignment x(g.n, Sym::Err);
    std::vector<uint32_t> vars;
    for (uint32_t v : psi_order(g))
        if (!g.is_clause(v)) vars.push_back(v);
    for (uint32_t v : vars) {
        // simplified formula as an explicit graph: same vertices and words, surviving edges only
        FactorGraph h(g.n, g.m, g.k);
        h.vword = g.vword;
        for (uint32_t e = 0; e < g.edges.size(); ++e)
            if (edge_alive[e]) h.edges.push_back(g.edges[e]);
        h.finalize();
        RootedNeighborhood nb = neighborhood(h, v, rule.radius);
        double p = rule.prob(nb);
        Sym s = sequential_coin(g.vword[v]) < p ? Sym::T : Sym::F;
        x[v] = s;
        for (auto* q = g.adj_begin(v); q != g.adj_end(v); ++q) {
            const FgEdge& e = g.edges[*q];
            if (!edge_alive[*q]) continue;
            if (literal_true({e.var, e.pos}, s)) {
                clause_alive[e.clause] = 0;
                uint32_t c = g.clause_vertex(e.clause);
                for (auto* r = g.adj_begin(c); r != g.adj_end(c); ++r) edge_alive[*r] = 0;
            } else {
                edge_alive[*q] = 0;
            }
        }
        // drop clauses left without literals
        for (auto* q = g.adj_begin(v); q != g.adj_end(v); ++q) {
            uint32_t cl = g.edges[*q].clause;
            if (!clause_alive[cl]) continue;
            uint32_t c = g.clause_vertex(cl);
            bool any = false;
            for (auto* r = g.adj_begin(c); r != g.adj_end(c); ++r) any |= edge_alive[*r] != 0;
            if (!any) clause_alive[cl] = 0;
        }
    }
    return x;
}

MemoryRule sequential_as_memory(const LocalRule& rule) {
    if (!rule.prob) throw std::invalid_argument("sequential rule needs a probability codomain");
    MemoryRule m;
    m.name = "seq:" + rule.name;
    m.radius = std::max<uint32_t>(rule.radius, 2);
    LocalRule inner = rule;
    m.step = [inner](MemoryContext& ctx) {
        const FactorGraph& g = ctx.graph();
        uint32_t v = ctx.self();
        if (g.is_clause(v)) return;
        auto alive = [&](uint32_t e) {
            return ctx.get(g.edges[e].var) == 0 && ctx.get(g.clause_vertex(g.edges[e].clause)) == 0;
        };
        RootedNeighborhood nb = neighborhood(g, v, inner.radius, alive);
        double p = inner.prob(nb);
        Sym s = sequential_coin(g.vword[v]) < p ? Sym::T : Sym::F;
        ctx.set(v, s == Sym::T ? 1 : 2);
        auto [b, e] = ctx.edges_of(v);
        for (auto* q = b; q != e; ++q) {
            const FgEdge& ed = g.edges[*q];
            uint32_t c = g.clause_vertex(ed.clause);
            if (ctx.get(c) != 0) continue;
            if (literal_true({ed.var, ed.pos}, s)) {
                ctx.set(c, 1);
                continue;
            }
            bool any_unset = false;
            auto [cb, ce] = ctx.edges_of(c);
            for (auto* r = cb; r != ce; ++r) any_unset |= ctx.get(g.edges[*r].var) == 0;
            if (!any_unset) ctx.set(c, 1);
        }
    };
    m.finalize = [](uint64_t mu) { return mu == 1 ? Sym::T : mu == 2 ? Sym::F : Sym::Err; };
    return m;
}

BallGraph ball_graph(const FactorGraph& g, uint32_t v, uint32_t R) {
    std::unordered_map<uint32_t, uint32_t> dist;
    std::vector<uint32_t> order{v};
    dist[v] = 0;
    for (size_t h = 0; h < order.size(); ++h) {
        uint32_t u = order[h];
        uint32_t d = dist[u];
        if (d == R) continue;
        for (auto* p = g.adj_begin(u); p != g.adj_end(u); ++p) {
            uint32_t w = g.other(*p, u);
            if (dist.emplace(w, d + 1).second) order.push_back(w);
        }
    }
    std::unordered_map<uint32_t, uint32_t> local;
    uint32_t nv = 0, nc = 0;
    for (uint32_t u : order) local[u] = g.is_clause(u) ? nc++ : nv++;
    BallGraph out;
    out.g = FactorGraph(nv, nc, g.k);
    for (uint32_t u : order) out.g.vword[g.is_clause(u) ? nv + local[u] : local[u]] = g.vword[u];
    std::vector<uint32_t> es;
    for (uint32_t u : order) {
        if (g.is_clause(u)) continue;
        for (auto* p = g.adj_begin(u); p != g.adj_end(u); ++p)
            if (dist.count(g.other(*p, u))) es.push_back(*p);
    }
    std::sort(es.begin(), es.end());
    for (uint32_t e : es) {
        const FgEdge& ed = g.edges[e];
        out.g.edges.push_back({local[ed.var], local[g.clause_vertex(ed.clause)], ed.slot, ed.pos, ed.word});
    }
    out.g.finalize();
    out.root = g.is_clause(v) ? nv + local[v] : local[v];
    return out;
}

FactorGraph graph_from_neighborhood(const RootedNeighborhood& nb, uint32_t k) {
    std::vector<uint32_t> local(nb.size());
    uint32_t nv = 0, nc = 0;
    for (uint32_t i = 0; i < nb.size(); ++i) local[i] = nb.clause[i] ? nc++ : nv++;
    FactorGraph g(nv, nc, k);
    for (uint32_t i = 0; i < nb.size(); ++i) g.vword[nb.clause[i] ? nv + local[i] : local[i]] = nb.word[i];
    for (auto& e : nb.edges) g.edges.push_back({local[e.var], local[e.clause], e.slot, e.pos, e.word});
    g.finalize();
    return g;
}

Sym simulate_at(const MemoryRule& rule, const FactorGraph& g, uint32_t v, uint32_t R) {
    if (R < rule.radius) throw std::invalid_argument("simulation radius below rule radius");
    BallGraph b = ball_graph(g, v, R);
    MemoryRun run = run_local_memory(rule, b.g);
    return rule.finalize(run.mu[b.root]);
}

Assignment run_r_local_simulation(const MemoryRule& rule, const FactorGraph& g, uint32_t R) {
    Assignment x(g.n);
    std::exception_ptr err;
    std::mutex mu;
#pragma omp parallel for schedule(dynamic, 4)
    for (int64_t v = 0; v < int64_t(g.n); ++v) {
        try {
            x[v] = simulate_at(rule, g, uint32_t(v), R);
        } catch (...) {
            std::lock_guard<std::mutex> lk(mu);
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
    return x;
}

LocalRule r_local_simulation(const MemoryRule& rule, uint32_t R, uint32_t k) {
    if (R < rule.radius) throw std::invalid_argument("simulation radius below rule radius");
    LocalRule out;
    out.name = "sim" + std::to_string(R) + ":" + rule.name;
    out.radius = R;
    out.decide = [rule, k](const RootedNeighborhood& nb) {
        FactorGraph h = graph_from_neighborhood(nb, k);
        MemoryRun run = run_local_memory(rule, h);
        // canonical index 0 is the root; it is a variable, hence variable 0 of h
        return rule.finalize(run.mu[0]);
    };
    return out;
}

std::vector<std::vector<uint32_t>> adjacency_lists(const FactorGraph& g) {
    std::vector<std::vector<uint32_t>> adj(g.num_vertices());
    for (uint32_t v = 0; v < g.num_vertices(); ++v)
        for (auto* p = g.adj_begin(v); p != g.adj_end(v); ++p) adj[v].push_back(g.other(*p, v));
    return adj;
}

namespace {

struct HopBfs {
    const std::vector<std::vector<uint32_t>>& adj;
    std::vector<uint32_t> stamp, dist;
    uint32_t epoch = 0;
    std::vector<uint32_t> out;

    explicit HopBfs(const std::vector<std::vector<uint32_t>>& a) : adj(a), stamp(a.size(), 0), dist(a.size(), 0) {}

    // vertices within `hop` of s (s included)
    const std::vector<uint32_t>& ball(uint32_t s, uint32_t hop) {
        ++epoch;
        out.assign(1, s);
        stamp[s] = epoch;
        dist[s] = 0;
        for (size_t h = 0; h < out.size(); ++h) {
            uint32_t u = out[h];
            if (dist[u] == hop) continue;
            for (uint32_t w : adj[u])
                if (stamp[w] != epoch) {
                    stamp[w] = epoch;
                    dist[w] = dist[u] + 1;
                    out.push_back(w);
                }
        }
        return out;
    }
};

}  // namespace

InsulationReport insulation_report(const std::vector<std::vector<uint32_t>>& adj, const std::vector<uint64_t>& psi,
                                   uint32_t hop, uint32_t R, const std::vector<uint32_t>& roots_in) {
    uint32_t V = uint32_t(adj.size());
    std::vector<uint32_t> roots = roots_in;
    if (roots.empty()) {
        roots.resize(V);
        std::iota(roots.begin(), roots.end(), 0);
    }
    auto less = [&](uint32_t a, uint32_t b) { return psi[a] != psi[b] ? psi[a] < psi[b] : a < b; };
    InsulationReport rep;
    rep.insulated.assign(roots.size(), 0);
    rep.insulated_literal.assign(roots.size(), 0);
    rep.chain_states.assign(roots.size(), 0);
    int64_t inner = int64_t(R) - int64_t(hop);

#pragma omp parallel
    {
        HopBfs around(adj), fromroot(adj);
        std::vector<uint32_t> seen(V, 0);
        uint32_t epoch = 0;
        std::vector<uint32_t> stack;
#pragma omp for schedule(dynamic, 4)
        for (int64_t ri = 0; ri < int64_t(roots.size()); ++ri) {
            uint32_t v = roots[ri];
            fromroot.ball(v, R);
            auto dist_of = [&](uint32_t u) -> int64_t {
                return fromroot.stamp[u] == fromroot.epoch ? int64_t(fromroot.dist[u]) : INT64_MAX;
            };
            // returns true when the dependence closure stays inside N_{R-hop}
            auto explore = [&](bool literal, uint32_t& states) {
                ++epoch;
                stack.clear();
                states = 0;
                if (literal) {
                    seen[v] = epoch;
                    stack.push_back(v);
                } else {
                    for (uint32_t u : around.ball(v, hop)) {
                        seen[u] = epoch;
                        stack.push_back(u);
                    }
                }
                while (!stack.empty()) {
                    uint32_t u = stack.back();
                    stack.pop_back();
                    ++states;
                    if (dist_of(u) > inner) return false;
                    for (uint32_t w : around.ball(u, hop)) {
                        if (seen[w] == epoch || !less(w, u)) continue;
                        seen[w] = epoch;
                        stack.push_back(w);
                    }
                }
                return true;
            };
            uint32_t states = 0, lit_states = 0;
            rep.insulated[ri] = explore(false, states);
            rep.insulated_literal[ri] = explore(true, lit_states);
            rep.chain_states[ri] = states;
        }
    }
    return rep;
}

InsulationReport insulation_report(const FactorGraph& g, uint32_t r, uint32_t R) {
    std::vector<uint32_t> roots(g.n);
    std::iota(roots.begin(), roots.end(), 0);
    return insulation_report(adjacency_lists(g), g.vword, 2 * r, R, roots);
}

}  // namespace ogp
