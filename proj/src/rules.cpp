#include "ogp/rules.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

#include "ogp/fix1.hpp"

namespace ogp {

const std::vector<RuleInfo>& rule_registry() {
    static const std::vector<RuleInfo> reg = {
        {"const-T", RuleKind::Local, 1, 0, "every variable true"},
        {"majority", RuleKind::Local, 1, 1, "T iff more positive than negative incident edges"},
        {"word-parity", RuleKind::Local, 1, 1, "parity of the decoration words around the root"},
        {"const-one", RuleKind::Probability, 1, 0, "probability 1 everywhere"},
        {"seq-majority", RuleKind::Probability, 1, 1, "(pos+1)/(pos+neg+2) on the simplified graph"},
        {"bp", RuleKind::Probability, 1, 3, "belief propagation root marginal, 10 rounds"},
        {"mark-self", RuleKind::Memory, 1, 0, "writes 1 to the processed vertex, 1 -> F"},
        {"greedy-clause", RuleKind::Memory, 1, 1, "clause satisfies itself with its first free literal"},
        {"fix1", RuleKind::Memory, 1, 3, "phase 1 of Fix"},
    };
    return reg;
}

const RuleInfo& rule_info(const std::string& name) {
    for (auto& r : rule_registry())
        if (r.name == name) return r;
    throw std::invalid_argument("unknown rule '" + name + "'");
}

namespace {

std::pair<uint32_t, uint32_t> root_polarity(const RootedNeighborhood& nb) {
    uint32_t pos = 0, neg = 0;
    for (uint32_t e : nb.adj[0]) (nb.edges[e].pos ? pos : neg)++;
    return {pos, neg};
}

}  // namespace

LocalRule make_local_rule(const std::string& name) {
    const RuleInfo& info = rule_info(name);
    if (info.kind != RuleKind::Local) throw std::invalid_argument("'" + name + "' is not a {T,F} local rule");
    LocalRule r;
    r.name = name;
    r.radius = info.radius;
    if (name == "const-T") {
        r.decide = [](const RootedNeighborhood&) { return Sym::T; };
    } else if (name == "majority") {
        r.decide = [](const RootedNeighborhood& nb) {
            auto [pos, neg] = root_polarity(nb);
            return pos > neg ? Sym::T : Sym::F;
        };
    } else {
        r.decide = [](const RootedNeighborhood& nb) {
            uint64_t w = 0;
            for (uint32_t v = 0; v < nb.size(); ++v) w ^= nb.word[v];
            for (auto& e : nb.edges) w ^= e.word;
            return std::popcount(w) % 2 == 0 ? Sym::T : Sym::F;
        };
    }
    return r;
}

LocalRule make_probability_rule(const std::string& name) {
    const RuleInfo& info = rule_info(name);
    if (info.kind != RuleKind::Probability) throw std::invalid_argument("'" + name + "' is not a probability rule");
    if (name == "bp") return bp_rule();
    LocalRule r;
    r.name = name;
    r.radius = info.radius;
    if (name == "const-one") {
        r.prob = [](const RootedNeighborhood&) { return 1.0; };
    } else {
        r.prob = [](const RootedNeighborhood& nb) {
            auto [pos, neg] = root_polarity(nb);
            return (pos + 1.0) / (pos + neg + 2.0);
        };
    }
    return r;
}

MemoryRule make_memory_rule(const std::string& name, uint32_t k) {
    const RuleInfo& info = rule_info(name);
    if (info.kind == RuleKind::Probability) return sequential_as_memory(make_probability_rule(name));
    if (info.kind != RuleKind::Memory) throw std::invalid_argument("'" + name + "' is not a memory rule");
    if (name == "fix1") return fix1_as_memory_rule(k);
    MemoryRule r;
    r.name = name;
    r.radius = info.radius;
    if (name == "mark-self") {
        r.step = [](MemoryContext& ctx) { ctx.set(ctx.self(), 1); };
        r.finalize = [](uint64_t mu) { return mu == 1 ? Sym::F : Sym::T; };
    } else {
        // mu(var): 0 free, 1 T, 2 F
        r.step = [](MemoryContext& ctx) {
            const FactorGraph& g = ctx.graph();
            uint32_t c = ctx.self();
            if (!g.is_clause(c)) return;
            auto [b, e] = ctx.edges_of(c);
            std::vector<uint32_t> es(b, e);
            std::sort(es.begin(), es.end(), [&](uint32_t x, uint32_t y) {
                return g.edges[x].word != g.edges[y].word ? g.edges[x].word < g.edges[y].word : x < y;
            });
            for (uint32_t id : es) {
                uint64_t s = ctx.get(g.edges[id].var);
                if (s != 0 && (s == 1) == g.edges[id].pos) return;
            }
            for (uint32_t id : es)
                if (ctx.get(g.edges[id].var) == 0) {
                    ctx.set(g.edges[id].var, g.edges[id].pos ? 1 : 2);
                    return;
                }
        };
        r.finalize = [](uint64_t mu) { return mu == 2 ? Sym::F : Sym::T; };
    }
    return r;
}

double bp_root_marginal(const RootedNeighborhood& nb, uint32_t iterations) {
    const size_t E = nb.edges.size();
    std::vector<double> eta(E, 0.0), next(E);
    // probability that the variable of edge e takes the value violating e, in the cavity without e
    auto cavity_violate = [&](uint32_t e) {
        uint32_t v = nb.edges[e].var;
        double w_violate = 1.0, w_ok = 1.0;
        bool bad = !nb.edges[e].pos;  // violating value is T iff literal is negative
        for (uint32_t f : nb.adj[v]) {
            if (f == e) continue;
            bool f_bad = !nb.edges[f].pos;
            (f_bad == bad ? w_violate : w_ok) *= 1.0 - eta[f];
        }
        double z = w_violate + w_ok;
        return z > 0 ? w_violate / z : 0.5;
    };
    std::vector<double> cav(E);
    for (uint32_t it = 0; it < iterations; ++it) {
        for (uint32_t e = 0; e < E; ++e) cav[e] = cavity_violate(e);
        for (uint32_t e = 0; e < E; ++e) {
            double p = 1.0;
            for (uint32_t f : nb.adj[nb.edges[e].clause])
                if (f != e) p *= cav[f];
            next[e] = p;
        }
        eta.swap(next);
    }
    double wt = 1.0, wf = 1.0;
    for (uint32_t e : nb.adj[0]) (nb.edges[e].pos ? wf : wt) *= 1.0 - eta[e];
    double z = wt + wf;
    return z > 0 ? wt / z : 0.5;
}

LocalRule bp_rule(const BpOptions& opt) {
    LocalRule r;
    r.name = "bp";
    r.radius = opt.radius;
    uint32_t iters = opt.iterations;
    r.prob = [iters](const RootedNeighborhood& nb) { return bp_root_marginal(nb, iters); };
    return r;
}

}  // namespace ogp
