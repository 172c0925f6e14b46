#include "ogp/fix1.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace ogp {

namespace {

struct Occurrences {
    std::vector<uint32_t> start, clause;

    explicit Occurrences(const Formula& f) : start(f.n + 1, 0) {
        for (uint32_t id : f.lits) start[(id >> 1) + 1]++;
        std::partial_sum(start.begin(), start.end(), start.begin());
        clause.resize(f.lits.size());
        std::vector<uint32_t> fill(start.begin(), start.end() - 1);
        for (size_t s = 0; s < f.lits.size(); ++s) clause[fill[f.lits[s] >> 1]++] = uint32_t(s);
    }
};

bool safe_with(const Formula& f, const Occurrences& occ, const std::vector<uint8_t>& in_z, uint32_t i) {
    for (uint32_t p = occ.start[i]; p < occ.start[i + 1]; ++p) {
        uint32_t s = occ.clause[p];
        if (!Literal::from_id(f.lits[s]).pos) continue;
        uint32_t c = s / f.k;
        bool other_true = false;
        for (uint32_t j = 0; j < f.k && !other_true; ++j) {
            Literal l = f.at(c, j);
            if (l.var == i) continue;
            other_true = l.pos != bool(in_z[l.var]);
        }
        if (!other_true) return false;
    }
    return true;
}

}  // namespace

bool is_z_safe(const Formula& f, const std::vector<uint8_t>& in_z, uint32_t i) {
    if (i >= f.n) throw std::out_of_range("variable index");
    if (in_z[i]) throw ContractViolation("is_z_safe called on a variable already in Z");
    return safe_with(f, Occurrences(f), in_z, i);
}

Fix1Result run_fix1(const Formula& f, const FactorGraph& g) {
    if (f.k < 3) throw std::invalid_argument("Fix1 needs k >= 3");
    if (g.n != f.n || g.m != f.m) throw std::invalid_argument("graph does not match formula");
    Occurrences occ(f);
    Fix1Result res;
    res.in_z.assign(f.n, 0);
    std::vector<uint32_t> order(f.m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
        return psi_less(g, g.clause_vertex(a), g.clause_vertex(b));
    });
    const uint32_t fb = fix1_fallback_slot(f.k);
    std::vector<uint32_t> lits(f.k);
    for (uint32_t c : order) {
        Fix1Step step{c, Fix1Branch::NotNegative, 0, 0};
        std::iota(lits.begin(), lits.end(), 0);
        std::sort(lits.begin(), lits.end(), [&](uint32_t a, uint32_t b) {
            uint64_t wa = g.edges[size_t(c) * f.k + a].word, wb = g.edges[size_t(c) * f.k + b].word;
            return wa != wb ? wa < wb : a < b;
        });
        bool negative = true, hits = false;
        for (uint32_t j = 0; j < f.k; ++j) {
            Literal l = f.at(c, j);
            negative &= !l.pos;
            hits |= res.in_z[l.var] != 0;
        }
        if (negative && hits) step.branch = Fix1Branch::HitsZ;
        if (negative && !hits) {
            step.branch = Fix1Branch::Fallback;
            step.j = fb;
            for (uint32_t j = 0; j < fb; ++j)
                if (safe_with(f, occ, res.in_z, f.at(c, lits[j]).var)) {
                    step.branch = Fix1Branch::Safe;
                    step.j = j;
                    break;
                }
            step.var = f.at(c, lits[step.j]).var;
            res.in_z[step.var] = 1;
            res.z.push_back(step.var);
        }
        res.trace.push_back(step);
    }
    res.x.resize(f.n);
    for (uint32_t i = 0; i < f.n; ++i) res.x[i] = res.in_z[i] ? Sym::F : Sym::T;
    return res;
}

Fix1Result run_fix1(const Formula& f, uint64_t seed) { return run_fix1(f, build_factor_graph(f, seed)); }

MemoryRule fix1_as_memory_rule(uint32_t k) {
    if (k < 3) throw std::invalid_argument("Fix1 needs k >= 3");
    MemoryRule rule;
    rule.name = "fix1";
    rule.radius = 3;
    const uint32_t fb = fix1_fallback_slot(k);
    rule.step = [fb](MemoryContext& ctx) {
        const FactorGraph& g = ctx.graph();
        uint32_t c = ctx.self();
        if (!g.is_clause(c)) return;
        auto [b, e] = ctx.edges_of(c);
        std::vector<uint32_t> es(b, e);
        if (es.empty()) return;
        std::sort(es.begin(), es.end(), [&](uint32_t x, uint32_t y) {
            return g.edges[x].word != g.edges[y].word ? g.edges[x].word < g.edges[y].word : x < y;
        });
        for (uint32_t id : es) {
            if (g.edges[id].pos) return;
            if (ctx.get(g.edges[id].var) == 1) return;
        }
        auto safe = [&](uint32_t i) {
            auto [vb, ve] = ctx.edges_of(i);
            for (auto* p = vb; p != ve; ++p) {
                if (!g.edges[*p].pos) continue;
                uint32_t cl = g.clause_vertex(g.edges[*p].clause);
                bool other_true = false;
                auto [cb, ce] = ctx.edges_of(cl);
                for (auto* q = cb; q != ce && !other_true; ++q) {
                    const FgEdge& o = g.edges[*q];
                    if (o.var == i) continue;
                    other_true = o.pos != (ctx.get(o.var) == 1);
                }
                if (!other_true) return false;
            }
            return true;
        };
        uint32_t limit = std::min<uint32_t>(fb, uint32_t(es.size()));
        uint32_t pick = std::min<uint32_t>(fb, uint32_t(es.size()) - 1);
        for (uint32_t j = 0; j < limit; ++j)
            if (safe(g.edges[es[j]].var)) {
                pick = j;
                break;
            }
        ctx.set(g.edges[es[pick]].var, 1);
    };
    rule.finalize = [](uint64_t mu) { return mu == 1 ? Sym::F : Sym::T; };
    return rule;
}

}  // namespace ogp
