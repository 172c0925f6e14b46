#include <doctest.h>

#include <algorithm>
#include <map>
#include <queue>
#include <set>

#include "ogp/interpolation.hpp"
#include "ogp/polysim.hpp"
#include "ogp/rules.hpp"

using namespace ogp;

namespace {

LocalRule with_radius(const std::string& name, uint32_t r) {
    LocalRule g = make_local_rule(name);
    g.radius = r;
    return g;
}

// BFS ball: vertices within distance r and the edges joining two of them
std::pair<std::vector<uint32_t>, std::vector<uint32_t>> ball(const FactorGraph& g, uint32_t v, uint32_t r) {
    std::map<uint32_t, uint32_t> dist{{v, 0}};
    std::queue<uint32_t> q;
    q.push(v);
    while (!q.empty()) {
        uint32_t u = q.front();
        q.pop();
        if (dist[u] == r) continue;
        for (auto* p = g.adj_begin(u); p != g.adj_end(u); ++p) {
            uint32_t w = g.other(*p, u);
            if (!dist.count(w)) {
                dist[w] = dist[u] + 1;
                q.push(w);
            }
        }
    }
    std::vector<uint32_t> verts, edges;
    for (auto& [u, d] : dist) verts.push_back(u);
    for (uint32_t e = 0; e < g.edges.size(); ++e)
        if (dist.count(g.edges[e].var) && dist.count(g.clause_vertex(g.edges[e].clause))) edges.push_back(e);
    return {verts, edges};
}

// S is a tree through v with every vertex at tree depth <= r
bool rooted_subtree(const FactorGraph& g, uint32_t v, const std::vector<uint32_t>& s, uint32_t r) {
    std::map<uint32_t, uint32_t> depth{{v, 0}};
    std::vector<uint8_t> used(s.size(), 0);
    bool grew = true;
    while (grew) {
        grew = false;
        for (size_t i = 0; i < s.size(); ++i) {
            if (used[i]) continue;
            uint32_t a = g.edges[s[i]].var, c = g.clause_vertex(g.edges[s[i]].clause);
            bool ai = depth.count(a), ci = depth.count(c);
            if (ai && ci) return false;
            if (!ai && !ci) continue;
            uint32_t from = ai ? a : c, to = ai ? c : a;
            depth[to] = depth[from] + 1;
            used[i] = 1;
            grew = true;
        }
    }
    if (depth.size() != s.size() + 1) return false;
    for (auto& [u, d] : depth)
        if (d > r) return false;
    return true;
}

std::set<std::vector<uint32_t>> brute_monomials(const FactorGraph& g, uint32_t v, uint32_t r, uint32_t D) {
    auto [verts, edges] = ball(g, v, r);
    std::set<std::vector<uint32_t>> out;
    if (edges.size() > 20) return out;
    for (uint64_t mask = 0; mask < (uint64_t(1) << edges.size()); ++mask) {
        if (uint32_t(__builtin_popcountll(mask)) > D) continue;
        std::vector<uint32_t> s;
        for (size_t i = 0; i < edges.size(); ++i)
            if ((mask >> i) & 1) s.push_back(edges[i]);
        if (rooted_subtree(g, v, s, r)) out.insert(s);
    }
    return out;
}

// h(S) = base(S) - sum over proper rooted subtrees S' of h(S')
int64_t literal_h(PolySim& sim, const FactorGraph& g, uint32_t v, const std::vector<uint32_t>& s,
                  std::map<std::vector<uint32_t>, int64_t>& memo) {
    auto it = memo.find(s);
    if (it != memo.end()) return it->second;
    int64_t h = sim.base_value(g, v, s);
    for (uint64_t mask = 0; mask + 1 < (uint64_t(1) << s.size()); ++mask) {
        std::vector<uint32_t> sub;
        for (size_t i = 0; i < s.size(); ++i)
            if ((mask >> i) & 1) sub.push_back(s[i]);
        if (rooted_subtree(g, v, sub, sim.rule().radius)) h -= literal_h(sim, g, v, sub, memo);
    }
    memo[s] = h;
    return h;
}

std::vector<uint32_t> sorted(std::vector<uint32_t> s) {
    std::sort(s.begin(), s.end());
    return s;
}

}  // namespace

TEST_CASE("D-truncation") {
    Formula iso(2, 1, {{{0, true}}});
    FactorGraph g = build_factor_graph(iso, 1);
    LocalRule maj = with_radius("majority", 2);
    LocalRule t = d_truncate(maj, 3);
    CHECK(run_local(t, g)[1] == run_local(maj, g)[1]);
    CHECK(run_local(t, g)[0] == run_local(maj, g)[0]);
    CHECK_THROWS(d_truncate(maj, 0));

    // two clauses on the same pair: a 4-cycle through x0
    Formula cyc(2, 2, {{{0, true}, {1, true}}, {{0, false}, {1, true}}});
    CHECK(run_local(t, build_factor_graph(cyc, 2))[0] == Sym::Err);
    CHECK(run_local(d_truncate(with_radius("majority", 1), 8), build_factor_graph(cyc, 2))[0] != Sym::Err);

    for (uint64_t s = 0; s < 50; ++s) {
        Formula f = sample_formula(40, 40, 3, 100 + s);
        FactorGraph h = build_factor_graph(f, 200 + s);
        for (uint32_t D : {2u, 4u, 8u}) {
            Assignment out = run_local(d_truncate(maj, D), h);
            for (uint32_t v = 0; v < f.n; ++v) {
                auto [verts, edges] = ball(h, v, 2);
                bool ok = edges.size() + 1 == verts.size() && edges.size() <= D;
                REQUIRE((out[v] == Sym::Err) == !ok);
            }
        }
    }
}

TEST_CASE("polynomial simulation examples") {
    Formula iso(3, 1, {{{0, true}}, {{0, false}}});
    FactorGraph g = build_factor_graph(iso, 4);
    PolySim sim(with_radius("word-parity", 2), 4);
    CHECK(sim.monomials(g, 2).size() == 1);
    CHECK(sim.value_at(g, 2) == unround(run_local(sim.rule(), g)[2]));
    CHECK_THROWS(PolySim(make_probability_rule("bp"), 3));
    CHECK_THROWS(unround(Sym::Err));

    Formula one(3, 3, {{{0, true}, {1, true}, {2, true}}});
    for (uint64_t s = 0; s < 20; ++s) {
        FactorGraph h = build_factor_graph(one, s);
        PolySim p(with_radius("word-parity", 2), 4);
        Assignment truth = run_local(p.rule(), h);
        std::vector<double> f = p.evaluate(h);
        for (uint32_t v = 0; v < 3; ++v) {
            CHECK(p.monomials(h, v).size() == 5);  // {}, {e_v}, {e_v, e_u} twice, {e_v, e_u, e_w}
            CHECK(strict_round(f[v]) == truth[v]);
        }
    }
}

TEST_CASE("monomials are exactly the rooted subtrees") {
    for (uint64_t s = 0; s < 40; ++s) {
        Formula f = sample_formula(30, 12, 3, 300 + s);
        FactorGraph g = build_factor_graph(f, 400 + s);
        for (uint32_t r : {1u, 2u, 3u})
            for (uint32_t D : {1u, 3u, 5u}) {
                PolySim sim(with_radius("word-parity", r), D);
                for (uint32_t v = 0; v < g.num_vertices(); v += 5) {
                    auto [verts, edges] = ball(g, v, r);
                    if (edges.size() > 20) continue;
                    std::set<std::vector<uint32_t>> got;
                    for (auto& m : sim.monomials(g, v)) REQUIRE(got.insert(sorted(m)).second);
                    REQUIRE(got == brute_monomials(g, v, r, D));
                }
            }
    }
}

TEST_CASE("coefficients follow the subtree recursion") {
    for (uint64_t s = 0; s < 20; ++s) {
        Formula f = sample_formula(20, 10, 3, 500 + s);
        FactorGraph g = build_factor_graph(f, 600 + s);
        for (const char* name : {"word-parity", "majority"}) {
            PolySim sim(with_radius(name, 2), 5);
            for (uint32_t v = 0; v < f.n; ++v) {
                std::map<std::vector<uint32_t>, int64_t> memo;
                for (auto& m : sim.monomials(g, v)) {
                    std::vector<uint32_t> key = sorted(m);
                    REQUIRE(sim.coefficient(g, v, m) == literal_h(sim, g, v, key, memo));
                    int64_t total = 0;
                    for (auto& sub : sim.monomials(g, v)) {
                        std::vector<uint32_t> sk = sorted(sub);
                        if (std::includes(key.begin(), key.end(), sk.begin(), sk.end()))
                            total += sim.coefficient(g, v, sub);
                    }
                    REQUIRE(total == sim.base_value(g, v, m));
                }
            }
        }
    }
    Formula f = sample_formula(20, 10, 3, 1);
    FactorGraph g = build_factor_graph(f, 2);
    PolySim sim(with_radius("majority", 2), 4);
    (void)sim.evaluate(g);
    CHECK(sim.cache_size() > 0);
}

TEST_CASE("polynomial simulation matches the D-truncation") {
    uint64_t compared = 0, mismatches = 0;
    for (uint64_t s = 0; s < 1000; ++s) {
        uint32_t n = 10 + uint32_t(s % 31);
        Formula f = sample_formula(n, n / 2 + uint32_t(s % 7), 3, 7000 + s);
        FactorGraph g = build_factor_graph(f, 8000 + s);
        const char* name = s % 2 ? "majority" : "word-parity";
        uint32_t D = 2 + uint32_t(s % 5);
        PolySim sim(with_radius(name, 2), D);
        Assignment trunc = run_local(d_truncate(sim.rule(), D), g);
        std::vector<double> out = sim.evaluate(g);
        for (uint32_t v = 0; v < n; ++v) {
            if (trunc[v] == Sym::Err) continue;
            ++compared;
            mismatches += strict_round(out[v]) != trunc[v];
        }
    }
    CHECK(mismatches == 0);
    CHECK(compared > 1000);
}

TEST_CASE("literals outside every monomial do not matter") {
    Rng rng(9);
    for (uint64_t s = 0; s < 100; ++s) {
        Formula f = sample_formula(40, 30, 3, 900 + s);
        FactorGraph g = build_factor_graph(f, 950 + s);
        PolySim sim(with_radius("word-parity", 2), 3);
        uint32_t v = uint32_t(rng() % f.n);
        std::set<uint32_t> touched{v};
        for (auto& m : sim.monomials(g, v))
            for (uint32_t e : m) {
                touched.insert(g.edges[e].var);
                touched.insert(g.clause_vertex(g.edges[e].clause));
            }
        int64_t before = sim.value_at(g, v);
        for (int t = 0; t < 5; ++t) {
            uint32_t slot = uint32_t(rng() % f.lits.size());
            uint32_t id = uint32_t(rng() % (2 * f.n));
            if (touched.count(f.n + slot / f.k) || touched.count(Literal::from_id(id).var) ||
                touched.count(Literal::from_id(f.lits[slot]).var))
                continue;
            Formula h = f;
            h.lits[slot] = id;
            std::vector<uint64_t> vw(g.vword.begin(), g.vword.end()), ew;
            for (auto& e : g.edges) ew.push_back(e.word);
            CHECK(sim.value_at(build_factor_graph(h, vw, ew), v) == before);
        }
    }
}

TEST_CASE("second moment") {
    PolySim ct(make_local_rule("const-T"), 4);
    MonteCarloEstimate one = second_moment(ct, 50, 50, 3, 10, 1);
    CHECK(one.mean == 1);
    CHECK(one.se == 0);
    FactorGraph g = build_factor_graph(sample_formula(30, 40, 3, 3), 4);
    for (uint32_t v = 0; v < 30; ++v)
        for (auto& m : ct.monomials(g, v)) CHECK(ct.coefficient(g, v, m) == (m.empty() ? 1 : 0));

    PolySim maj(make_local_rule("majority"), 6);
    MonteCarloEstimate est = second_moment(maj, 200, 200, 3, 40, 2);
    CHECK(std::isfinite(est.mean));
    CHECK(est.mean >= 1);
}

// variables of degree above D carry truncated inclusion-exclusion sums in the thousands,
// so the estimate is dominated by a few vertices per formula
TEST_CASE("second moment stability" * doctest::may_fail()) {
    PolySim maj(make_local_rule("majority"), 6);
    MonteCarloEstimate est = second_moment(maj, 200, 200, 3, 40, 2);
    MESSAGE("gamma " << est.mean << " +- " << est.se);
    CHECK(2 * 1.96 * est.se / est.mean < 0.05);
}

TEST_CASE("c-bad steps of a degree-D simulation along a path") {
    const uint32_t n = 500, m = 500, k = 3, D = 4;
    PolySim sim(make_local_rule("majority"), D);
    double gamma = second_moment(sim, n, m, k, 16, 11).mean;
    InterpolationPath path(n, m, k, 12, 100);
    std::vector<std::vector<double>> outs;
    for (uint64_t t = 0; t <= path.length(); ++t) outs.push_back(sim.evaluate(path.graph(t)));
    const double c = 0.01;
    auto bad = detect_c_bad(outs, c, gamma);
    double per_step = double(bad.size()) / path.length();
    MESSAGE("bad-step frequency " << per_step << ", influence budget per slot " << 4.0 * D / c / (m * k));
    CHECK(per_step * m * k <= 4.0 * D / c);
}
