#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <numeric>

#include "ogp/interpolation.hpp"

using namespace ogp;

namespace {

double chi_square_p(const std::vector<uint64_t>& counts) {
    double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    double e = total / counts.size(), chi = 0;
    for (auto c : counts) chi += (c - e) * (c - e) / e;
    boost::math::chi_squared dist(double(counts.size() - 1));
    return boost::math::cdf(boost::math::complement(dist, chi));
}

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
    double n = double(a.size()), ma = 0, mb = 0;
    for (size_t i = 0; i < a.size(); ++i) ma += a[i] / n, mb += b[i] / n;
    double sab = 0, saa = 0, sbb = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

// distribution over vertices, one step at a time; the walk dies on a bad edge
double walk_dp(const WalkSpec& s) {
    uint64_t V = s.vertices();
    std::vector<double> mass(V, 1.0 / double(V));
    for (uint32_t j : s.sigma) {
        std::vector<double> next(V, 0.0);
        uint64_t pj = 1;
        for (uint32_t r = 0; r < j; ++r) pj *= s.alphabet;
        for (uint64_t x = 0; x < V; ++x) {
            uint32_t a = s.coord(x, j);
            for (uint32_t b = 0; b < s.alphabet; ++b) {
                double w = mass[x] / s.alphabet;
                if (b == a) {
                    next[x] += w;
                } else if (!s.bad[s.edge_id(x, j, b)]) {
                    next[x - a * pj + b * pj] += w;
                }
            }
        }
        mass = next;
    }
    return std::accumulate(mass.begin(), mass.end(), 0.0);
}

}  // namespace

TEST_CASE("interpolation path replay") {
    InterpolationPath path(12, 7, 3, 5);
    CHECK(path.length() == 9 * 7);
    CHECK(path.materialize(0) == path.base());
    CHECK_THROWS_AS(path.materialize(path.length() + 1), std::out_of_range);

    std::vector<uint32_t> lits = path.base().lits;
    Formula prev = path.base();
    for (uint64_t t = 1; t <= path.length(); ++t) {
        CHECK(path.slot(t) == (t - 1) % 21);
        lits[path.slot(t)] = path.literal(t);
        Formula cur = path.materialize(t);
        REQUIRE(cur.lits == lits);
        uint32_t diff = 0;
        for (size_t i = 0; i < lits.size(); ++i) diff += cur.lits[i] != prev.lits[i];
        CHECK(diff <= 1);
        CHECK(path.graph(t).edges[path.slot(t)].word == path.edge_word(t));
        CHECK(path.graph(t).vword == path.graph(0).vword);
        prev = cur;
    }
    InterpolationPath again(12, 7, 3, 5);
    for (uint64_t t : {0, 20, 21, 22, 42, 63}) CHECK(again.materialize(t) == path.materialize(t));
    CHECK(again.edge_words(63) == path.edge_words(63));

    // after km steps every slot has been redrawn
    Formula a = path.materialize(21), b = path.materialize(42);
    for (uint32_t s = 0; s < 21; ++s) {
        CHECK(a.lits[s] == path.literal(s + 1));
        CHECK(b.lits[s] == path.literal(s + 22));
    }
}

TEST_CASE("interpolation path marginals") {
    const uint32_t n = 5, m = 3, k = 3, km = m * k, paths = 10000;
    std::vector<uint64_t> c0(2 * n, 0), cmid(2 * n, 0), cend(2 * n, 0);
    std::vector<std::vector<double>> x(km), y(km);
    for (uint32_t s = 0; s < paths; ++s) {
        InterpolationPath p(n, m, k, 1000 + s, km);
        Formula f0 = p.materialize(0), f1 = p.materialize(km), fh = p.materialize(km / 2 + 1);
        for (uint32_t j = 0; j < km; ++j) {
            c0[f0.lits[j]]++;
            cmid[fh.lits[j]]++;
            cend[f1.lits[j]]++;
            x[j].push_back(f0.lits[j]);
            y[j].push_back(f1.lits[j]);
        }
    }
    CHECK(chi_square_p(c0) > 1e-6);
    CHECK(chi_square_p(cmid) > 1e-6);
    CHECK(chi_square_p(cend) > 1e-6);
    for (uint32_t j = 0; j < km; ++j) CHECK(std::fabs(correlation(x[j], y[j])) <= 4 / std::sqrt(double(paths)));
}

TEST_CASE("branched interpolation") {
    const uint32_t n = 5, m = 3, k = 3, km = m * k;
    BranchedInterpolation br(n, m, k, 9);
    CHECK(br.branches() == 3);
    CHECK(br.branch_length() == km);
    for (uint32_t b = 0; b < 3; ++b) {
        CHECK(br.materialize(b, 0) == br.base());
        CHECK(br.graph(b, 0).vword == br.graph(0, 0).vword);
        for (uint64_t t = 1; t <= km; ++t) {
            Formula prev = br.materialize(b, t - 1), cur = br.materialize(b, t);
            for (uint32_t s = 0; s < km; ++s)
                if (s != t - 1) CHECK(cur.lits[s] == prev.lits[s]);
            if (cur.lits[t - 1] != prev.lits[t - 1])
                CHECK(br.graph(b, t).edges[t - 1].word != br.graph(b, t - 1).edges[t - 1].word);
        }
    }
    CHECK_THROWS(br.materialize(3, 0));
    CHECK_THROWS(br.materialize(0, km + 1));

    const uint32_t reps = 10000;
    std::vector<uint64_t> counts(2 * n, 0);
    std::vector<double> e0, e1, base;
    for (uint32_t s = 0; s < reps; ++s) {
        BranchedInterpolation bi(n, m, k, 500 + s);
        Formula f0 = bi.materialize(0, km), f1 = bi.materialize(1, km);
        for (uint32_t j = 0; j < km; ++j) counts[f0.lits[j]]++;
        e0.push_back(f0.lits[2]);
        e1.push_back(f1.lits[2]);
        base.push_back(bi.base().lits[2]);
    }
    CHECK(chi_square_p(counts) > 1e-6);
    CHECK(std::fabs(correlation(e0, e1)) <= 4 / std::sqrt(double(reps)));
    CHECK(std::fabs(correlation(e0, base)) <= 4 / std::sqrt(double(reps)));
}

TEST_CASE("detect_c_bad") {
    std::vector<std::vector<double>> flat(10, std::vector<double>(8, 1.0));
    CHECK(detect_c_bad(flat, 0.1, 1.0).empty());
    // 8 coordinates, c gamma n = 4; two coordinates moving by 2 give 8 > 4
    std::vector<std::vector<double>> seq{std::vector<double>(8, 1.0), std::vector<double>(8, 1.0)};
    seq[1][0] = seq[1][5] = -1;
    CHECK(detect_c_bad(seq, 0.5, 1.0) == std::vector<uint32_t>{1});
    seq[1][5] = 1;
    CHECK(detect_c_bad(seq, 0.5, 1.0).empty());
    CHECK_THROWS(detect_c_bad({{1, 2}, {1}}, 1, 1));

    Rng rng(3);
    std::normal_distribution<double> g;
    std::vector<std::vector<double>> outs(40, std::vector<double>(16));
    for (auto& o : outs)
        for (auto& v : o) v = g(rng) * (rng() % 4 == 0 ? 2 : 0.2);
    auto flagged = detect_c_bad(outs, 1.0, 1.0);
    std::vector<uint32_t> perm(16);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    auto permuted = outs;
    for (size_t t = 0; t < outs.size(); ++t)
        for (uint32_t i = 0; i < 16; ++i) permuted[t][perm[i]] = outs[t][i];
    CHECK(detect_c_bad(permuted, 1.0, 1.0) == flagged);
}

TEST_CASE("influence estimates") {
    const uint32_t n = 6, m = 4, k = 3, km = m * k;
    VectorAlgorithm constant = [](const Formula& f, const FactorGraph&) { return std::vector<double>(f.n, 1.0); };
    InfluenceEstimate c0 = estimate_influences(constant, n, m, k, 0.1, 1.0, 200, 1);
    CHECK(c0.total == 0);
    CHECK(c0.lambda.size() == km);

    VectorAlgorithm slot0 = [](const Formula& f, const FactorGraph&) {
        std::vector<double> out(f.n, -1.0);
        out[f.lits[0] / 2] = 1.0;
        return out;
    };
    InfluenceEstimate s0 = estimate_influences(slot0, n, m, k, 0.1, 1.0, 300, 2);
    CHECK(s0.lambda[0] > 0.5);
    for (uint32_t j = 1; j < km; ++j) CHECK(s0.lambda[j] == 0);

    // one-hot pass-through: a slot change moves two coordinates by 1, so ||delta||^2 = 2 and ||f||^2 = km
    VectorAlgorithm onehot = [](const Formula& f, const FactorGraph&) {
        std::vector<double> out(size_t(f.m) * f.k * 2 * f.n, 0.0);
        for (size_t j = 0; j < f.lits.size(); ++j) out[j * 2 * f.n + f.lits[j]] = 1.0;
        return out;
    };
    double gamma = double(km) / n;  // mean ||f||^2 / n
    for (double c : {0.5 / km, 1.0 / km, 2.5 / km, 0.5}) {
        InfluenceEstimate e = estimate_influences(onehot, n, m, k, c, gamma, 200, 3);
        CHECK(e.total_ci.lo <= 4.0 / c);
        CHECK(e.total == (c * km < 2 ? double(km) : 0.0));
    }
}

TEST_CASE("walk edge numbering") {
    for (uint32_t q : {2u, 3u}) {
        for (uint32_t J : {1u, 2u, 3u}) {
            WalkSpec s;
            s.alphabet = q;
            s.J = J;
            std::vector<uint32_t> hits(s.edge_count(), 0);
            for (uint64_t x = 0; x < s.vertices(); ++x)
                for (uint32_t j = 0; j < J; ++j)
                    for (uint32_t b = 0; b < q; ++b)
                        if (b != s.coord(x, j)) hits.at(s.edge_id(x, j, b))++;
            for (uint32_t h : hits) CHECK(h == 2);
        }
    }
}

TEST_CASE("graph-walk bound") {
    WalkSpec clean{2, 2, {0, 1, 0}, std::vector<uint8_t>(4, 0)};
    WalkResult r = walk_no_bad_probability(clean);
    CHECK(r.probability == 1);
    CHECK(r.bound == 1);

    WalkSpec sharp{2, 1, {0}, {1}};
    WalkResult s = walk_no_bad_probability(sharp);
    CHECK(s.probability == 0.5);
    CHECK(s.bound == 0.5);

    // every bad-edge configuration and every direction map at |Sigma| = 2, J = 2, T <= 4
    uint32_t configs = 0;
    for (uint32_t T = 1; T <= 4; ++T)
        for (uint32_t dirs = 0; dirs < (1u << T); ++dirs)
            for (uint32_t mask = 0; mask < 16; ++mask) {
                WalkSpec w{2, 2, {}, std::vector<uint8_t>(4)};
                for (uint32_t t = 0; t < T; ++t) w.sigma.push_back((dirs >> t) & 1);
                for (uint32_t e = 0; e < 4; ++e) w.bad[e] = (mask >> e) & 1;
                WalkResult wr = walk_no_bad_probability(w);
                REQUIRE(std::fabs(wr.probability - walk_dp(w)) <= 1e-12);
                REQUIRE(wr.probability >= wr.bound - 1e-12);
                if (mask == 15) CHECK(wr.probability == doctest::Approx(wr.bound).epsilon(1e-12));
                ++configs;
            }
    CHECK(configs == 30 * 16);

    WalkSpec tri{3, 2, {0, 1, 1, 0, 1}, std::vector<uint8_t>(18, 0)};
    Rng rng(4);
    for (int t = 0; t < 200; ++t) {
        for (auto& b : tri.bad) b = rng() % 3 == 0;
        WalkResult wr = walk_no_bad_probability(tri);
        REQUIRE(std::fabs(wr.probability - walk_dp(tri)) <= 1e-12);
        CHECK(wr.probability >= wr.bound - 1e-12);
    }
    WalkResult mc = walk_no_bad_monte_carlo(tri, 200000, 5);
    CHECK_FALSE(mc.exact);
    CHECK(std::fabs(mc.probability - walk_dp(tri)) < 4 * mc.se + 1e-9);

    WalkSpec huge{2, 20, std::vector<uint32_t>(10, 0), std::vector<uint8_t>(20u << 19, 0)};
    CHECK_THROWS_AS(walk_no_bad_probability(huge), BudgetExceeded);
    CHECK_THROWS(walk_no_bad_probability(WalkSpec{2, 2, {2}, std::vector<uint8_t>(4)}));
}
