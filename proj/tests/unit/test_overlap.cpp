#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "ogp/constants.hpp"
#include "ogp/overlap.hpp"

using namespace ogp;

namespace {

Assignment random_assignment(Rng& rng, uint32_t n, double p_true = 0.5) {
    std::bernoulli_distribution b(p_true);
    Assignment x(n);
    for (auto& v : x) v = b(rng) ? Sym::T : Sym::F;
    return x;
}

std::vector<Assignment> random_tuple(Rng& rng, uint32_t n, uint32_t l) {
    // correlated rows so that profiles are not near uniform
    std::vector<Assignment> ys{random_assignment(rng, n)};
    std::uniform_real_distribution<double> u(0, 1);
    for (uint32_t t = 1; t < l; ++t) {
        Assignment y = ys[rng() % ys.size()];
        double flip = u(rng) * 0.6;
        for (auto& v : y)
            if (u(rng) < flip) v = v == Sym::T ? Sym::F : Sym::T;
        ys.push_back(y);
    }
    return ys;
}

// direct definition: brute-force over bipartitions
std::map<uint64_t, double> direct_profile(const std::vector<Assignment>& ys) {
    uint32_t l = uint32_t(ys.size()), n = uint32_t(ys[0].size());
    std::map<uint64_t, double> out;
    for (uint64_t mask = 1; mask < (uint64_t(1) << l); mask += 2) {
        uint32_t count = 0;
        for (uint32_t i = 0; i < n; ++i) {
            bool ok = true;
            for (uint32_t t = 0; t < l; ++t) {
                bool same_side = (mask >> t) & 1u;
                ok &= (ys[t][i] == ys[0][i]) == same_side;
            }
            count += ok;
        }
        if (count) out[mask] = double(count) / n;
    }
    return out;
}

double brute_energy(const std::vector<Assignment>& ys) {
    uint32_t n = uint32_t(ys[0].size()), k = uint32_t(ys.size()) - 1;
    uint64_t total = 1;
    for (uint32_t r = 0; r < k; ++r) total *= n;
    double sum = 0;
    for (uint64_t code = 0; code < total; ++code) {
        std::set<std::vector<Sym>> distinct;
        for (const auto& y : ys) {
            std::vector<Sym> s;
            uint64_t z = code;
            for (uint32_t r = 0; r < k; ++r, z /= n) s.push_back(y[z % n]);
            distinct.insert(s);
        }
        sum += double(distinct.size());
    }
    return sum / double(total);
}

// p_k(sigma) and q_l(sigma) straight from the index tuples, in the frame where y^0 = T^n
void brute_decoupling(const std::vector<Assignment>& ys, std::vector<std::vector<double>>& p,
                      std::vector<std::vector<double>>& q) {
    uint32_t n = uint32_t(ys[0].size()), k = uint32_t(ys.size()) - 1;
    double thr = 1.0 / (k * std::log(double(k)));
    auto agree = [&](uint32_t l, uint32_t i) { return ys[l][i] == ys[0][i]; };
    // phi(l, i, b) = fraction of coordinates j matching i on rows 1..l-1 with agree(l, j) == b
    auto phi = [&](uint32_t l, uint32_t i, bool b) {
        double tot = 0, hit = 0;
        for (uint32_t j = 0; j < n; ++j) {
            bool same = true;
            for (uint32_t t = 1; t < l; ++t) same &= agree(t, j) == agree(t, i);
            if (!same) continue;
            tot++;
            hit += agree(l, j) == b;
        }
        return hit / tot;
    };
    size_t S = size_t(1) << k;
    p.assign(S, std::vector<double>(k + 1, 0));
    q.assign(S, std::vector<double>(k + 1, 0));
    uint64_t total = 1;
    for (uint32_t r = 0; r < k; ++r) total *= n;
    for (uint64_t code = 0; code < total; ++code) {
        std::vector<uint32_t> I;
        uint64_t z = code;
        for (uint32_t r = 0; r < k; ++r, z /= n) I.push_back(uint32_t(z % n));
        double w = 1.0 / double(total);
        for (uint64_t sigma = 0; sigma < S; ++sigma) {
            bool seen = false;
            for (uint32_t l = 0; l <= k; ++l) {
                bool match = true;
                for (uint32_t r = 0; r < k; ++r) match &= agree(l, I[r]) == bool((sigma >> r) & 1u);
                seen |= match;
                if (seen) p[sigma][l] += w;
            }
            for (uint32_t l = 1; l <= k; ++l) {
                double prod = 1;
                for (uint32_t r = 0; r < k; ++r) prod *= phi(l, I[r], (sigma >> r) & 1u);
                if (prod <= thr) q[sigma][l] += w * prod;
            }
        }
    }
}

}  // namespace

TEST_CASE("profile examples") {
    Assignment a = parse_assignment("TFTTF");
    OverlapProfile same = profile({a, a, a});
    REQUIRE(same.entries.size() == 1);
    CHECK(same.entries[0].first == 0b111);
    CHECK(same.fraction(0b111) == 1);
    CHECK(entropy(same) == 0);

    OverlapProfile q = profile({parse_assignment("TTTT"), parse_assignment("TTFF"), parse_assignment("TFTF")});
    CHECK(q.fraction(0b111) == 0.25);
    CHECK(q.fraction(0b011) == 0.25);
    CHECK(q.fraction(0b101) == 0.25);
    CHECK(q.fraction(0b001) == 0.25);
    CHECK(q.total() == 4);
    CHECK(entropy(q) == doctest::Approx(std::log(4.0)).epsilon(1e-14));

    OverlapProfile half = profile({parse_assignment("TTFF"), parse_assignment("TFFT")});
    CHECK(entropy(half) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    CHECK_THROWS(profile({parse_assignment("T?"), parse_assignment("TT")}));
}

TEST_CASE("profile matches the definition exhaustively at n = 3") {
    for (uint32_t a = 0; a < 8; ++a)
        for (uint32_t b = 0; b < 8; ++b) {
            Assignment x(3), y(3);
            for (int i = 0; i < 3; ++i) {
                x[i] = (a >> i) & 1 ? Sym::T : Sym::F;
                y[i] = (b >> i) & 1 ? Sym::T : Sym::F;
            }
            OverlapProfile p = profile({x, y});
            auto d = direct_profile({x, y});
            CHECK(p.entries.size() == d.size());
            for (auto& [mask, frac] : d) CHECK(p.fraction(mask) == frac);
        }
    Rng rng(1);
    for (int t = 0; t < 300; ++t) {
        auto ys = random_tuple(rng, 1 + rng() % 40, 1 + rng() % 5);
        OverlapProfile p = profile(ys);
        auto d = direct_profile(ys);
        CHECK(p.entries.size() == d.size());
        CHECK(p.entries.size() <= (size_t(1) << (ys.size() - 1)));
        CHECK(p.total() == ys[0].size());
        for (auto& [mask, frac] : d) CHECK(p.fraction(mask) == frac);
        CHECK(entropy(p) <= (ys.size() - 1) * std::log(2.0) + 1e-12);
    }
}

TEST_CASE("profile JSON round trip") {
    Rng rng(2);
    auto ys = random_tuple(rng, 30, 4);
    OverlapProfile p = profile(ys);
    std::string js = profile_json(p);
    CHECK(js.find("\"entries\"") != std::string::npos);
    OverlapProfile back = profile_from_json(js);
    CHECK(back.l == p.l);
    CHECK(back.n == p.n);
    CHECK(back.entries == p.entries);
}

TEST_CASE("conditional entropy") {
    Rng rng(3);
    auto ys = random_tuple(rng, 50, 3);
    auto dup = ys;
    dup.push_back(ys[1]);
    CHECK(conditional_entropy(dup) == 0);
    CHECK(entropy_of(dup) == entropy_of(ys));

    const uint32_t n = 20000;
    Assignment y0 = random_assignment(rng, n), y1 = random_assignment(rng, n);
    double h = conditional_entropy({y0, y1});
    // H(d) near d = 1/2 deviates from log 2 by about 2 (d - 1/2)^2
    CHECK(std::fabs(h - std::log(2.0)) < 2 * 16.0 / (4 * n));

    for (int t = 0; t < 2000; ++t) {
        auto zs = random_tuple(rng, 32, 4);
        std::vector<Assignment> prefix(zs.begin(), zs.end() - 1);
        double chain = entropy_of(zs) - entropy_of(prefix);
        REQUIRE(std::fabs(conditional_entropy(zs) - chain) <= 1e-12);
        CHECK(std::fabs(conditional_entropy(zs.back(), prefix) - conditional_entropy(zs)) <= 1e-12);
    }
}

TEST_CASE("duplication invariance") {
    Rng rng(4);
    for (int t = 0; t < 500; ++t) {
        auto ys = random_tuple(rng, 1 + rng() % 64, 1 + rng() % 4);
        auto dup = ys;
        dup.insert(dup.begin() + rng() % (dup.size() + 1), ys[rng() % ys.size()]);
        REQUIRE(entropy_of(dup) == entropy_of(ys));
    }
}

TEST_CASE("Hamming to entropy gap") {
    Rng rng(5);
    Assignment x = random_assignment(rng, 100);
    std::vector<Assignment> ys{random_assignment(rng, 100), random_assignment(rng, 100)};
    GapCheck same = hamming_entropy_gap_check(x, x, ys);
    CHECK(same.lhs == 0);
    CHECK(same.rhs == 0);
    CHECK(same.holds);
    Assignment x1 = x;
    x1[17] = x1[17] == Sym::T ? Sym::F : Sym::T;
    GapCheck one = hamming_entropy_gap_check(x, x1, ys);
    CHECK(one.rhs == doctest::Approx(binary_entropy(0.01)));
    CHECK(one.holds);
    Assignment far(100);
    for (uint32_t i = 0; i < 100; ++i) far[i] = x[i] == Sym::T ? Sym::F : Sym::T;
    CHECK_FALSE(hamming_entropy_gap_check(x, far, ys).applicable);

    std::uniform_real_distribution<double> u(0, 1);
    uint32_t violations = 0;
    for (int t = 0; t < 20000; ++t) {
        uint32_t n = 1 + rng() % 64;
        auto zs = random_tuple(rng, n, 1 + rng() % 4);
        Assignment a = random_assignment(rng, n), b = a;
        double flip = u(rng) * 0.5;
        for (auto& v : b)
            if (u(rng) < flip) v = v == Sym::T ? Sym::F : Sym::T;
        GapCheck g = hamming_entropy_gap_check(a, b, zs);
        if (g.applicable && !g.holds) ++violations;
    }
    CHECK(violations == 0);
}

TEST_CASE("energy examples") {
    Assignment t(5, Sym::T), f(5, Sym::F);
    CHECK(energy_exact({t, t, t, t}) == 1);
    CHECK(energy_exact({t, f}) == 2);
    Rng rng(6);
    auto ys = random_tuple(rng, 12, 3);
    auto mc = energy_monte_carlo(ys, 200000, 7);
    CHECK(std::fabs(mc.mean - energy_exact(ys)) < 4 * mc.se);
    auto big = random_tuple(rng, 200, 9);
    CHECK_THROWS_AS(energy_exact(big, 1000), BudgetExceeded);
}

TEST_CASE("energy equals the index-tuple brute force") {
    Rng rng(8);
    for (int t = 0; t < 200; ++t) {
        uint32_t n = 1 + rng() % 6, k = 1 + rng() % 3;
        auto ys = random_tuple(rng, n, k + 1);
        double exact = energy_exact(ys);
        REQUIRE(std::fabs(exact - brute_energy(ys)) <= 1e-12);
        double sum = 0;
        for (double p : energy_probabilities(ys)) sum += p;
        CHECK(std::fabs(sum - exact) <= 1e-12);
    }
}

TEST_CASE("energy lower bound") {
    CHECK(energy_lower_bound({1.0 + 1e-12}) == doctest::Approx(0).epsilon(1e-9));
    double bs = kappa_star().beta_star;
    CHECK(energy_lower_bound(std::vector<double>(7, bs)) == doctest::Approx(7 * (1 - bs * std::exp(-(bs - 1)))));
    CHECK(1 - bs * std::exp(-(bs - 1)) == doctest::Approx(0.7153).epsilon(1e-3));
    double prev = 0;
    for (double b = 1.01; b < 10; b += 0.1) {
        double v = energy_lower_bound({b, 2.0});
        CHECK(v > prev);
        prev = v;
    }
    CHECK_THROWS(energy_lower_bound({1.0}));
    CHECK_THROWS(energy_lower_bound({0.5, 2.0}));
}

TEST_CASE("decoupling inequalities") {
    Rng rng(9);
    SUBCASE("identical assignments") {
        Assignment y = random_assignment(rng, 8);
        DecouplingReport r = decoupling_check({y, y, y, y, y});
        CHECK(r.holds());
        for (size_t s = 0; s < r.p.size(); ++s)
            for (uint32_t l = 1; l <= 4; ++l) {
                CHECK(r.p[s][l] == r.p[s][0]);
                CHECK(r.q[s][l] == 0);
            }
    }
    SUBCASE("k = 2 is flagged degenerate") {
        for (int t = 0; t < 50; ++t) {
            auto ys = random_tuple(rng, 1 + rng() % 6, 3);
            DecouplingReport r = decoupling_check(ys);
            CHECK(r.degenerate);
            CHECK(r.threshold == doctest::Approx(1 / (2 * std::log(2.0))));
            CHECK(r.aux_violations == 0);
        }
    }
    SUBCASE("random n = 8, k = 4 against the index-tuple oracle") {
        for (int t = 0; t < 40; ++t) {
            auto ys = random_tuple(rng, 8, 5);
            DecouplingReport r = decoupling_check(ys);
            std::vector<std::vector<double>> p, q;
            brute_decoupling(ys, p, q);
            for (size_t s = 0; s < p.size(); ++s)
                for (uint32_t l = 0; l <= 4; ++l) {
                    REQUIRE(std::fabs(r.p[s][l] - p[s][l]) <= 1e-12);
                    REQUIRE(std::fabs(r.q[s][l] - q[s][l]) <= 1e-12);
                }
            CHECK(r.aux_violations == 0);
            CHECK(r.main_violations == 0);
        }
    }
    CHECK_THROWS(decoupling_check({Assignment(3, Sym::T), Assignment(3, Sym::T)}));
}

TEST_CASE("forbidden-structure scanner") {
    KappaSolution ks = solve_kappa(6);
    CHECK_THROWS(OgpBand(ks.beta_plus, ks.beta_minus, 5));
    OgpBand band16(ks.beta_minus, ks.beta_plus, 16);

    std::vector<Assignment> flat(50, Assignment(200, Sym::T));
    ScanResult none = scan_forbidden_structure(flat, band16, 0.1);
    CHECK(none.times.size() == 1);
    CHECK_FALSE(none.complete);

    // one bit per step from T^n toward an independent random string
    Rng rng(10);
    const uint32_t n = 200;
    Assignment target = random_assignment(rng, n);
    std::vector<Assignment> walk{Assignment(n, Sym::T)};
    for (uint32_t i = 0; i < n; ++i) {
        Assignment next = walk.back();
        next[i] = target[i];
        if (next != walk.back()) walk.push_back(next);
    }
    ScanResult found = scan_forbidden_structure(walk, band16, 0.1);
    REQUIRE(found.times.size() >= 2);
    CHECK(band16.contains(conditional_entropy(walk[found.times[1]], {walk[0]})));
    // against y^0 alone a single flip moves the entropy by at most H(1/n)
    for (size_t i = 1; i < found.trace.size(); ++i)
        if (found.trace[i].level == 1 && found.trace[i - 1].level == 1)
            CHECK(std::fabs(found.trace[i].h - found.trace[i - 1].h) <= binary_entropy(1.0 / n) + 1e-12);

    // at k = 5 the band lies above log 2, which no two-assignment conditional entropy can reach
    OgpBand band5(ks.beta_minus, ks.beta_plus, 5);
    CHECK(band5.lo() > std::log(2.0));
    CHECK(scan_forbidden_structure(walk, band5, 0.1).times.size() == 1);
}
