#include "ogp/overlap.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace ogp {

namespace {

void check_tuple(const std::vector<Assignment>& ys) {
    if (ys.empty()) throw std::invalid_argument("empty assignment tuple");
    if (ys.size() > 63) throw std::invalid_argument("at most 63 assignments");
    size_t n = ys[0].size();
    for (auto& y : ys) {
        if (y.size() != n) throw std::invalid_argument("assignments of unequal length");
        for (Sym s : y)
            if (s == Sym::Err) throw std::invalid_argument("err symbol in overlap input");
    }
}

// bit t set iff y^t_i agrees with y^0_i
std::vector<uint64_t> agreement_masks(const std::vector<Assignment>& ys) {
    std::vector<uint64_t> masks(ys[0].size(), 0);
    for (size_t i = 0; i < masks.size(); ++i)
        for (size_t t = 0; t < ys.size(); ++t)
            if (ys[t][i] == ys[0][i]) masks[i] |= uint64_t(1) << t;
    return masks;
}

double xlogx(double p) { return p > 0 ? p * std::log(p) : 0.0; }

}  // namespace

double OverlapProfile::fraction(uint64_t mask) const {
    auto it = std::lower_bound(entries.begin(), entries.end(), std::make_pair(mask, uint64_t(0)));
    return it != entries.end() && it->first == mask ? double(it->second) / n : 0.0;
}

uint64_t OverlapProfile::total() const {
    uint64_t s = 0;
    for (auto& e : entries) s += e.second;
    return s;
}

OverlapProfile profile(const std::vector<Assignment>& ys) {
    check_tuple(ys);
    OverlapProfile p;
    p.l = uint32_t(ys.size());
    p.n = uint32_t(ys[0].size());
    std::vector<uint64_t> masks = agreement_masks(ys);
    std::sort(masks.begin(), masks.end());
    for (size_t i = 0; i < masks.size();) {
        size_t j = i;
        while (j < masks.size() && masks[j] == masks[i]) ++j;
        p.entries.push_back({masks[i], j - i});
        i = j;
    }
    return p;
}

double entropy(const OverlapProfile& p) {
    // summed in count order so that relabeling masks leaves the result bit-identical
    std::vector<uint64_t> counts;
    for (auto& e : p.entries) counts.push_back(e.second);
    std::sort(counts.begin(), counts.end());
    double h = 0;
    for (uint64_t c : counts) h -= xlogx(double(c) / p.n);
    return h;
}

double entropy_of(const std::vector<Assignment>& ys) { return entropy(profile(ys)); }

double binary_entropy(double p) { return -xlogx(p) - xlogx(1 - p); }

double conditional_entropy(const std::vector<Assignment>& ys) {
    if (ys.size() < 2) throw std::invalid_argument("conditional entropy needs at least two assignments");
    OverlapProfile p = profile(ys);
    uint64_t last = uint64_t(1) << (ys.size() - 1);
    // entries are sorted by mask, so a parent and its child with the last bit set are not adjacent;
    // gather the pairs through the parent mask
    std::vector<std::pair<uint64_t, uint64_t>> with, without;
    for (auto& e : p.entries) (e.first & last ? with : without).push_back({e.first & ~last, e.second});
    double h = 0;
    size_t a = 0, b = 0;
    while (a < with.size() || b < without.size()) {
        uint64_t ma = a < with.size() ? with[a].first : UINT64_MAX;
        uint64_t mb = b < without.size() ? without[b].first : UINT64_MAX;
        uint64_t m = std::min(ma, mb);
        uint64_t c1 = ma == m ? with[a++].second : 0;
        uint64_t c0 = mb == m ? without[b++].second : 0;
        double cp = double(c0 + c1);
        h += cp / p.n * binary_entropy(c1 / cp);
    }
    return h;
}

double conditional_entropy(const Assignment& x, const std::vector<Assignment>& prefix) {
    std::vector<Assignment> ys = prefix;
    ys.push_back(x);
    return conditional_entropy(ys);
}

std::string profile_json(const OverlapProfile& p) {
    nlohmann::json j;
    j["l"] = p.l;
    j["n"] = p.n;
    j["entries"] = nlohmann::json::array();
    for (auto& e : p.entries) j["entries"].push_back({{"mask", e.first}, {"num", e.second}});
    return j.dump();
}

OverlapProfile profile_from_json(const std::string& s) {
    auto j = nlohmann::json::parse(s);
    OverlapProfile p;
    p.l = j.at("l").get<uint32_t>();
    p.n = j.at("n").get<uint32_t>();
    for (auto& e : j.at("entries")) p.entries.push_back({e.at("mask").get<uint64_t>(), e.at("num").get<uint64_t>()});
    std::sort(p.entries.begin(), p.entries.end());
    if (p.total() != p.n) throw std::invalid_argument("profile counts do not sum to n");
    return p;
}

GapCheck hamming_entropy_gap_check(const Assignment& x, const Assignment& xp, const std::vector<Assignment>& ys) {
    GapCheck g;
    double d = hamming_delta(x, xp);
    g.rhs = binary_entropy(d);
    if (d > 0.5) {
        g.applicable = false;
        return g;
    }
    g.lhs = std::fabs(conditional_entropy(x, ys) - conditional_entropy(xp, ys));
    g.holds = g.lhs <= g.rhs + 1e-12;
    return g;
}

ColumnTypes column_types(const std::vector<Assignment>& ys) {
    check_tuple(ys);
    ColumnTypes ct;
    ct.n = uint32_t(ys[0].size());
    ct.rows = uint32_t(ys.size());
    std::vector<uint64_t> cols(ct.n, 0);
    for (uint32_t i = 0; i < ct.n; ++i)
        for (uint32_t l = 0; l < ct.rows; ++l)
            if (ys[l][i] == Sym::T) cols[i] |= uint64_t(1) << l;
    std::sort(cols.begin(), cols.end());
    for (size_t i = 0; i < cols.size();) {
        size_t j = i;
        while (j < cols.size() && cols[j] == cols[i]) ++j;
        ct.type.push_back(cols[i]);
        ct.weight.push_back(j - i);
        i = j;
    }
    return ct;
}

namespace {

uint64_t tuple_count(uint64_t c, uint32_t k, uint64_t budget) {
    uint64_t total = 1;
    for (uint32_t r = 0; r < k; ++r) {
        if (total > budget / std::max<uint64_t>(c, 1)) throw BudgetExceeded("column-type enumeration over budget");
        total *= c;
    }
    return total;
}

// visits every tuple of column types (I_1..I_k up to type), passing probability weight and the k+1 strings
template <class Visit>
void for_each_type_tuple(const ColumnTypes& ct, uint64_t budget, Visit&& visit) {
    const uint32_t k = ct.rows - 1;
    const uint32_t c = uint32_t(ct.type.size());
    tuple_count(c, k, budget);
    std::vector<uint32_t> idx(k, 0);
    std::vector<double> w(k + 1, 1.0);
    std::vector<std::vector<uint64_t>> strings(k + 1, std::vector<uint64_t>(ct.rows, 0));
    uint32_t depth = 0;
    if (k == 0) {
        visit(1.0, strings[0]);
        return;
    }
    idx[0] = 0;
    while (true) {
        uint64_t t = ct.type[idx[depth]];
        for (uint32_t l = 0; l < ct.rows; ++l)
            strings[depth + 1][l] = strings[depth][l] | (((t >> l) & 1u) << depth);
        w[depth + 1] = w[depth] * double(ct.weight[idx[depth]]) / ct.n;
        if (depth + 1 == k) {
            visit(w[k], strings[k]);
        } else {
            ++depth;
            idx[depth] = 0;
            continue;
        }
        while (true) {
            if (++idx[depth] < c) break;
            if (depth == 0) return;
            --depth;
        }
    }
}

uint32_t distinct_count(std::vector<uint64_t> v) {
    std::sort(v.begin(), v.end());
    return uint32_t(std::unique(v.begin(), v.end()) - v.begin());
}

}  // namespace

double energy_exact(const std::vector<Assignment>& ys, uint64_t budget) {
    ColumnTypes ct = column_types(ys);
    double e = 0;
    for_each_type_tuple(ct, budget, [&](double w, const std::vector<uint64_t>& s) { e += w * distinct_count(s); });
    return e;
}

MonteCarloEstimate energy_monte_carlo(const std::vector<Assignment>& ys, uint64_t samples, uint64_t seed) {
    check_tuple(ys);
    const uint32_t n = uint32_t(ys[0].size()), k = uint32_t(ys.size()) - 1;
    Rng rng = make_rng(seed, 0xE7);
    std::uniform_int_distribution<uint32_t> pick(0, n - 1);
    std::vector<uint64_t> s(k + 1);
    double sum = 0, sum2 = 0;
    for (uint64_t it = 0; it < samples; ++it) {
        std::fill(s.begin(), s.end(), 0);
        for (uint32_t r = 0; r < k; ++r) {
            uint32_t i = pick(rng);
            for (uint32_t l = 0; l <= k; ++l)
                if (ys[l][i] == Sym::T) s[l] |= uint64_t(1) << r;
        }
        double v = distinct_count(s);
        sum += v;
        sum2 += v * v;
    }
    MonteCarloEstimate est;
    est.samples = samples;
    est.mean = samples ? sum / samples : 0;
    if (samples > 1) est.se = std::sqrt(std::max(0.0, (sum2 - samples * est.mean * est.mean) / (samples - 1)) / samples);
    return est;
}

std::vector<double> energy_probabilities(const std::vector<Assignment>& ys, uint64_t budget) {
    ColumnTypes ct = column_types(ys);
    const uint32_t k = ct.rows - 1;
    if (k > 24) throw BudgetExceeded("too many sigma values");
    std::vector<double> p(size_t(1) << k, 0.0);
    for_each_type_tuple(ct, budget, [&](double w, const std::vector<uint64_t>& s) {
        std::vector<uint64_t> d = s;
        std::sort(d.begin(), d.end());
        d.erase(std::unique(d.begin(), d.end()), d.end());
        for (uint64_t sigma : d) p[sigma] += w;
    });
    return p;
}

double energy_lower_bound(const std::vector<double>& betas) {
    double s = 0;
    for (double b : betas) {
        if (!(b > 1)) throw std::invalid_argument("energy_lower_bound needs beta > 1");
        s += 1 - b * std::exp(-(b - 1));
    }
    return s;
}

DecouplingReport decoupling_check(const std::vector<Assignment>& ys, uint64_t budget) {
    check_tuple(ys);
    DecouplingReport rep;
    const uint32_t k = uint32_t(ys.size()) - 1;
    if (k < 2) throw std::invalid_argument("decoupling needs k >= 2");
    if (k > 16) throw BudgetExceeded("too many sigma values");
    rep.k = k;
    rep.threshold = 1.0 / (k * std::log(double(k)));
    rep.degenerate = k <= 3;
    // frame with y^0 = T^n: row l of a normalized column is 1 iff y^l_i agrees with y^0_i
    std::vector<Assignment> norm(ys.size(), Assignment(ys[0].size()));
    for (size_t l = 0; l < ys.size(); ++l)
        for (size_t i = 0; i < ys[0].size(); ++i) norm[l][i] = ys[l][i] == ys[0][i] ? Sym::T : Sym::F;
    ColumnTypes ct = column_types(norm);
    const uint32_t c = uint32_t(ct.type.size());
    // phi[l][type][b] = P[y^l = b | y^{1..l-1} equals that of the type]
    std::vector<std::vector<std::array<double, 2>>> phi(k + 1, std::vector<std::array<double, 2>>(c));
    for (uint32_t l = 1; l <= k; ++l) {
        uint64_t pre_mask = ((uint64_t(1) << l) - 1) & ~uint64_t(1);
        for (uint32_t a = 0; a < c; ++a) {
            double tot = 0, ones = 0;
            for (uint32_t b = 0; b < c; ++b)
                if ((ct.type[b] & pre_mask) == (ct.type[a] & pre_mask)) {
                    tot += ct.weight[b];
                    if ((ct.type[b] >> l) & 1u) ones += ct.weight[b];
                }
            phi[l][a] = {(tot - ones) / tot, ones / tot};
        }
    }
    const size_t S = size_t(1) << k;
    rep.p.assign(S, std::vector<double>(k + 1, 0.0));
    rep.q.assign(S, std::vector<double>(k + 1, 0.0));
    std::vector<uint32_t> idx(k);
    tuple_count(c, k, budget / S + 1);
    uint64_t total = 1;
    for (uint32_t r = 0; r < k; ++r) total *= c;
    for (uint64_t code = 0; code < total; ++code) {
        uint64_t z = code;
        double w = 1;
        for (uint32_t r = 0; r < k; ++r) {
            idx[r] = uint32_t(z % c);
            z /= c;
            w *= double(ct.weight[idx[r]]) / ct.n;
        }
        std::vector<uint64_t> s(k + 1, 0);
        for (uint32_t l = 0; l <= k; ++l)
            for (uint32_t r = 0; r < k; ++r) s[l] |= ((ct.type[idx[r]] >> l) & 1u) << r;
        for (uint64_t sigma = 0; sigma < S; ++sigma) {
            uint32_t first = k + 1;
            for (uint32_t l = 0; l <= k && first > k; ++l)
                if (s[l] == sigma) first = l;
            for (uint32_t l = first; l <= k; ++l) rep.p[sigma][l] += w;
            for (uint32_t l = 1; l <= k; ++l) {
                double prod = 1;
                for (uint32_t r = 0; r < k; ++r) prod *= phi[l][idx[r]][(sigma >> r) & 1u];
                if (prod <= rep.threshold) rep.q[sigma][l] += w * prod;
            }
        }
    }
    rep.worst_aux_slack = rep.worst_main_slack = INFINITY;
    const double main_factor = 1 - 1 / std::log(double(k));
    for (uint64_t sigma = 0; sigma < S; ++sigma) {
        double qsum = 0;
        for (uint32_t l = 1; l <= k; ++l) {
            double slack = rep.p[sigma][l] - ((1 - rep.threshold) * rep.p[sigma][l - 1] + rep.q[sigma][l]);
            rep.worst_aux_slack = std::min(rep.worst_aux_slack, slack);
            if (slack < -1e-12) rep.aux_violations++;
            qsum += rep.q[sigma][l];
        }
        double slack = rep.p[sigma][k] - main_factor * qsum;
        rep.worst_main_slack = std::min(rep.worst_main_slack, slack);
        if (slack < -1e-12) rep.main_violations++;
    }
    return rep;
}

OgpBand::OgpBand(double bm, double bp, uint32_t k_) : beta_minus(bm), beta_plus(bp), k(k_) {
    if (!(bm > 1) || !(bp > bm)) throw std::invalid_argument("band needs 1 < beta_minus < beta_plus");
    if (k < 2) throw std::invalid_argument("band needs k >= 2");
}

double OgpBand::lo() const { return beta_minus * std::log(double(k)) / k; }
double OgpBand::hi() const { return beta_plus * std::log(double(k)) / k; }

ScanResult scan_forbidden_structure(const std::vector<Assignment>& outputs, const OgpBand& band, double nu,
                                    const std::vector<Formula>& formulas) {
    if (!formulas.empty() && formulas.size() != outputs.size())
        throw std::invalid_argument("formulas not aligned with outputs");
    ScanResult res;
    if (outputs.empty()) return res;
    std::vector<Assignment> chosen{outputs[0]};
    res.times.push_back(0);
    uint32_t t = 1;
    while (chosen.size() <= band.k && t < outputs.size()) {
        double h = conditional_entropy(outputs[t], chosen);
        res.trace.push_back({t, uint32_t(chosen.size()), h});
        if (band.contains(h)) {
            chosen.push_back(outputs[t]);
            res.times.push_back(t);
        }
        ++t;
    }
    res.complete = chosen.size() == band.k + 1;
    if (!formulas.empty())
        for (uint32_t tt : res.times) res.satisfied.push_back(nu_satisfies(outputs[tt], formulas[tt], nu));
    return res;
}

}  // namespace ogp
