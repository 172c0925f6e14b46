#include "ogp/interpolation.hpp"

#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>

namespace ogp {

InterpolationPath::InterpolationPath(uint32_t n, uint32_t m, uint32_t k, uint64_t seed, uint64_t length)
    : base_(sample_formula(n, m, k, derive_seed(seed, 1))) {
    decoration_words(n, m, k, derive_seed(seed, 2), vwords_, ewords0_);
    period_ = uint64_t(m) * k;
    length_ = length ? length : uint64_t(k) * period_;
    Rng rng = make_rng(seed, 0x1A7);
    std::uniform_int_distribution<uint32_t> lit(0, 2 * n - 1);
    lit_.resize(length_);
    eword_.resize(length_);
    for (uint64_t t = 0; t < length_; ++t) {
        lit_[t] = lit(rng);
        eword_[t] = rng();
    }
    std::vector<uint32_t> lits = base_.lits;
    std::vector<uint64_t> words = ewords0_;
    check_lits_.push_back(lits);
    check_words_.push_back(words);
    for (uint64_t t = 1; t <= length_ && period_ > 0; ++t) {
        lits[slot(t)] = lit_[t - 1];
        words[slot(t)] = eword_[t - 1];
        if (t % period_ == 0) {
            check_lits_.push_back(lits);
            check_words_.push_back(words);
        }
    }
}

Formula InterpolationPath::materialize(uint64_t t) const {
    if (t > length_) throw std::out_of_range("step beyond path length");
    Formula f = base_;
    uint64_t c = period_ ? t / period_ : 0;
    f.lits = check_lits_[c];
    for (uint64_t s = c * period_ + 1; s <= t; ++s) f.lits[slot(s)] = lit_[s - 1];
    return f;
}

std::vector<uint64_t> InterpolationPath::edge_words(uint64_t t) const {
    if (t > length_) throw std::out_of_range("step beyond path length");
    uint64_t c = period_ ? t / period_ : 0;
    std::vector<uint64_t> w = check_words_[c];
    for (uint64_t s = c * period_ + 1; s <= t; ++s) w[slot(s)] = eword_[s - 1];
    return w;
}

FactorGraph InterpolationPath::graph(uint64_t t) const {
    return build_factor_graph(materialize(t), vwords_, edge_words(t));
}

BranchedInterpolation::BranchedInterpolation(uint32_t n, uint32_t m, uint32_t k, uint64_t seed)
    : base_(sample_formula(n, m, k, derive_seed(seed, 1))) {
    decoration_words(n, m, k, derive_seed(seed, 2), vwords_, ewords0_);
    std::uniform_int_distribution<uint32_t> lit(0, 2 * n - 1);
    lit_.resize(k);
    eword_.resize(k);
    for (uint32_t b = 0; b < k; ++b) {
        Rng rng = make_rng(seed, 0xB000 + b);
        for (uint64_t t = 0; t < branch_length(); ++t) {
            lit_[b].push_back(lit(rng));
            eword_[b].push_back(rng());
        }
    }
}

Formula BranchedInterpolation::materialize(uint32_t branch, uint64_t t) const {
    if (branch >= branches() || t > branch_length()) throw std::out_of_range("branch step");
    Formula f = base_;
    for (uint64_t s = 0; s < t; ++s) f.lits[s] = lit_[branch][s];
    return f;
}

FactorGraph BranchedInterpolation::graph(uint32_t branch, uint64_t t) const {
    std::vector<uint64_t> w = ewords0_;
    for (uint64_t s = 0; s < t; ++s) w[s] = eword_[branch][s];
    return build_factor_graph(materialize(branch, t), vwords_, w);
}

std::vector<uint32_t> detect_c_bad(const std::vector<std::vector<double>>& outputs, double c, double gamma) {
    std::vector<uint32_t> bad;
    if (outputs.empty()) return bad;
    const size_t n = outputs[0].size();
    for (auto& o : outputs)
        if (o.size() != n) throw std::invalid_argument("output dimension mismatch");
    for (size_t t = 1; t < outputs.size(); ++t) {
        double d = 0;
        for (size_t i = 0; i < n; ++i) d += (outputs[t][i] - outputs[t - 1][i]) * (outputs[t][i] - outputs[t - 1][i]);
        if (d > c * gamma * double(n)) bad.push_back(uint32_t(t));
    }
    return bad;
}

InfluenceEstimate estimate_influences(const VectorAlgorithm& f, uint32_t n, uint32_t m, uint32_t k, double c,
                                      double gamma, uint32_t samples, uint64_t seed) {
    const uint32_t slots = m * k;
    std::vector<uint64_t> hits(slots, 0);
    std::mutex mu;
    std::exception_ptr err;
#pragma omp parallel
    {
        std::vector<uint64_t> local(slots, 0);
#pragma omp for schedule(dynamic, 1)
        for (int64_t s = 0; s < int64_t(samples); ++s) {
          try {
            uint64_t sd = derive_seed(seed, uint64_t(s));
            Formula phi = sample_formula(n, m, k, sd);
            std::vector<uint64_t> vw, ew;
            decoration_words(n, m, k, derive_seed(sd, 2), vw, ew);
            std::vector<double> base = f(phi, build_factor_graph(phi, vw, ew));
            Rng rng = make_rng(sd, 0x1F);
            std::uniform_int_distribution<uint32_t> other(0, 2 * n - 2);
            for (uint32_t j = 0; j < slots; ++j) {
                Formula alt = phi;
                uint32_t v = other(rng);
                alt.lits[j] = v >= phi.lits[j] ? v + 1 : v;
                std::vector<double> out = f(alt, build_factor_graph(alt, vw, ew));
                if (out.size() != base.size()) throw std::invalid_argument("output dimension mismatch");
                double d = 0;
                for (size_t i = 0; i < out.size(); ++i) d += (out[i] - base[i]) * (out[i] - base[i]);
                if (d > c * gamma * double(n)) local[j]++;
            }
          } catch (...) {
            std::lock_guard<std::mutex> lk(mu);
            if (!err) err = std::current_exception();
          }
        }
        std::lock_guard<std::mutex> lk(mu);
        for (uint32_t j = 0; j < slots; ++j) hits[j] += local[j];
    }
    if (err) std::rethrow_exception(err);
    InfluenceEstimate est;
    for (uint32_t j = 0; j < slots; ++j) {
        est.lambda.push_back(samples ? double(hits[j]) / samples : 0.0);
        est.ci.push_back(wilson_interval(hits[j], samples));
        est.total += est.lambda.back();
        est.total_ci.lo += est.ci.back().lo;
        est.total_ci.hi += est.ci.back().hi;
    }
    return est;
}

namespace {

uint64_t ipow(uint64_t b, uint32_t e) {
    uint64_t r = 1;
    while (e--) r *= b;
    return r;
}

}  // namespace

uint64_t WalkSpec::vertices() const { return ipow(alphabet, J); }

uint64_t WalkSpec::edges_per_direction() const {
    return ipow(alphabet, J - 1) * (uint64_t(alphabet) * (alphabet - 1) / 2);
}

uint32_t WalkSpec::coord(uint64_t x, uint32_t j) const { return uint32_t(x / ipow(alphabet, j) % alphabet); }

uint64_t WalkSpec::edge_id(uint64_t x, uint32_t j, uint32_t b) const {
    uint32_t a = coord(x, j);
    if (a == b) throw std::invalid_argument("not an edge");
    uint64_t lo = std::min(a, b), hi = std::max(a, b), q = alphabet;
    uint64_t pj = ipow(alphabet, j);
    uint64_t rank = (x / (pj * q)) * pj + x % pj;
    uint64_t pair = lo * q - lo * (lo + 1) / 2 + (hi - lo - 1);
    return j * edges_per_direction() + rank * (q * (q - 1) / 2) + pair;
}

std::vector<double> WalkSpec::lambdas() const {
    std::vector<double> lam(J, 0.0);
    uint64_t epd = edges_per_direction();
    for (uint32_t j = 0; j < J; ++j) {
        uint64_t c = 0;
        for (uint64_t e = 0; e < epd; ++e) c += bad.at(j * epd + e) != 0;
        lam[j] = double(c) / epd;
    }
    return lam;
}

namespace {

double walk_bound(const WalkSpec& spec) {
    std::vector<double> lam = spec.lambdas();
    double s = 0;
    for (uint32_t d : spec.sigma) s += lam.at(d);
    return std::pow(double(spec.alphabet), -s);
}

void check_spec(const WalkSpec& spec) {
    if (spec.alphabet < 2 || spec.J < 1) throw std::invalid_argument("walk needs |Sigma| >= 2 and J >= 1");
    if (spec.bad.size() != spec.edge_count()) throw std::invalid_argument("bad-edge table size");
    for (uint32_t d : spec.sigma)
        if (d >= spec.J) throw std::invalid_argument("direction out of range");
}

}  // namespace

WalkResult walk_no_bad_probability(const WalkSpec& spec, uint64_t budget) {
    check_spec(spec);
    const uint64_t V = spec.vertices();
    const uint32_t T = uint32_t(spec.sigma.size());
    const uint64_t q = spec.alphabet;
    uint64_t seqs = 1;
    for (uint32_t t = 0; t < T; ++t) {
        if (seqs > budget / q) throw BudgetExceeded("walk enumeration over budget");
        seqs *= q;
    }
    if (V > budget / seqs) throw BudgetExceeded("walk enumeration over budget");
    uint64_t good = 0;
#pragma omp parallel for reduction(+ : good) schedule(static)
    for (int64_t start = 0; start < int64_t(V); ++start) {
        for (uint64_t code = 0; code < seqs; ++code) {
            uint64_t x = uint64_t(start), z = code;
            bool ok = true;
            for (uint32_t t = 0; t < T && ok; ++t) {
                uint32_t j = spec.sigma[t];
                uint32_t b = uint32_t(z % q);
                z /= q;
                uint32_t a = spec.coord(x, j);
                if (a == b) continue;
                if (spec.bad[spec.edge_id(x, j, b)]) ok = false;
                x = x - a * ipow(q, j) + b * ipow(q, j);
            }
            good += ok;
        }
    }
    WalkResult r;
    r.probability = double(good) / double(V * seqs);
    r.bound = walk_bound(spec);
    return r;
}

WalkResult walk_no_bad_monte_carlo(const WalkSpec& spec, uint64_t samples, uint64_t seed) {
    check_spec(spec);
    Rng rng = make_rng(seed, 0x3A);
    std::uniform_int_distribution<uint64_t> start(0, spec.vertices() - 1);
    std::uniform_int_distribution<uint32_t> sym(0, spec.alphabet - 1);
    uint64_t good = 0;
    for (uint64_t s = 0; s < samples; ++s) {
        uint64_t x = start(rng);
        bool ok = true;
        for (uint32_t j : spec.sigma) {
            uint32_t b = sym(rng), a = spec.coord(x, j);
            if (a == b) continue;
            if (spec.bad[spec.edge_id(x, j, b)]) {
                ok = false;
                break;
            }
            x = x - a * ipow(spec.alphabet, j) + b * ipow(spec.alphabet, j);
        }
        good += ok;
    }
    WalkResult r;
    r.exact = false;
    r.probability = samples ? double(good) / samples : 0;
    r.se = samples ? std::sqrt(r.probability * (1 - r.probability) / samples) : 0;
    r.bound = walk_bound(spec);
    return r;
}

}  // namespace ogp
