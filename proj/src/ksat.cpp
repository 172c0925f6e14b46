#include "ogp/ksat.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

namespace ogp {

char sym_char(Sym s) {
    switch (s) {
        case Sym::T: return 'T';
        case Sym::F: return 'F';
        default: return '?';
    }
}

Assignment parse_assignment(const std::string& s) {
    Assignment x;
    x.reserve(s.size());
    for (char c : s) {
        if (c == 'T' || c == 't' || c == '1') x.push_back(Sym::T);
        else if (c == 'F' || c == 'f' || c == '0') x.push_back(Sym::F);
        else if (c == '?' || c == 'E' || c == 'e') x.push_back(Sym::Err);
        else throw std::invalid_argument(std::string("bad assignment symbol: ") + c);
    }
    return x;
}

std::string format_assignment(const Assignment& x) {
    std::string s(x.size(), '?');
    for (size_t i = 0; i < x.size(); ++i) s[i] = sym_char(x[i]);
    return s;
}

Formula::Formula(uint32_t n_, uint32_t m_, uint32_t k_) : n(n_), m(m_), k(k_), lits(size_t(m_) * k_, 0) {}

Formula::Formula(uint32_t n_, uint32_t k_, const std::vector<std::vector<Literal>>& clauses)
    : n(n_), m(uint32_t(clauses.size())), k(k_) {
    lits.reserve(size_t(m) * k);
    for (auto& c : clauses) {
        if (c.size() != k) throw std::invalid_argument("clause width differs from k");
        for (auto& l : c) lits.push_back(l.id());
    }
    validate();
}

void Formula::validate() const {
    if (n == 0) throw std::invalid_argument("formula needs n >= 1");
    if (lits.size() != size_t(m) * k) throw std::invalid_argument("literal table size mismatch");
    for (uint32_t id : lits)
        if (id >= 2 * n) throw std::invalid_argument("literal id out of range");
}

Formula sample_formula(uint32_t n, uint32_t m, uint32_t k, uint64_t seed) {
    if (n == 0) throw std::invalid_argument("sample_formula: n must be >= 1");
    if (k == 0) throw std::invalid_argument("sample_formula: k must be >= 1");
    Formula f(n, m, k);
    f.lineage = seed;
    Rng rng = make_rng(seed, 0x51);
    std::uniform_int_distribution<uint32_t> lit(0, 2 * n - 1);
    for (auto& id : f.lits) id = lit(rng);
    return f;
}

Sym round_output(double x, bool* nan_flag) {
    if (std::isnan(x)) {
        if (nan_flag) *nan_flag = true;
        return Sym::Err;
    }
    if (x >= 1.0) return Sym::T;
    if (x <= -1.0) return Sym::F;
    return Sym::Err;
}

Sym strict_round(double x, bool* nan_flag) {
    if (std::isnan(x)) {
        if (nan_flag) *nan_flag = true;
        return Sym::Err;
    }
    if (std::fabs(x - 1.0) <= kStrictTol) return Sym::T;
    if (std::fabs(x + 1.0) <= kStrictTol) return Sym::F;
    return Sym::Err;
}

Sym strict_round_exact(int64_t x) {
    if (x == 1) return Sym::T;
    if (x == -1) return Sym::F;
    return Sym::Err;
}

bool literal_true(Literal l, Sym v) { return l.pos ? v == Sym::T : v == Sym::F; }

static void require_no_err(const Assignment& x, const Formula& f) {
    if (x.size() != f.n) throw ContractViolation("assignment length differs from n");
    for (Sym s : x)
        if (s == Sym::Err) throw ContractViolation("assignment contains err");
}

bool clause_satisfied(const Formula& f, uint32_t i, const Assignment& x) {
    for (uint32_t j = 0; j < f.k; ++j) {
        Literal l = f.at(i, j);
        if (literal_true(l, x[l.var])) return true;
    }
    return false;
}

uint32_t satisfied_count(const Formula& f, const Assignment& x) {
    require_no_err(x, f);
    uint32_t c = 0;
    for (uint32_t i = 0; i < f.m; ++i) c += clause_satisfied(f, i, x);
    return c;
}

bool count_meets_nu(uint32_t unsat, uint32_t m, double nu) {
    return double(unsat) <= nu * double(m) + 1e-9;
}

bool nu_satisfies(const Assignment& x, const Formula& f, double nu) {
    if (nu < 0 || nu > 1) throw std::invalid_argument("nu outside [0,1]");
    uint32_t sat = satisfied_count(f, x);
    return count_meets_nu(f.m - sat, f.m, nu);
}

int64_t max_flips(const Assignment& x, double eta) {
    int64_t cap = int64_t(std::floor(eta * double(x.size()) + 1e-9));
    int64_t errs = std::count(x.begin(), x.end(), Sym::Err);
    return cap - errs;
}

static uint64_t sat_add(uint64_t a, uint64_t b) { return a > UINT64_MAX - b ? UINT64_MAX : a + b; }
static uint64_t sat_mul(uint64_t a, uint64_t b) {
    if (a == 0 || b == 0) return 0;
    return a > UINT64_MAX / b ? UINT64_MAX : a * b;
}

uint64_t repair_candidate_count(const Assignment& x, double eta) {
    int64_t b = max_flips(x, eta);
    if (b < 0) return 0;
    uint64_t e = std::count(x.begin(), x.end(), Sym::Err);
    uint64_t free = x.size() - e;
    uint64_t sum = 0, c = 1;
    for (uint64_t j = 0; j <= uint64_t(b) && j <= free; ++j) {
        sum = sat_add(sum, c);
        // C(free, j+1) = C(free, j) * (free-j)/(j+1), done in long double to avoid overflow
        long double next = (long double)c * (long double)(free - j) / (long double)(j + 1);
        c = next > (long double)UINT64_MAX ? UINT64_MAX : uint64_t(next + 0.5L);
    }
    uint64_t pow2 = e >= 64 ? UINT64_MAX : (uint64_t(1) << e);
    return sat_mul(sum, pow2);
}

namespace {

struct Occurrences {
    std::vector<uint32_t> start, clause;
    std::vector<uint8_t> pos;
    explicit Occurrences(const Formula& f) : start(f.n + 1, 0) {
        for (uint32_t id : f.lits) start[(id >> 1) + 1]++;
        for (uint32_t v = 0; v < f.n; ++v) start[v + 1] += start[v];
        clause.resize(f.lits.size());
        pos.resize(f.lits.size());
        std::vector<uint32_t> fill(start.begin(), start.end() - 1);
        for (uint32_t i = 0; i < f.m; ++i)
            for (uint32_t j = 0; j < f.k; ++j) {
                Literal l = f.at(i, j);
                uint32_t p = fill[l.var]++;
                clause[p] = i;
                pos[p] = l.pos;
            }
    }
};

// incremental satisfied-clause counter over a full assignment
struct SatTracker {
    const Formula& f;
    const Occurrences& occ;
    Assignment y;
    std::vector<uint32_t> trues;
    uint32_t sat = 0;

    SatTracker(const Formula& f_, const Occurrences& o, Assignment y0) : f(f_), occ(o), y(std::move(y0)), trues(f_.m, 0) {
        for (uint32_t i = 0; i < f.m; ++i) {
            for (uint32_t j = 0; j < f.k; ++j) {
                Literal l = f.at(i, j);
                trues[i] += literal_true(l, y[l.var]);
            }
            sat += trues[i] > 0;
        }
    }
    void assign(uint32_t v, Sym s) {
        if (y[v] == s) return;
        for (uint32_t p = occ.start[v]; p < occ.start[v + 1]; ++p) {
            uint32_t c = occ.clause[p];
            bool was = literal_true({v, bool(occ.pos[p])}, y[v]);
            bool now = literal_true({v, bool(occ.pos[p])}, s);
            if (was == now) continue;
            if (now) {
                if (trues[c]++ == 0) ++sat;
            } else {
                if (--trues[c] == 0) --sat;
            }
        }
        y[v] = s;
    }
    int64_t gain(uint32_t v, Sym s) const {
        if (y[v] == s) return 0;
        int64_t g = 0;
        // per-clause delta; a clause may hold v several times
        std::vector<std::pair<uint32_t, int>> d;
        for (uint32_t p = occ.start[v]; p < occ.start[v + 1]; ++p) {
            bool was = literal_true({v, bool(occ.pos[p])}, y[v]);
            bool now = literal_true({v, bool(occ.pos[p])}, s);
            if (was != now) d.push_back({occ.clause[p], now ? 1 : -1});
        }
        std::sort(d.begin(), d.end());
        for (size_t a = 0; a < d.size();) {
            size_t b = a;
            int delta = 0;
            while (b < d.size() && d[b].first == d[a].first) delta += d[b++].second;
            int64_t before = trues[d[a].first], after = before + delta;
            g += int64_t(after > 0) - int64_t(before > 0);
            a = b;
        }
        return g;
    }
};

Sym flip(Sym s) { return s == Sym::T ? Sym::F : Sym::T; }

}  // namespace

void enumerate_repairs(const Assignment& x, const Formula& f, double eta,
                       const std::function<bool(const Assignment&, uint32_t)>& visit) {
    if (x.size() != f.n) throw ContractViolation("assignment length differs from n");
    int64_t b = max_flips(x, eta);
    if (b < 0) return;
    std::vector<uint32_t> errs, free;
    for (uint32_t i = 0; i < f.n; ++i) (x[i] == Sym::Err ? errs : free).push_back(i);
    Assignment y0 = x;
    for (uint32_t e : errs) y0[e] = Sym::T;
    Occurrences occ(f);
    SatTracker tr(f, occ, y0);
    bool stop = false;

    std::function<void(size_t, int64_t)> flips = [&](size_t from, int64_t left) {
        if (stop) return;
        if (!visit(tr.y, tr.sat)) {
            stop = true;
            return;
        }
        if (left == 0) return;
        for (size_t p = from; p < free.size() && !stop; ++p) {
            uint32_t v = free[p];
            tr.assign(v, flip(x[v]));
            flips(p + 1, left - 1);
            tr.assign(v, x[v]);
        }
    };
    std::function<void(size_t)> fill = [&](size_t e) {
        if (stop) return;
        if (e == errs.size()) {
            flips(0, b);
            return;
        }
        tr.assign(errs[e], Sym::T);
        fill(e + 1);
        if (stop) return;
        tr.assign(errs[e], Sym::F);
        fill(e + 1);
        tr.assign(errs[e], Sym::T);
    };
    fill(0);
}

Assignment greedy_repair(const Assignment& x, const Formula& f, int64_t flips) {
    Occurrences occ(f);
    Assignment y0 = x;
    for (auto& s : y0)
        if (s == Sym::Err) s = Sym::T;
    SatTracker tr(f, occ, y0);
    for (uint32_t v = 0; v < f.n; ++v)
        if (x[v] == Sym::Err && tr.gain(v, Sym::F) > 0) tr.assign(v, Sym::F);
    std::vector<uint8_t> used(f.n, 0);
    for (int64_t step = 0; step < flips; ++step) {
        int64_t best = 0;
        uint32_t arg = UINT32_MAX;
        for (uint32_t v = 0; v < f.n; ++v) {
            if (x[v] == Sym::Err || used[v]) continue;
            int64_t g = tr.gain(v, flip(x[v]));
            if (g > best) {
                best = g;
                arg = v;
            }
        }
        if (arg == UINT32_MAX) break;
        used[arg] = 1;
        tr.assign(arg, flip(x[arg]));
    }
    return tr.y;
}

EtaNuResult eta_nu_satisfies(const Assignment& x, const Formula& f, double eta, double nu, uint64_t budget) {
    if (eta < 0 || eta > 1 || nu < 0 || nu > 1) throw std::invalid_argument("eta, nu must lie in [0,1]");
    if (x.size() != f.n) throw ContractViolation("assignment length differs from n");
    EtaNuResult r;
    int64_t b = max_flips(x, eta);
    if (b < 0) return r;  // too many err entries
    r.candidates = repair_candidate_count(x, eta);
    if (r.candidates <= budget) {
        enumerate_repairs(x, f, eta, [&](const Assignment& y, uint32_t sat) {
            if (count_meets_nu(f.m - sat, f.m, nu)) {
                r.answer = Tri::True;
                r.witness = y;
                return false;
            }
            return true;
        });
        return r;
    }
    Assignment y = greedy_repair(x, f, b);
    Occurrences occ(f);
    SatTracker tr(f, occ, y);
    if (count_meets_nu(f.m - tr.sat, f.m, nu)) {
        r.answer = Tri::True;
        r.witness = y;
        return r;
    }
    r.answer = Tri::Unknown;
    r.exact = false;
    return r;
}

double hamming_delta(const Assignment& x, const Assignment& y) {
    if (x.size() != y.size()) throw std::invalid_argument("hamming_delta: length mismatch");
    if (x.empty()) return 0.0;
    size_t d = 0;
    for (size_t i = 0; i < x.size(); ++i) d += x[i] != y[i];
    return double(d) / double(x.size());
}

size_t OneHot::popcount() const {
    size_t c = 0;
    for (uint64_t w : words) c += size_t(__builtin_popcountll(w));
    return c;
}

OneHot encode_one_hot(const Formula& f) {
    OneHot h;
    h.n = f.n;
    h.m = f.m;
    h.k = f.k;
    h.words.assign((h.size() + 63) / 64, 0);
    for (uint32_t i = 0; i < f.m; ++i)
        for (uint32_t j = 0; j < f.k; ++j) h.set(h.index(i, j, f.id(i, j)));
    return h;
}

Formula decode_one_hot(const OneHot& h) {
    Formula f(h.n, h.m, h.k);
    for (uint32_t i = 0; i < h.m; ++i)
        for (uint32_t j = 0; j < h.k; ++j) {
            int found = -1;
            for (uint32_t s = 0; s < 2 * h.n; ++s) {
                if (!h.get(h.index(i, j, s))) continue;
                if (found >= 0) throw std::invalid_argument("one-hot slot has several bits set");
                found = int(s);
            }
            if (found < 0) throw std::invalid_argument("one-hot slot has no bit set");
            f.lits[size_t(i) * h.k + j] = uint32_t(found);
        }
    return f;
}

namespace {
void put_u32(std::ostream& os, uint32_t v) {
    unsigned char b[4] = {uint8_t(v), uint8_t(v >> 8), uint8_t(v >> 16), uint8_t(v >> 24)};
    os.write(reinterpret_cast<char*>(b), 4);
}
void put_u64(std::ostream& os, uint64_t v) {
    put_u32(os, uint32_t(v));
    put_u32(os, uint32_t(v >> 32));
}
uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4)) throw std::runtime_error("native: truncated input");
    return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 | uint32_t(b[3]) << 24;
}
uint64_t get_u64(std::istream& is) {
    uint64_t lo = get_u32(is);
    return lo | uint64_t(get_u32(is)) << 32;
}
}  // namespace

void write_native(std::ostream& os, const Formula& f) {
    os.write("KSAT1", 5);
    put_u32(os, f.n);
    put_u32(os, f.m);
    put_u32(os, f.k);
    put_u64(os, f.lineage);
    for (uint32_t id : f.lits) put_u32(os, id);
}

Formula read_native(std::istream& is) {
    char magic[5];
    if (!is.read(magic, 5) || std::memcmp(magic, "KSAT1", 5) != 0) throw std::runtime_error("native: bad magic");
    uint32_t n = get_u32(is), m = get_u32(is), k = get_u32(is);
    Formula f(n, m, k);
    f.lineage = get_u64(is);
    for (auto& id : f.lits) id = get_u32(is);
    f.validate();
    return f;
}

std::vector<std::string> write_dimacs(std::ostream& os, const Formula& f, const DimacsOptions& opt) {
    std::vector<std::string> warn;
    os << "p cnf " << f.n << ' ' << f.m << '\n';
    std::vector<uint32_t> seen;
    for (uint32_t i = 0; i < f.m; ++i) {
        seen.clear();
        size_t dropped = 0;
        for (uint32_t j = 0; j < f.k; ++j) {
            uint32_t id = f.id(i, j);
            if (!opt.allow_dups && std::find(seen.begin(), seen.end(), id) != seen.end()) {
                ++dropped;
                continue;
            }
            seen.push_back(id);
            Literal l = Literal::from_id(id);
            os << (l.pos ? "" : "-") << (l.var + 1) << ' ';
        }
        os << "0\n";
        if (dropped)
            warn.push_back("clause " + std::to_string(i) + ": dropped " + std::to_string(dropped) +
                           " repeated literal(s)");
    }
    return warn;
}

Formula read_dimacs(std::istream& is, const DimacsOptions& opt) {
    std::string line;
    long n = -1, m = -1;
    std::vector<std::vector<Literal>> clauses;
    std::vector<Literal> cur;
    while (std::getline(is, line)) {
        std::istringstream ss(line);
        std::string tok;
        if (!(ss >> tok)) continue;
        if (tok == "c" || tok[0] == 'c' || tok == "%") continue;
        if (tok == "p") {
            std::string fmt;
            if (!(ss >> fmt >> n >> m) || fmt != "cnf" || n < 1 || m < 0)
                throw std::runtime_error("dimacs: malformed header");
            continue;
        }
        if (n < 0) throw std::runtime_error("dimacs: clause before header");
        ss.clear();
        ss.str(line);
        long lit;
        while (ss >> lit) {
            if (lit == 0) {
                clauses.push_back(cur);
                cur.clear();
                continue;
            }
            long v = lit < 0 ? -lit : lit;
            if (v > n) throw std::runtime_error("dimacs: variable out of range");
            cur.push_back({uint32_t(v - 1), lit > 0});
        }
    }
    if (!cur.empty()) throw std::runtime_error("dimacs: unterminated clause");
    if (n < 0) throw std::runtime_error("dimacs: missing header");
    if (long(clauses.size()) != m) throw std::runtime_error("dimacs: clause count differs from header");
    uint32_t k = clauses.empty() ? 1 : uint32_t(clauses[0].size());
    for (auto& c : clauses) {
        if (c.size() != k || k == 0) throw std::runtime_error("dimacs: non-uniform clause width");
        if (opt.strict)
            for (auto& a : c)
                for (auto& b : c)
                    if (a.var == b.var && a.pos != b.pos) throw std::runtime_error("dimacs: tautological clause");
    }
    return Formula(uint32_t(n), k, clauses);
}

}  // namespace ogp
