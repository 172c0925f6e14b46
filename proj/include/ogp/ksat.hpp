#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "ogp/common.hpp"

namespace ogp {

enum class Sym : int8_t { F = -1, Err = 0, T = 1 };

using Assignment = std::vector<Sym>;

char sym_char(Sym s);
Assignment parse_assignment(const std::string& s);  // "TF?" with '?' or 'E' for err
std::string format_assignment(const Assignment& x);

struct Literal {
    uint32_t var = 0;
    bool pos = true;

    uint32_t id() const { return 2 * var + (pos ? 1u : 0u); }
    static Literal from_id(uint32_t id) { return {id >> 1, (id & 1u) != 0}; }
    bool operator==(const Literal&) const = default;
};

// m x k table of literal ids, row-major; slot index j = i*k + s is the lexicographic order
struct Formula {
    uint32_t n = 0, m = 0, k = 0;
    std::vector<uint32_t> lits;
    uint64_t lineage = 0;

    Formula() = default;
    Formula(uint32_t n_, uint32_t m_, uint32_t k_);
    Formula(uint32_t n_, uint32_t k_, const std::vector<std::vector<Literal>>& clauses);

    Literal at(uint32_t i, uint32_t j) const { return Literal::from_id(lits[size_t(i) * k + j]); }
    uint32_t id(uint32_t i, uint32_t j) const { return lits[size_t(i) * k + j]; }
    void set(uint32_t i, uint32_t j, Literal l) { lits[size_t(i) * k + j] = l.id(); }
    size_t slots() const { return lits.size(); }
    void validate() const;
    bool operator==(const Formula& o) const {
        return n == o.n && m == o.m && k == o.k && lits == o.lits;
    }
};

Formula sample_formula(uint32_t n, uint32_t m, uint32_t k, uint64_t seed);

Sym round_output(double x, bool* nan_flag = nullptr);
Sym strict_round(double x, bool* nan_flag = nullptr);
Sym strict_round_exact(int64_t x);
constexpr double kStrictTol = 1e-9;

bool literal_true(Literal l, Sym v);
bool clause_satisfied(const Formula& f, uint32_t i, const Assignment& x);
uint32_t satisfied_count(const Formula& f, const Assignment& x);
bool nu_satisfies(const Assignment& x, const Formula& f, double nu);
bool count_meets_nu(uint32_t unsat, uint32_t m, double nu);

enum class Tri { False = 0, True = 1, Unknown = 2 };

struct EtaNuResult {
    Tri answer = Tri::False;
    Assignment witness;
    bool exact = true;
    uint64_t candidates = 0;
};

constexpr uint64_t kRepairBudget = 1000000;

// number of y in {T,F}^n with Δ(x,y) <= eta, saturating at UINT64_MAX
uint64_t repair_candidate_count(const Assignment& x, double eta);
int64_t max_flips(const Assignment& x, double eta);

// calls visit(y, satisfied) for every y within eta of x; visit returns false to stop
void enumerate_repairs(const Assignment& x, const Formula& f, double eta,
                       const std::function<bool(const Assignment&, uint32_t)>& visit);

// greedy local repair: at most `flips` changes of non-err coordinates after filling err entries
Assignment greedy_repair(const Assignment& x, const Formula& f, int64_t flips);

EtaNuResult eta_nu_satisfies(const Assignment& x, const Formula& f, double eta, double nu,
                             uint64_t budget = kRepairBudget);

double hamming_delta(const Assignment& x, const Assignment& y);

struct OneHot {
    uint32_t n = 0, m = 0, k = 0;
    std::vector<uint64_t> words;
    size_t size() const { return size_t(m) * k * 2 * n; }
    bool get(size_t idx) const { return (words[idx >> 6] >> (idx & 63)) & 1u; }
    void set(size_t idx) { words[idx >> 6] |= uint64_t(1) << (idx & 63); }
    void clear(size_t idx) { words[idx >> 6] &= ~(uint64_t(1) << (idx & 63)); }
    size_t index(uint32_t i, uint32_t j, uint32_t s) const {
        return (size_t(i) * k + j) * 2 * n + s;
    }
    size_t popcount() const;
};

OneHot encode_one_hot(const Formula& f);
Formula decode_one_hot(const OneHot& h);

void write_native(std::ostream& os, const Formula& f);
Formula read_native(std::istream& is);

struct DimacsOptions {
    bool allow_dups = false;
    bool strict = false;
};

// returns warnings emitted while writing (deduplicated clauses)
std::vector<std::string> write_dimacs(std::ostream& os, const Formula& f, const DimacsOptions& opt = {});
Formula read_dimacs(std::istream& is, const DimacsOptions& opt = {});

}  // namespace ogp
