#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ogp/ksat.hpp"

namespace ogp {

// Entries keyed by the side containing index 0, as a bitmask; counts are numerators over n.
struct OverlapProfile {
    uint32_t l = 0, n = 0;
    std::vector<std::pair<uint64_t, uint64_t>> entries;  // (mask, count), sorted by mask, count > 0

    double fraction(uint64_t mask) const;
    uint64_t total() const;
};

OverlapProfile profile(const std::vector<Assignment>& ys);
double entropy(const OverlapProfile& p);
double entropy_of(const std::vector<Assignment>& ys);
// H(pi(y^{l-1} | y^0..y^{l-2})), evaluated from the conditional distributions directly
double conditional_entropy(const std::vector<Assignment>& ys);
double conditional_entropy(const Assignment& x, const std::vector<Assignment>& prefix);
double binary_entropy(double p);

std::string profile_json(const OverlapProfile& p);
OverlapProfile profile_from_json(const std::string& s);

struct GapCheck {
    double lhs = 0, rhs = 0;
    bool holds = true;
    bool applicable = true;
};
GapCheck hamming_entropy_gap_check(const Assignment& x, const Assignment& xp, const std::vector<Assignment>& ys);

// energy of y^0..y^k: E_{I ~ unif([n]^k)} |{y^l[I]}|
constexpr uint64_t kEnergyBudget = uint64_t(1) << 24;

struct ColumnTypes {
    uint32_t n = 0, rows = 0;
    std::vector<uint64_t> type;    // bit l = (y^l_i == T)
    std::vector<uint64_t> weight;  // multiplicity
};
ColumnTypes column_types(const std::vector<Assignment>& ys);

double energy_exact(const std::vector<Assignment>& ys, uint64_t budget = kEnergyBudget);  // throws BudgetExceeded
struct MonteCarloEstimate {
    double mean = 0, se = 0;
    uint64_t samples = 0;
};
MonteCarloEstimate energy_monte_carlo(const std::vector<Assignment>& ys, uint64_t samples, uint64_t seed);
// p_k(sigma) for every sigma in {T,F}^k, sigma bit r = (sigma_r == T)
std::vector<double> energy_probabilities(const std::vector<Assignment>& ys, uint64_t budget = kEnergyBudget);

double energy_lower_bound(const std::vector<double>& betas);

struct DecouplingReport {
    uint32_t k = 0;
    double threshold = 0;  // 1/(k log k)
    bool degenerate = false;
    // indexed [sigma][l] in the frame where y^0 = T^n
    std::vector<std::vector<double>> p, q;
    uint32_t aux_violations = 0, main_violations = 0;
    double worst_aux_slack = 0, worst_main_slack = 0;  // min over cases of lhs - rhs
    bool holds() const { return aux_violations == 0 && main_violations == 0; }
};
DecouplingReport decoupling_check(const std::vector<Assignment>& ys, uint64_t budget = kEnergyBudget);

struct OgpBand {
    double beta_minus = 0, beta_plus = 0;
    uint32_t k = 0;
    OgpBand(double bm, double bp, uint32_t k_);
    double lo() const;
    double hi() const;
    bool contains(double h) const { return h >= lo() && h <= hi(); }
};

struct ScanPoint {
    uint32_t t = 0, level = 0;
    double h = 0;
};

struct ScanResult {
    std::vector<ScanPoint> trace;   // every evaluated conditional entropy
    std::vector<uint32_t> times;    // t_0 = 0, t_1, ... found so far
    bool complete = false;          // all k levels found
    std::vector<uint8_t> satisfied; // nu-satisfaction of each chosen element (when formulas given)
};

ScanResult scan_forbidden_structure(const std::vector<Assignment>& outputs, const OgpBand& band, double nu,
                                    const std::vector<Formula>& formulas = {});

}  // namespace ogp
