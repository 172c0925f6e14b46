#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ogp/factor_graph.hpp"

namespace ogp {

// Step t (1-based) resamples slot (t-1) mod km with a fresh literal and a fresh edge word.
class InterpolationPath {
public:
    InterpolationPath(uint32_t n, uint32_t m, uint32_t k, uint64_t seed, uint64_t length = 0);

    uint32_t n() const { return base_.n; }
    uint32_t m() const { return base_.m; }
    uint32_t k() const { return base_.k; }
    uint64_t length() const { return length_; }  // k^2 m unless given
    uint32_t slot(uint64_t t) const { return uint32_t((t - 1) % (uint64_t(base_.m) * base_.k)); }
    uint32_t literal(uint64_t t) const { return lit_[t - 1]; }
    uint64_t edge_word(uint64_t t) const { return eword_[t - 1]; }
    const Formula& base() const { return base_; }
    const std::vector<uint64_t>& vertex_words() const { return vwords_; }

    Formula materialize(uint64_t t) const;
    std::vector<uint64_t> edge_words(uint64_t t) const;
    FactorGraph graph(uint64_t t) const;

private:
    Formula base_;
    uint64_t length_ = 0;
    std::vector<uint64_t> vwords_, ewords0_;
    std::vector<uint32_t> lit_;
    std::vector<uint64_t> eword_;
    uint64_t period_ = 0;
    std::vector<std::vector<uint32_t>> check_lits_;  // formula slots every period steps
    std::vector<std::vector<uint64_t>> check_words_;
};

// k branches of km steps each from a common base
class BranchedInterpolation {
public:
    BranchedInterpolation(uint32_t n, uint32_t m, uint32_t k, uint64_t seed);

    uint32_t branches() const { return base_.k; }
    uint64_t branch_length() const { return uint64_t(base_.m) * base_.k; }
    const Formula& base() const { return base_; }
    Formula materialize(uint32_t branch, uint64_t t) const;
    FactorGraph graph(uint32_t branch, uint64_t t) const;

private:
    Formula base_;
    std::vector<uint64_t> vwords_, ewords0_;
    std::vector<std::vector<uint32_t>> lit_;
    std::vector<std::vector<uint64_t>> eword_;
};

// steps t with |f_t - f_{t-1}|^2 > c * gamma * n
std::vector<uint32_t> detect_c_bad(const std::vector<std::vector<double>>& outputs, double c, double gamma);

using VectorAlgorithm = std::function<std::vector<double>(const Formula&, const FactorGraph&)>;

struct InfluenceEstimate {
    std::vector<double> lambda;
    std::vector<Interval> ci;
    double total = 0;
    Interval total_ci;  // sum of per-slot Wilson bounds
};

// pairs of formulas differing in exactly one slot, sharing decorations
InfluenceEstimate estimate_influences(const VectorAlgorithm& f, uint32_t n, uint32_t m, uint32_t k, double c,
                                      double gamma, uint32_t samples, uint64_t seed);

struct WalkSpec {
    uint32_t alphabet = 2, J = 1;
    std::vector<uint32_t> sigma;  // direction of each step, values in [0, J)
    std::vector<uint8_t> bad;     // per edge id

    uint64_t vertices() const;
    uint64_t edges_per_direction() const;
    uint64_t edge_count() const { return edges_per_direction() * J; }
    // edge between x and x with coordinate j changed to b (b != x_j)
    uint64_t edge_id(uint64_t x, uint32_t j, uint32_t b) const;
    uint32_t coord(uint64_t x, uint32_t j) const;
    std::vector<double> lambdas() const;
};

struct WalkResult {
    double probability = 0;
    double bound = 0;
    double se = 0;  // Monte Carlo only
    bool exact = true;
};

constexpr uint64_t kWalkBudget = uint64_t(1) << 24;

WalkResult walk_no_bad_probability(const WalkSpec& spec, uint64_t budget = kWalkBudget);
WalkResult walk_no_bad_monte_carlo(const WalkSpec& spec, uint64_t samples, uint64_t seed);

}  // namespace ogp
