#pragma once

#include <cstdint>
#include <vector>

#include "ogp/factor_graph.hpp"
#include "ogp/local_engine.hpp"

namespace ogp {

enum class Fix1Branch : uint8_t { NotNegative = 0, HitsZ = 1, Safe = 2, Fallback = 3 };

struct Fix1Step {
    uint32_t clause = 0;
    Fix1Branch branch = Fix1Branch::NotNegative;
    uint32_t j = 0;    // position in the shuffled literal order (0-based)
    uint32_t var = 0;  // variable added to Z, if any
};

struct Fix1Result {
    Assignment x;
    std::vector<uint8_t> in_z;
    std::vector<uint32_t> z;  // in insertion order
    std::vector<Fix1Step> trace;
};

// i must not be in Z
bool is_z_safe(const Formula& f, const std::vector<uint8_t>& in_z, uint32_t i);

// clause order by clause-vertex word, literal order by edge word (both from g)
Fix1Result run_fix1(const Formula& f, const FactorGraph& g);
Fix1Result run_fix1(const Formula& f, uint64_t seed);

// radius-3 memory rule; clause vertices act, mu(var) = 1 marks membership in Z
MemoryRule fix1_as_memory_rule(uint32_t k);

// 0-based slot of the fallback literal, ceil(k/2) - 1
inline uint32_t fix1_fallback_slot(uint32_t k) { return (k + 1) / 2 - 1; }

}  // namespace ogp
