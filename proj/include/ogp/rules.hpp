#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ogp/local_engine.hpp"

namespace ogp {

enum class RuleKind { Local, Probability, Memory };

struct RuleInfo {
    std::string name;
    RuleKind kind;
    uint32_t version;
    uint32_t radius;
    std::string summary;
};

const std::vector<RuleInfo>& rule_registry();
const RuleInfo& rule_info(const std::string& name);  // throws std::invalid_argument

LocalRule make_local_rule(const std::string& name);
LocalRule make_probability_rule(const std::string& name);
MemoryRule make_memory_rule(const std::string& name, uint32_t k);

struct BpOptions {
    uint32_t radius = 3;
    uint32_t iterations = 10;
};
// root marginal P[x_root = T] of belief propagation run on the neighborhood
double bp_root_marginal(const RootedNeighborhood& nb, uint32_t iterations);
LocalRule bp_rule(const BpOptions& opt = {});

}  // namespace ogp
