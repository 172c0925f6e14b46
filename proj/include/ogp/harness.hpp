#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ogp/interpolation.hpp"
#include "ogp/local_engine.hpp"

namespace ogp {

constexpr const char* kCodeVersion = "0.1.0";
constexpr int kRecordSchema = 1;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SatEta {
    uint64_t value = 0;
    bool exact = true;
};

// max satisfied-clause count over y within eta of x; 0 when x has more than eta*n err entries
SatEta sat_eta_objective(const Assignment& x, const Formula& f, double eta, uint64_t budget = kRepairBudget);

// x with coordinates in B replaced by z (z indexed like B)
Assignment rep(const Assignment& x, const std::vector<uint32_t>& B, const Assignment& z);

// runs an algorithm on (formula, decorated graph)
using Algorithm = std::function<Assignment(const Formula&, const FactorGraph&)>;
Algorithm make_algorithm(const std::string& rule, const std::string& engine, uint32_t k);
std::string default_engine(const std::string& rule);  // local, sequential or memory by rule kind

// outputs at t = 0, stride, 2 stride, ... up to the path length
std::vector<Assignment> path_outputs(const Algorithm& alg, const InterpolationPath& path, uint64_t stride = 1);
// base output followed by every step of branch 0, then branch 1, ...
std::vector<Assignment> branched_outputs(const Algorithm& alg, const BranchedInterpolation& br,
                                         std::vector<Formula>* formulas = nullptr);
std::vector<double> as_reals(const Assignment& x);  // T -> 1, F -> -1, err -> 0

struct Ensemble {
    uint32_t n = 0, m = 0, k = 0;
    std::optional<Formula> fixed;  // when set only decorations are resampled per seed
};

struct ConcentrationReport {
    std::vector<double> y;
    double mean = 0, max_dev = 0, yardstick = 0;  // yardstick = m / log n
    std::vector<uint64_t> flagged;                // seeds with |Y - mean| >= yardstick
    bool exact = true;
    double flagged_fraction() const { return y.empty() ? 0 : double(flagged.size()) / y.size(); }
};

ConcentrationReport concentration_experiment(const Algorithm& alg, const Ensemble& ens, double eta,
                                             const std::vector<uint64_t>& seeds);

struct ExperimentConfig {
    std::string kind = "run";
    uint32_t n = 0, m = 0, k = 3;
    std::optional<double> alpha;
    std::string rule = "majority", engine = "local";
    double eta = 0, kappa = 6;
    std::vector<uint64_t> seeds;
    std::string records_path, csv_path;
    uint64_t repair_budget = kRepairBudget;
    std::string canonical;  // sorted key=value text the hash is taken over

    uint64_t hash() const { return fnv1a(canonical); }
};

// sectioned key=value text; throws ConfigError
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

struct RunRecord {
    uint64_t config_hash = 0;
    uint64_t seed = 0;
    std::string code_version = kCodeVersion;
    std::map<std::string, double> metrics;
};

std::string record_json(const RunRecord& r);
RunRecord record_from_json(const std::string& line);

std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg);
void append_records(const std::string& path, const std::vector<RunRecord>& records);
std::vector<RunRecord> read_records(const std::string& path);
// CSV with one row per record plus a gnuplot stub next to it
void emit_report(const std::vector<RunRecord>& records, const std::string& csv_path);

std::vector<uint64_t> parse_seed_list(const std::string& s);  // "1,2,5..8"

}  // namespace ogp
