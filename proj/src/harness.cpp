#include "ogp/harness.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ogp/fix1.hpp"
#include "ogp/rules.hpp"

namespace ogp {

SatEta sat_eta_objective(const Assignment& x, const Formula& f, double eta, uint64_t budget) {
    if (eta < 0 || eta > 1) throw std::invalid_argument("eta must lie in [0,1]");
    if (x.size() != f.n) throw std::invalid_argument("assignment length does not match formula");
    SatEta out;
    int64_t flips = max_flips(x, eta);
    if (flips < 0) return out;
    if (repair_candidate_count(x, eta) <= budget) {
        uint32_t best = 0;
        enumerate_repairs(x, f, eta, [&](const Assignment&, uint32_t sat) {
            best = std::max(best, sat);
            return best < f.m;
        });
        out.value = best;
        return out;
    }
    out.exact = false;
    out.value = satisfied_count(f, greedy_repair(x, f, flips));
    return out;
}

Assignment rep(const Assignment& x, const std::vector<uint32_t>& B, const Assignment& z) {
    if (B.size() != z.size()) throw std::invalid_argument("replacement values do not match index set");
    Assignment y = x;
    for (size_t i = 0; i < B.size(); ++i) {
        if (B[i] >= x.size()) throw std::out_of_range("replacement index out of range");
        y[B[i]] = z[i];
    }
    return y;
}

Algorithm make_algorithm(const std::string& rule, const std::string& engine, uint32_t k) {
    if (engine == "local") {
        LocalRule r = make_local_rule(rule);
        return [r](const Formula&, const FactorGraph& g) { return run_local(r, g); };
    }
    if (engine == "memory") {
        MemoryRule r = make_memory_rule(rule, k);
        return [r](const Formula&, const FactorGraph& g) { return run_local_memory(r, g).x; };
    }
    if (engine == "sequential") {
        LocalRule r = make_probability_rule(rule);
        return [r](const Formula&, const FactorGraph& g) { return run_sequential_local(r, g); };
    }
    if (engine == "direct") {
        if (rule != "fix1") throw std::invalid_argument("direct engine exists only for fix1");
        return [](const Formula& f, const FactorGraph& g) { return run_fix1(f, g).x; };
    }
    if (engine.rfind("simulate:", 0) == 0) {
        uint32_t R = uint32_t(std::stoul(engine.substr(9)));
        MemoryRule r = make_memory_rule(rule, k);
        return [r, R](const Formula&, const FactorGraph& g) { return run_r_local_simulation(r, g, R); };
    }
    throw std::invalid_argument("unknown engine '" + engine + "'");
}

std::string default_engine(const std::string& rule) {
    switch (rule_info(rule).kind) {
        case RuleKind::Local: return "local";
        case RuleKind::Probability: return "sequential";
        default: return rule == "fix1" ? "direct" : "memory";
    }
}

std::vector<Assignment> path_outputs(const Algorithm& alg, const InterpolationPath& path, uint64_t stride) {
    if (stride == 0) throw std::invalid_argument("stride must be positive");
    std::vector<Assignment> out;
    for (uint64_t t = 0; t <= path.length(); t += stride) out.push_back(alg(path.materialize(t), path.graph(t)));
    return out;
}

std::vector<Assignment> branched_outputs(const Algorithm& alg, const BranchedInterpolation& br,
                                         std::vector<Formula>* formulas) {
    std::vector<Assignment> out;
    out.push_back(alg(br.base(), br.graph(0, 0)));
    if (formulas) formulas->push_back(br.base());
    for (uint32_t b = 0; b < br.branches(); ++b)
        for (uint64_t t = 1; t <= br.branch_length(); ++t) {
            Formula f = br.materialize(b, t);
            out.push_back(alg(f, br.graph(b, t)));
            if (formulas) formulas->push_back(std::move(f));
        }
    return out;
}

std::vector<double> as_reals(const Assignment& x) {
    std::vector<double> out(x.size());
    for (size_t i = 0; i < x.size(); ++i) out[i] = double(int(x[i]));
    return out;
}

ConcentrationReport concentration_experiment(const Algorithm& alg, const Ensemble& ens, double eta,
                                             const std::vector<uint64_t>& seeds) {
    ConcentrationReport rep;
    rep.y.resize(seeds.size());
    std::vector<uint8_t> exact(seeds.size(), 1);
    for (size_t s = 0; s < seeds.size(); ++s) {
        Formula f = ens.fixed ? *ens.fixed : sample_formula(ens.n, ens.m, ens.k, seeds[s]);
        FactorGraph g = build_factor_graph(f, derive_seed(seeds[s], 0xDEC));
        SatEta v = sat_eta_objective(alg(f, g), f, eta);
        rep.y[s] = double(v.value);
        exact[s] = v.exact;
    }
    if (seeds.empty()) return rep;
    for (double v : rep.y) rep.mean += v;
    rep.mean /= double(rep.y.size());
    uint32_t n = ens.fixed ? ens.fixed->n : ens.n, m = ens.fixed ? ens.fixed->m : ens.m;
    rep.yardstick = m / std::log(double(n));
    for (size_t s = 0; s < seeds.size(); ++s) {
        double d = std::fabs(rep.y[s] - rep.mean);
        rep.max_dev = std::max(rep.max_dev, d);
        if (d >= rep.yardstick) rep.flagged.push_back(seeds[s]);
        rep.exact &= exact[s] != 0;
    }
    return rep;
}

std::vector<uint64_t> parse_seed_list(const std::string& s) {
    std::vector<uint64_t> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (item.empty()) continue;
        size_t dots = item.find("..");
        try {
            if (dots == std::string::npos) {
                out.push_back(std::stoull(item));
            } else {
                uint64_t a = std::stoull(item.substr(0, dots)), b = std::stoull(item.substr(dots + 2));
                if (b < a) throw ConfigError("empty seed range '" + item + "'");
                for (uint64_t v = a; v <= b; ++v) out.push_back(v);
            }
        } catch (const std::logic_error&) {
            throw ConfigError("bad seed '" + item + "'");
        }
    }
    return out;
}

namespace {

template <class T>
T get_num(const boost::property_tree::ptree& pt, const std::string& key, T def) {
    auto v = pt.get_optional<std::string>(key);
    if (!v) return def;
    try {
        size_t pos = 0;
        double d = std::stod(*v, &pos);
        if (pos != v->size()) throw std::invalid_argument(key);
        return T(d);
    } catch (const std::logic_error&) {
        throw ConfigError("key '" + key + "' is not a number: '" + *v + "'");
    }
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    boost::property_tree::ptree pt;
    std::istringstream is(text);
    try {
        boost::property_tree::ini_parser::read_ini(is, pt);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    static const std::set<std::string> known = {
        "experiment.kind", "ensemble.n",    "ensemble.m",   "ensemble.alpha", "ensemble.k",
        "rule.name",       "rule.engine",   "rule.eta",     "band.kappa",     "seeds.list",
        "output.records",  "output.csv",    "budgets.repair"};
    std::map<std::string, std::string> flat;
    for (auto& sec : pt)
        for (auto& kv : sec.second) {
            std::string key = sec.first + "." + kv.first;
            if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
            flat[key] = kv.second.data();
        }
    ExperimentConfig c;
    c.kind = pt.get<std::string>("experiment.kind", c.kind);
    c.n = get_num<uint32_t>(pt, "ensemble.n", 0);
    c.k = get_num<uint32_t>(pt, "ensemble.k", 3);
    if (pt.get_optional<std::string>("ensemble.alpha")) c.alpha = get_num<double>(pt, "ensemble.alpha", 0);
    c.m = c.alpha ? uint32_t(std::floor(*c.alpha * c.n)) : get_num<uint32_t>(pt, "ensemble.m", 0);
    c.rule = pt.get<std::string>("rule.name", c.rule);
    c.engine = pt.get<std::string>("rule.engine", c.engine);
    c.eta = get_num<double>(pt, "rule.eta", 0);
    c.kappa = get_num<double>(pt, "band.kappa", 6);
    c.seeds = parse_seed_list(pt.get<std::string>("seeds.list", ""));
    c.records_path = pt.get<std::string>("output.records", "");
    c.csv_path = pt.get<std::string>("output.csv", "");
    c.repair_budget = get_num<uint64_t>(pt, "budgets.repair", kRepairBudget);
    if (c.kind != "run" && c.kind != "fix1" && c.kind != "concentration")
        throw ConfigError("unknown experiment kind '" + c.kind + "'");
    if (c.n == 0) throw ConfigError("ensemble.n must be positive");
    if (c.k < 2) throw ConfigError("ensemble.k must be at least 2");
    if (c.repair_budget == 0) throw ConfigError("budgets must be positive");
    if (c.eta < 0 || c.eta > 1) throw ConfigError("rule.eta must lie in [0,1]");
    for (auto& [key, val] : flat) c.canonical += key + "=" + val + "\n";
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string record_json(const RunRecord& r) {
    nlohmann::json j;
    j["schema"] = kRecordSchema;
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(r.config_hash));
    j["config_hash"] = buf;
    j["seed"] = r.seed;
    j["code_version"] = r.code_version;
    j["metrics"] = r.metrics;
    return j.dump();
}

RunRecord record_from_json(const std::string& line) {
    auto j = nlohmann::json::parse(line);
    if (j.at("schema").get<int>() != kRecordSchema) throw std::runtime_error("unsupported record schema");
    RunRecord r;
    r.config_hash = std::stoull(j.at("config_hash").get<std::string>(), nullptr, 16);
    r.seed = j.at("seed").get<uint64_t>();
    r.code_version = j.at("code_version").get<std::string>();
    r.metrics = j.at("metrics").get<std::map<std::string, double>>();
    return r;
}

std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg) {
    std::vector<RunRecord> out;
    if (cfg.seeds.empty()) return out;
    if (cfg.kind == "concentration") {
        Algorithm alg = make_algorithm(cfg.rule, cfg.engine, cfg.k);
        ConcentrationReport rep = concentration_experiment(alg, Ensemble{cfg.n, cfg.m, cfg.k, {}}, cfg.eta, cfg.seeds);
        for (size_t s = 0; s < cfg.seeds.size(); ++s) {
            RunRecord r;
            r.config_hash = cfg.hash();
            r.seed = cfg.seeds[s];
            r.metrics["sat_eta"] = rep.y[s];
            r.metrics["deviation"] = rep.y[s] - rep.mean;
            r.metrics["yardstick"] = rep.yardstick;
            r.metrics["exact"] = rep.exact;
            out.push_back(r);
        }
        return out;
    }
    std::string engine = cfg.kind == "fix1" ? "direct" : cfg.engine;
    std::string rule = cfg.kind == "fix1" ? "fix1" : cfg.rule;
    Algorithm alg = make_algorithm(rule, engine, cfg.k);
    for (uint64_t seed : cfg.seeds) {
        RunRecord r;
        r.config_hash = cfg.hash();
        r.seed = seed;
        Formula f = sample_formula(cfg.n, cfg.m, cfg.k, seed);
        FactorGraph g = build_factor_graph(f, derive_seed(seed, 0xDEC));
        auto t0 = std::chrono::steady_clock::now();
        Assignment x = alg(f, g);
        double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        uint32_t errs = 0, falses = 0;
        for (Sym s : x) {
            errs += s == Sym::Err;
            falses += s == Sym::F;
        }
        if (errs == 0) r.metrics["unsat_fraction"] = f.m ? double(f.m - satisfied_count(f, x)) / f.m : 0.0;
        r.metrics["err_fraction"] = double(errs) / f.n;
        if (cfg.kind == "fix1") r.metrics["z_fraction"] = double(falses) / f.n;
        if (cfg.eta > 0 || errs > 0) {
            SatEta v = sat_eta_objective(x, f, cfg.eta, cfg.repair_budget);
            r.metrics["sat_eta"] = double(v.value);
            r.metrics["sat_eta_exact"] = v.exact;
        }
        r.metrics["wall_ms"] = ms;
        out.push_back(r);
    }
    return out;
}

void append_records(const std::string& path, const std::vector<RunRecord>& records) {
    std::ofstream out(path, std::ios::app);
    if (!out) throw std::runtime_error("cannot write records to '" + path + "'");
    for (auto& r : records) out << record_json(r) << "\n";
}

std::vector<RunRecord> read_records(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read records from '" + path + "'");
    std::vector<RunRecord> out;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) out.push_back(record_from_json(line));
    return out;
}

void emit_report(const std::vector<RunRecord>& records, const std::string& csv_path) {
    std::set<std::string> keys;
    for (auto& r : records)
        for (auto& [k, v] : r.metrics) keys.insert(k);
    std::ofstream out(csv_path);
    if (!out) throw std::runtime_error("cannot write '" + csv_path + "'");
    out << "config_hash,seed";
    for (auto& k : keys) out << "," << k;
    out << "\n";
    char buf[32];
    for (auto& r : records) {
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(r.config_hash));
        out << buf << "," << r.seed;
        for (auto& k : keys) {
            out << ",";
            auto it = r.metrics.find(k);
            if (it != r.metrics.end()) out << std::setprecision(17) << it->second;
        }
        out << "\n";
    }
    std::ofstream gp(csv_path + ".gp");
    gp << "set datafile separator ','\nset key autotitle columnhead\n";
    if (!keys.empty()) {
        gp << "plot ";
        size_t col = 3;
        for (auto it = keys.begin(); it != keys.end(); ++it, ++col)
            gp << (col > 3 ? ", " : "") << "'" << csv_path << "' using 2:" << col << " with points";
        gp << "\n";
    }
}

}  // namespace ogp
