#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "ogp/constants.hpp"
#include "ogp/fix1.hpp"
#include "ogp/harness.hpp"
#include "ogp/overlap.hpp"
#include "ogp/polysim.hpp"
#include "ogp/rules.hpp"

using namespace ogp;

namespace {

struct Shape {
    uint32_t n = 100, m = 0, k = 3;
    double alpha = -1;
    uint64_t seed = 1;

    void add(CLI::App* c) {
        c->add_option("--n", n, "variables");
        c->add_option("--m", m, "clauses");
        c->add_option("--k", k, "clause width");
        c->add_option("--alpha", alpha, "clause density, overrides --m");
        c->add_option("--seed", seed, "seed");
    }
    void resolve() {
        if (alpha >= 0) m = uint32_t(std::floor(alpha * n));
        if (n == 0 || k < 2) throw ConfigError("need n >= 1 and k >= 2");
    }
};

std::ostream& open_out(const std::string& path, std::ofstream& file) {
    if (path.empty() || path == "-") return std::cout;
    file.open(path);
    if (!file) throw ConfigError("cannot write '" + path + "'");
    return file;
}

void cmd_gen(const Shape& s, const std::string& format, const std::string& out, bool graph) {
    Formula f = sample_formula(s.n, s.m, s.k, s.seed);
    std::ofstream file;
    std::ostream& os = open_out(out, file);
    if (graph)
        dump_graph(os, build_factor_graph(f, derive_seed(s.seed, 0xDEC)));
    else if (format == "dimacs")
        for (auto& w : write_dimacs(os, f, {true, false})) std::cerr << "warning: " << w << "\n";
    else
        write_native(os, f);
}

void cmd_run(const Shape& s, const std::string& rule, std::string engine, double eta, const std::string& out) {
    if (engine.empty()) engine = default_engine(rule);
    ExperimentConfig cfg;
    cfg.kind = rule == "fix1" && engine == "direct" ? "fix1" : "run";
    cfg.n = s.n, cfg.m = s.m, cfg.k = s.k, cfg.rule = rule, cfg.engine = engine, cfg.eta = eta;
    cfg.seeds = {s.seed};
    cfg.canonical = "ensemble.k=" + std::to_string(s.k) + "\nensemble.m=" + std::to_string(s.m) +
                    "\nensemble.n=" + std::to_string(s.n) + "\nrule.engine=" + engine + "\nrule.eta=" +
                    std::to_string(eta) + "\nrule.name=" + rule + "\n";
    auto recs = run_experiment(cfg);
    Formula f = sample_formula(s.n, s.m, s.k, s.seed);
    Assignment x = make_algorithm(rule, engine, s.k)(f, build_factor_graph(f, derive_seed(s.seed, 0xDEC)));
    nlohmann::json j = nlohmann::json::parse(record_json(recs.at(0)));
    const RuleInfo& info = rule_info(rule);
    j["rule"] = {{"name", info.name}, {"version", info.version}, {"radius", info.radius}};
    j["engine"] = engine;
    j["assignment"] = format_assignment(x);
    std::ofstream file;
    open_out(out, file) << j.dump(2) << "\n";
}

void cmd_fix1(Shape s, const std::string& seeds, const std::string& report) {
    ExperimentConfig cfg;
    cfg.kind = "fix1";
    cfg.n = s.n, cfg.m = s.m, cfg.k = s.k;
    cfg.seeds = parse_seed_list(seeds);
    cfg.canonical = "experiment.kind=fix1\nensemble.k=" + std::to_string(s.k) + "\nensemble.m=" +
                    std::to_string(s.m) + "\nensemble.n=" + std::to_string(s.n) + "\n";
    auto recs = run_experiment(cfg);
    std::ofstream file;
    std::ostream& os = open_out(report, file);
    os << "seed,unsat_fraction,z_fraction,wall_ms\n";
    for (auto& r : recs)
        os << r.seed << "," << r.metrics.at("unsat_fraction") << "," << r.metrics.at("z_fraction") << ","
           << r.metrics.at("wall_ms") << "\n";
}

void cmd_interpolate(const Shape& s, const std::string& mode, const std::string& rule, std::string engine,
                     const std::string& measure, double kappa, double nu, double c, const std::string& out) {
    if (engine.empty()) engine = default_engine(rule);
    Algorithm alg = make_algorithm(rule, engine, s.k);
    std::vector<Assignment> xs;
    std::vector<Formula> fs;
    if (mode == "path")
        xs = path_outputs(alg, InterpolationPath(s.n, s.m, s.k, s.seed));
    else if (mode == "branched")
        xs = branched_outputs(alg, BranchedInterpolation(s.n, s.m, s.k, s.seed), &fs);
    else
        throw ConfigError("unknown mode '" + mode + "'");
    std::ofstream file;
    std::ostream& os = open_out(out, file);
    if (measure == "entropy-trace") {
        os << "t,delta,cond_entropy,flags\n";
        for (size_t t = 0; t < xs.size(); ++t) {
            double d = t ? hamming_delta(xs[t], xs[t - 1]) : 0.0;
            double h = t ? conditional_entropy(xs[t], {xs[0]}) : 0.0;
            os << t << "," << d << "," << h << "," << (d > 0 ? "moved" : "") << "\n";
        }
    } else if (measure == "c-bad") {
        std::vector<std::vector<double>> ys;
        for (auto& x : xs) ys.push_back(as_reals(x));
        auto bad = detect_c_bad(ys, c, 1.0);
        std::vector<uint8_t> flag(xs.size(), 0);
        for (uint32_t t : bad) flag[t] = 1;
        os << "t,delta,cond_entropy,flags\n";
        for (size_t t = 0; t < xs.size(); ++t)
            os << t << "," << (t ? hamming_delta(xs[t], xs[t - 1]) : 0.0) << ","
               << (t ? conditional_entropy(xs[t], {xs[0]}) : 0.0) << "," << (flag[t] ? "c-bad" : "") << "\n";
    } else if (measure == "scan") {
        KappaSolution ks = solve_kappa(kappa);
        OgpBand band(ks.beta_minus, ks.beta_plus, s.k);
        ScanResult r = scan_forbidden_structure(xs, band, nu, fs);
        os << "t,level,cond_entropy,flags\n";
        for (auto& p : r.trace) os << p.t << "," << p.level << "," << p.h << "," << (band.contains(p.h) ? "in-band" : "") << "\n";
        std::cerr << "band [" << band.lo() << ", " << band.hi() << "] levels found " << r.times.size() - 1 << "/"
                  << s.k << (r.complete ? " complete" : "") << "\n";
    } else {
        throw ConfigError("unknown measure '" + measure + "'");
    }
}

void cmd_simulate_ldp(const Shape& s, const std::string& rule, uint32_t D, uint32_t radius, bool check) {
    LocalRule g = make_local_rule(rule);
    if (radius) g.radius = radius;
    Formula f = sample_formula(s.n, s.m, s.k, s.seed);
    FactorGraph fg = build_factor_graph(f, derive_seed(s.seed, 0xDEC));
    PolySim sim(g, D);
    std::vector<double> vals = sim.evaluate(fg);
    Assignment trunc = run_local(d_truncate(g, D), fg);
    uint32_t covered = 0, mismatches = 0;
    for (uint32_t v = 0; v < s.n; ++v) {
        if (trunc[v] == Sym::Err) continue;
        ++covered;
        mismatches += strict_round(vals[v]) != trunc[v];
    }
    double sq = 0;
    for (double v : vals) sq += v * v;
    std::printf("variables %u\ncovered %u\nnorm2_over_n %.6f\ncache %zu\n", s.n, covered, sq / s.n, sim.cache_size());
    if (check) {
        std::printf("mismatches %u\n", mismatches);
        if (mismatches) throw std::runtime_error("polynomial simulation disagrees with the truncation");
    }
}

void cmd_constants(std::optional<double> kappa, std::optional<uint32_t> psi, std::vector<uint64_t> chernoff) {
    std::printf("%-14s %22s %14s\n", "name", "value", "residual");
    auto row = [](const char* name, double v, double res) { std::printf("%-14s %22.12f %14.3e\n", name, v, res); };
    KappaSolution ks = kappa_star();
    row("kappa_star", ks.kappa_star, ks.residual);
    row("beta_star", ks.beta_star, ks.residual);
    if (kappa) {
        KappaSolution s = solve_kappa(*kappa);
        row("kappa", s.kappa, 0);
        row("beta_min", s.beta_min, s.res_min);
        row("beta_max", s.beta_max, s.res_max);
        row("beta_minus", s.beta_minus, 0);
        row("beta_plus", s.beta_plus, 0);
        row("eps", s.eps, s.eps_grid_step);
    }
    std::vector<uint32_t> ns = {1, 2};
    if (psi) ns = {*psi};
    for (uint32_t N : ns) {
        PsiStar p = psi_star(N);
        std::string name = "psi_star_" + std::to_string(N);
        row(name.c_str(), p.value, std::fabs(p.derivative));
        name = "lambda_" + std::to_string(N);
        row(name.c_str(), p.lambda, 0);
    }
    if (!chernoff.empty()) {
        if (chernoff.size() != 2) throw ConfigError("--chernoff takes k and samples");
        uint64_t k = chernoff[0];
        double beta = ks.beta_star;
        double target = beta * std::log(double(k)) / double(k);
        QModel q = p_n_model(0, p_n_solve_entropy(0, target));
        ChernoffEstimate e = chernoff_exact(q, k);
        row("chernoff_p", e.p, 0);
        ChernoffEstimate mc = chernoff_monte_carlo(q, k, chernoff[1], 1);
        row("chernoff_mc", mc.p, mc.ci.hi - mc.ci.lo);
        row("chernoff_bnd", chernoff_bound(beta), 0);
    }
}

void cmd_report(const std::string& records, const std::string& csv) {
    auto recs = read_records(records);
    emit_report(recs, csv);
    std::printf("%zu records -> %s\n", recs.size(), csv.c_str());
}

}  // namespace

int main(int argc, char** argv) {
    apply_thread_cap();
    CLI::App app{"ogp-lab: random k-SAT local algorithm laboratory"};
    app.require_subcommand(1);

    Shape gs, rs, fs, is, ss, ls;
    std::string format = "native", out, rule = "majority", engine, seeds = "1..5", report, mode = "path",
                measure = "entropy-trace", config, records, csv;
    double eta = 0, kappa = 6, nu = 0.01, c = 1;
    bool graph = false, check = false;
    uint32_t D = 6, radius = 0;
    std::optional<double> ckappa;
    std::optional<uint32_t> psi;
    std::vector<uint64_t> chernoff;

    auto* gen = app.add_subcommand("gen", "sample a random formula");
    gs.add(gen);
    gen->add_option("--format", format)->check(CLI::IsMember({"native", "dimacs"}));
    gen->add_flag("--graph", graph, "dump the decorated factor graph instead");
    gen->add_option("--out", out);

    auto* run = app.add_subcommand("run", "run a rule on one instance or a config file");
    rs.add(run);
    run->add_option("--rule", rule);
    run->add_option("--engine", engine, "local|memory|sequential|simulate:R|direct");
    run->add_option("--eta", eta);
    run->add_option("--out", out);
    run->add_option("--config", config, "sectioned key=value experiment file");

    auto* fix1 = app.add_subcommand("fix1", "Fix phase one across seeds");
    fs.add(fix1);
    fix1->add_option("--seeds", seeds, "e.g. 1..5 or 1,3,7");
    fix1->add_option("--report", report, "csv path, stdout by default");

    auto* interp = app.add_subcommand("interpolate", "run a rule along an interpolation path");
    is.add(interp);
    interp->add_option("--mode", mode)->check(CLI::IsMember({"path", "branched"}));
    interp->add_option("--alg", rule);
    interp->add_option("--engine", engine);
    interp->add_option("--measure", measure)->check(CLI::IsMember({"entropy-trace", "c-bad", "scan"}));
    interp->add_option("--kappa", kappa);
    interp->add_option("--nu", nu);
    interp->add_option("--c", c);
    interp->add_option("--out", out);

    auto* scan = app.add_subcommand("scan", "forbidden-structure scan on a branched interpolation");
    ss.add(scan);
    scan->add_option("--alg", rule);
    scan->add_option("--engine", engine);
    scan->add_option("--kappa", kappa);
    scan->add_option("--nu", nu);
    scan->add_option("--out", out);

    auto* ldp = app.add_subcommand("simulate-ldp", "degree-D polynomial simulation of a local rule");
    ls.add(ldp);
    ldp->add_option("--rule", rule);
    ldp->add_option("--D", D);
    ldp->add_option("--radius", radius);
    ldp->add_flag("--check-match", check);

    auto* cons = app.add_subcommand("constants", "print threshold constants");
    cons->add_option("--kappa", ckappa);
    cons->add_option("--psi", psi);
    cons->add_option("--chernoff", chernoff, "k samples")->expected(2);

    auto* rep = app.add_subcommand("report", "records to CSV plus plot stub");
    rep->add_option("--records", records)->required();
    rep->add_option("--csv", csv)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*gen) {
            gs.resolve();
            cmd_gen(gs, format, out, graph);
        } else if (*run) {
            if (!config.empty()) {
                ExperimentConfig cfg = load_config(config);
                auto recs = run_experiment(cfg);
                if (!cfg.records_path.empty()) append_records(cfg.records_path, recs);
                if (!out.empty() && out != "-") append_records(out, recs);
                if (!cfg.csv_path.empty()) emit_report(recs, cfg.csv_path);
                for (auto& r : recs) std::cout << record_json(r) << "\n";
            } else {
                rs.resolve();
                cmd_run(rs, rule, engine, eta, out);
            }
        } else if (*fix1) {
            fs.resolve();
            cmd_fix1(fs, seeds, report);
        } else if (*interp) {
            is.resolve();
            cmd_interpolate(is, mode, rule, engine, measure, kappa, nu, c, out);
        } else if (*scan) {
            ss.resolve();
            cmd_interpolate(ss, "branched", rule, engine, "scan", kappa, nu, c, out);
        } else if (*ldp) {
            ls.resolve();
            cmd_simulate_ldp(ls, rule, D, radius, check);
        } else if (*cons) {
            cmd_constants(ckappa, psi, chernoff);
        } else if (*rep) {
            cmd_report(records, csv);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const BudgetExceeded& e) {
        std::cerr << "budget exceeded: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
