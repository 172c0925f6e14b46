// OpenMP kernels against their serial reference.
#include <benchmark/benchmark.h>

#include "ogp/interpolation.hpp"
#include "ogp/local_engine.hpp"
#include "ogp/polysim.hpp"
#include "ogp/rules.hpp"

using namespace ogp;

namespace {

FactorGraph bench_graph(uint32_t n) { return build_factor_graph(sample_formula(n, 2 * n, 3, 7), 8); }

void BM_RunLocalParallel(benchmark::State& st) {
    FactorGraph g = bench_graph(uint32_t(st.range(0)));
    LocalRule rule = make_local_rule("majority");
    rule.radius = 2;
    for (auto _ : st) benchmark::DoNotOptimize(run_local(rule, g));
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_RunLocalSerial(benchmark::State& st) {
    FactorGraph g = bench_graph(uint32_t(st.range(0)));
    LocalRule rule = make_local_rule("majority");
    rule.radius = 2;
    for (auto _ : st) benchmark::DoNotOptimize(run_local_serial(rule, g));
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_PolySimEvaluate(benchmark::State& st) {
    FactorGraph g = build_factor_graph(sample_formula(500, 250, 3, 9), 10);
    LocalRule rule = make_local_rule("majority");
    rule.radius = 1;
    for (auto _ : st) {
        PolySim sim(rule, uint32_t(st.range(0)));
        benchmark::DoNotOptimize(sim.evaluate(g));
    }
}

void BM_WalkEnumeration(benchmark::State& st) {
    WalkSpec w{2, 2, {}, std::vector<uint8_t>(4, 0)};
    for (int64_t t = 0; t < st.range(0); ++t) w.sigma.push_back(uint8_t(t & 1));
    w.bad[1] = w.bad[2] = 1;
    for (auto _ : st) benchmark::DoNotOptimize(walk_no_bad_probability(w));
}

}  // namespace

BENCHMARK(BM_RunLocalParallel)->Arg(2000)->Arg(20000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RunLocalSerial)->Arg(2000)->Arg(20000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PolySimEvaluate)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_WalkEnumeration)->Arg(4)->Arg(8)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
