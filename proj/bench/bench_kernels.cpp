// Serial reference kernels against their OpenMP versions. Results are bitwise
// equal by construction, so only the timings differ.

#include "fxtriplet/config.hpp"
#include "fxtriplet/experiment.hpp"
#include "fxtriplet/robust_solver.hpp"

#include <benchmark/benchmark.h>

using namespace fxtriplet;

namespace {

ExecPolicy policy_of(const benchmark::State& state)
{
    return state.range(0) == 0 ? ExecPolicy::serial : ExecPolicy::parallel;
}

void label(benchmark::State& state)
{
    state.SetLabel(state.range(0) == 0 ? "serial" : "openmp x" + std::to_string(max_threads()));
}

void BM_H1Tabulation(benchmark::State& state)
{
    const RunConfig c = default_config();
    const HSolution h = HSolution::solve(c.reference, c.sim.exec, c.sim.flow, c.sim.grid());
    const AuxiliaryFlow flow = AuxiliaryFlow::build(h, c.sim.flow);
    for (auto _ : state) {
        RobustCorrection r = RobustCorrection::compute(flow, c.reference, policy_of(state));
        benchmark::DoNotOptimize(r);
    }
    label(state);
}

void BM_Batch(benchmark::State& state)
{
    RunConfig c = default_config();
    c.sim.n_paths = 512;
    auto prep = PreparedStrategy::prepare(c, StrategySpec{StrategySpec::Kind::robust, 0.1});
    BatchOptions opt;
    opt.policy = policy_of(state);
    for (auto _ : state) {
        BatchResult b = run_batch(prep->sim(), prep->strategy(), opt);
        benchmark::DoNotOptimize(b);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c.sim.n_paths));
    label(state);
}

void BM_NeutralSolve(benchmark::State& state)
{
    const RunConfig c = default_config();
    for (auto _ : state) {
        HSolution h = HSolution::solve(c.reference, c.sim.exec, c.sim.flow, c.sim.grid());
        benchmark::DoNotOptimize(h);
    }
}

}  // namespace

BENCHMARK(BM_H1Tabulation)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Batch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NeutralSolve)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
