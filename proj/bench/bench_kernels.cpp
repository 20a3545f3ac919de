// Serial reference kernels against their OpenMP counterparts. Set
// OMP_NUM_THREADS to vary the thread count.

#include <map>
#include <string>

#include <benchmark/benchmark.h>

#include "immunize/backtest.hpp"
#include "immunize/bond.hpp"
#include "immunize/scenario.hpp"
#include "immunize/synth.hpp"

namespace {

using namespace immunize;

std::vector<Bond> many_bonds(std::size_t n) {
    std::vector<Bond> out;
    for (std::size_t i = 0; i < n; ++i) {
        const double m = 0.5 + 19.5 * double(i % 977) / 977.0;
        out.push_back({"X" + std::to_string(i), 100.0, 0.01 + 0.0001 * double(i % 50), int(1 + i % 2), m,
                       std::nullopt});
    }
    return out;
}

const SynthHistory& history(int days) {
    static std::map<int, SynthHistory> cache;
    auto it = cache.find(days);
    if (it == cache.end()) {
        SynthConfig sc;
        sc.days = days;
        sc.sigma_noise = 0.0001;
        it = cache.emplace(days, synth_history(sc)).first;
    }
    return it->second;
}

BacktestConfig wide_config() {
    BacktestConfig c;
    c.target_id = "B2";
    c.net_carry = true;
    // Repeat the four demo strategies so there is enough work to split.
    for (int r = 0; r < 4; ++r) {
        c.strategies.push_back({Strategy::Duration, {"B4"}});
        c.strategies.push_back({Strategy::Quadratic, {"B3", "B1"}});
        c.strategies.push_back({Strategy::DurationConvexity, {"B3", "B1"}});
        c.strategies.push_back({Strategy::Cubic, {"B3", "B1", "B4"}});
    }
    return c;
}

template <bool Parallel>
void BM_AnalyzeBatch(benchmark::State& state) {
    const auto bonds = many_bonds(std::size_t(state.range(0)));
    const auto& curve = history(5).curves[0];
    std::vector<double> yields;
    for (const auto& b : bonds) yields.push_back(spot(curve, b.maturity));
    for (auto _ : state) {
        auto r = Parallel ? analyze_batch(bonds, yields) : serial::analyze_batch(bonds, yields);
        benchmark::DoNotOptimize(r.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_Backtest(benchmark::State& state) {
    const auto& h = history(int(state.range(0)));
    const auto universe = demo_universe();
    const auto config = wide_config();
    for (auto _ : state) {
        auto r = Parallel ? run_backtest(h.curves, universe, config) : serial::run_backtest(h.curves, universe, config);
        benchmark::DoNotOptimize(r.strategies.data());
    }
}

template <bool Parallel>
void BM_Correlations(benchmark::State& state) {
    const auto& h = history(int(state.range(0)));
    for (auto _ : state) {
        auto r = Parallel ? tenor_correlations(h.curves) : serial::tenor_correlations(h.curves);
        benchmark::DoNotOptimize(r.values.data());
    }
}

template <bool Parallel>
void BM_ResidualScaling(benchmark::State& state) {
    const auto& curve = history(5).curves[0];
    const auto universe = demo_universe();
    auto snap = [&](const char* id, double n = 0.0) {
        return snapshot(universe.at(id), analyze(universe.at(id), curve), n);
    };
    const std::array legs{snap("B3"), snap("B1"), snap("B4")};
    const auto plan = build_hedge(Strategy::Cubic, snap("B2", 100.0), legs);
    const auto seg = fit_segment(curve, 2.0, 10.0, 3);
    const auto shock = ShockSpec::parametric(0.002, 0.3, 0.1);
    const int steps = int(state.range(0));
    for (auto _ : state) {
        auto r = Parallel ? residual_scaling(plan, universe, curve, shock, steps, seg)
                          : serial::residual_scaling(plan, universe, curve, shock, steps, seg);
        benchmark::DoNotOptimize(r.data());
    }
}

}  // namespace

BENCHMARK(BM_AnalyzeBatch<false>)->Name("analyze_batch/serial")->Arg(1000)->Arg(100000);
BENCHMARK(BM_AnalyzeBatch<true>)->Name("analyze_batch/omp")->Arg(1000)->Arg(100000);
BENCHMARK(BM_Backtest<false>)->Name("run_backtest/serial")->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Backtest<true>)->Name("run_backtest/omp")->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Correlations<false>)->Name("tenor_correlations/serial")->Arg(250)->Arg(5000);
BENCHMARK(BM_Correlations<true>)->Name("tenor_correlations/omp")->Arg(250)->Arg(5000);
BENCHMARK(BM_ResidualScaling<false>)->Name("residual_scaling/serial")->Arg(8)->Arg(32);
BENCHMARK(BM_ResidualScaling<true>)->Name("residual_scaling/omp")->Arg(8)->Arg(32);
BENCHMARK_MAIN();
